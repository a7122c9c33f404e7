// Copyright 2026 The asckit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asc/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "asc/balance.hpp"
#include "asc/csv.hpp"
#include "asc/ensemble.hpp"
#include "asc/error.hpp"
#include "asc/harness.hpp"
#include "asc/pipeline.hpp"
#include "asc/run_config.hpp"
#include "asc/ssl.hpp"

#ifndef ASC_VERSION
#define ASC_VERSION "0.1.0"
#endif

namespace asc {

const char* version() { return ASC_VERSION; }

namespace {

namespace fs = std::filesystem;

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Config keys become `--<key>` flags on every pipeline subcommand; flags
// override values from `--config`.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : RunConfig::keys()) {
      const std::string name = key.name;
      sub->add_option_function<std::string>(
          "--" + name, [this, name](const std::string& v) { overrides[name] = v; },
          key.help + " (default: " + (key.default_value.empty() ? "none" : key.default_value) + ")");
    }
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_file.empty()) c.merge_file(config_file);
    for (const auto& [k, v] : overrides) c.set(k, v);
    return c;
  }
};

std::string require(const RunConfig& c, const std::string& key) {
  const auto& v = c.get(key);
  if (v.empty()) throw ConfigError("missing required setting --" + key);
  return v;
}

// Creates the output directory and records the resolved config and version.
fs::path open_run_dir(const RunConfig& c, const std::string& command) {
  const fs::path dir = require(c, "out_dir");
  fs::create_directories(dir);
  csv::write_text(dir / "config.txt", c.render());
  std::ostringstream run;
  run << "command = " << command << "\nversion = " << version() << "\nseed = " << c.get("seed")
      << '\n';
  csv::write_text(dir / "run.txt", run.str());
  return dir;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + '\n';
  csv::write_text(path, text);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

LabelMap to_submission(const std::vector<std::string>& ids, const std::vector<std::size_t>& labels,
                       const std::vector<std::string>& vocabulary) {
  LabelMap out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = vocabulary[labels[i]];
  return out;
}

void save_pipeline(const FeaturePipeline& pipe, const fs::path& dir) {
  std::ostringstream out;
  out << "variant = " << to_string(pipe.variant()) << "\nrows = " << pipe.rows()
      << "\ncols = " << pipe.cols() << '\n';
  csv::write_text(dir / "pipeline.txt", out.str());
  if (pipe.standardizer()) write_standardizer(*pipe.standardizer(), dir / "standardizer.csv");
}

FeaturePipeline load_pipeline(const fs::path& dir) {
  std::map<std::string, std::string> kv;
  for (const auto& line : read_lines(dir / "pipeline.txt")) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw Error("malformed pipeline.txt line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  std::optional<StandardizerStats> stats;
  if (fs::exists(dir / "standardizer.csv")) stats = read_standardizer(dir / "standardizer.csv");
  return FeaturePipeline(parse_variant(kv.at("variant")), std::move(stats),
                         std::stoul(kv.at("rows")), std::stoul(kv.at("cols")));
}

void write_predictions(const fs::path& dir, const std::vector<std::string>& ids,
                       const std::vector<std::string>& vocabulary, const ProbabilityTable& probs,
                       const std::vector<std::size_t>& labels) {
  write_probabilities({ids, vocabulary, probs}, dir / "probabilities.csv");
  write_submission(to_submission(ids, labels, vocabulary), dir / "submission.csv");
}

void report_accuracy(std::ostream& out, const std::string& name, const ProbabilityTable& probs,
                     const MatrixSet& set) {
  if (std::none_of(set.labels.begin(), set.labels.end(), [](const auto& l) { return l.has_value(); })) {
    return;
  }
  out << name << ',' << fixed4(accuracy(probs, set.labels)) << '\n';
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto dir = open_run_dir(c, "train");
  const Dataset train_ds = load_manifest(require(c, "train_manifest"));
  const auto& vocab = train_ds.vocabulary();
  const MatrixSet train = load_matrix_set(train_ds, vocab);
  const auto pipe = FeaturePipeline::fit(parse_variant(c.get("preprocess")),
                                         c.get_bool("standardize"), train.matrices);
  const auto examples = make_examples(pipe.features(train.matrices), train.labels, vocab.size());

  const std::uint64_t seed = derive_seed(c.get_u64("seed"), "train");
  Rng init = make_rng(seed, "model:init");
  auto model = ClassifierModel::initialized(parse_architecture(c.get("model")),
                                            pipe.rows() * pipe.cols(), vocab.size(),
                                            c.get_size("hidden_units"), init);
  TrainConfig tc = c.train_config();
  tc.seed = seed;
  const auto result = asc::train(std::move(model), examples, tc, make_augmenter(c, pipe.rows(), pipe.cols()));

  write_model(result.model, dir / "model.ascm");
  write_lines(dir / "labels.txt", vocab);
  save_pipeline(pipe, dir);
  std::ostringstream loss;
  loss << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    loss << e + 1 << ',' << csv::format_double(result.loss_history[e]) << '\n';
  }
  csv::write_text(dir / "loss.csv", loss.str());
  if (!result.loss_history.empty()) out << "final_loss," << fixed4(result.loss_history.back()) << '\n';

  if (!c.get("test_manifest").empty()) {
    const MatrixSet test = load_matrix_set(load_manifest(c.get("test_manifest")), vocab);
    const auto probs = predict_batch(result.model, pipe.features(test.matrices));
    write_predictions(dir, test.ids, vocab, probs, argmax_labels(probs));
    report_accuracy(out, "test_accuracy", probs, test);
  }
  return 0;
}

int cmd_predict(const RunConfig& c, const std::string& model_dir, const std::string& manifest,
                std::ostream& out) {
  const auto dir = open_run_dir(c, "predict");
  const fs::path md = model_dir;
  const auto model = read_model(md / "model.ascm");
  const auto vocab = read_lines(md / "labels.txt");
  if (vocab.size() != model.class_count()) throw Error("labels.txt does not match the model");
  const auto pipe = load_pipeline(md);
  const MatrixSet test = load_matrix_set(load_manifest(manifest), vocab);
  const auto probs = predict_batch(model, pipe.features(test.matrices));
  write_predictions(dir, test.ids, vocab, probs, argmax_labels(probs));
  out << "predicted," << probs.size() << '\n';
  report_accuracy(out, "accuracy", probs, test);
  return 0;
}

int cmd_fuse(const RunConfig& c, const std::vector<std::string>& inputs, std::ostream& out) {
  const auto dir = open_run_dir(c, "fuse");
  if (inputs.empty()) throw ConfigError("fuse needs at least one --inputs file");
  std::vector<ProbabilityFile> files;
  for (const auto& path : inputs) files.push_back(read_probabilities(path));
  for (const auto& f : files) {
    if (f.segment_ids != files.front().segment_ids || f.vocabulary != files.front().vocabulary) {
      throw Error("probability files disagree on segment ids or classes");
    }
  }
  std::vector<ProbabilityTable> tables;
  for (const auto& f : files) tables.push_back(f.probabilities);
  const auto& ids = files.front().segment_ids;
  const auto& vocab = files.front().vocabulary;
  const std::string method = c.get("fusion");
  if (method == "average") {
    const auto fused = fuse_average(tables);
    write_predictions(dir, ids, vocab, fused.probabilities, fused.labels);
  } else if (method == "majority") {
    std::vector<std::vector<std::size_t>> votes;
    for (const auto& t : tables) votes.push_back(argmax_labels(t));
    const auto labels = fuse_majority(votes, vocab.size(), std::span<const ProbabilityTable>(tables));
    write_submission(to_submission(ids, labels, vocab), dir / "submission.csv");
  } else {
    throw ConfigError("fusion must be average or majority, got '" + method + "'");
  }
  out << "fused," << inputs.size() << ',' << method << '\n';
  return 0;
}

int cmd_kfold(const RunConfig& c, std::ostream& out) {
  const auto dir = open_run_dir(c, "kfold");
  const Dataset train_ds = load_manifest(require(c, "train_manifest"));
  const auto& vocab = train_ds.vocabulary();
  const MatrixSet train = load_matrix_set(train_ds, vocab);
  const auto pipe = FeaturePipeline::fit(parse_variant(c.get("preprocess")),
                                         c.get_bool("standardize"), train.matrices);
  const auto features = pipe.features(train.matrices);
  const auto trainer = make_trainer(c, pipe.rows() * pipe.cols(), vocab.size(),
                                    make_augmenter(c, pipe.rows(), pipe.cols()));
  const auto result = train_kfold(train_ds, features, c.get_size("folds"), trainer,
                                  parse_group_key(c.get("group_key")),
                                  derive_seed(c.get_u64("seed"), "kfold"), ExecPolicy::parallel);

  std::ostringstream folds;
  folds << "group,fold\n";
  for (const auto& [group, fold] : result.folds.fold_of_group) {
    folds << csv::escape(group) << ',' << fold << '\n';
  }
  csv::write_text(dir / "folds.csv", folds.str());
  for (std::size_t k = 0; k < result.models.size(); ++k) {
    write_model(result.models[k], dir / ("fold" + std::to_string(k) + ".ascm"));
  }
  write_lines(dir / "labels.txt", vocab);
  save_pipeline(pipe, dir);
  write_probabilities({train.ids, vocab, result.out_of_fold}, dir / "oof_probabilities.csv");
  out << "oof_accuracy," << fixed4(result.out_of_fold_accuracy) << '\n';

  if (!c.get("test_manifest").empty()) {
    const MatrixSet test = load_matrix_set(load_manifest(c.get("test_manifest")), vocab);
    const auto test_x = pipe.features(test.matrices);
    std::vector<ProbabilityTable> tables;
    for (const auto& m : result.models) tables.push_back(predict_batch(m, test_x));
    const auto fused = fuse_average(tables);
    std::vector<std::size_t> labels = fused.labels;
    if (c.get("fusion") == "majority") {
      std::vector<std::vector<std::size_t>> votes;
      for (const auto& t : tables) votes.push_back(argmax_labels(t));
      labels = fuse_majority(votes, vocab.size(), std::span<const ProbabilityTable>(tables));
    } else if (c.get("fusion") != "average") {
      throw ConfigError("fusion must be average or majority");
    }
    write_predictions(dir, test.ids, vocab, fused.probabilities, labels);
    if (std::all_of(test.labels.begin(), test.labels.end(), [](const auto& l) { return l.has_value(); })) {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == *test.labels[i];
      out << "test_accuracy," << fixed4(static_cast<double>(correct) / static_cast<double>(labels.size()))
          << '\n';
    }
  }
  return 0;
}

int cmd_ssl(const RunConfig& c, std::ostream& out) {
  const auto dir = open_run_dir(c, "ssl");
  const Dataset train_ds = load_manifest(require(c, "train_manifest"));
  const auto& vocab = train_ds.vocabulary();
  const MatrixSet train = load_matrix_set(train_ds, vocab);
  const Dataset unl_ds = load_manifest(require(c, "unlabeled_manifest"));
  const auto unl_matrices = load_features(unl_ds);

  const auto pipe = FeaturePipeline::fit(parse_variant(c.get("preprocess")),
                                         c.get_bool("standardize"), train.matrices);
  const auto labeled = make_examples(pipe.features(train.matrices), train.labels, vocab.size());
  std::vector<UnlabeledSample> unlabeled;
  for (std::size_t i = 0; i < unl_ds.size(); ++i) {
    unlabeled.push_back({unl_ds.segments()[i].segment_id, pipe.features(unl_matrices[i])});
  }
  const auto trainer = make_trainer(c, pipe.rows() * pipe.cols(), vocab.size(),
                                    make_augmenter(c, pipe.rows(), pipe.cols()));
  const SslConfig sc = c.ssl_config();
  const auto run = pseudo_label_run(trainer, labeled, unlabeled, sc, derive_seed(c.get_u64("seed"), "ssl"));

  write_model(run.model, dir / "model.ascm");
  write_lines(dir / "labels.txt", vocab);
  save_pipeline(pipe, dir);
  write_round_log(run, unlabeled.size(), sc.threshold, dir / "round_log.csv");
  for (std::size_t r = 0; r < run.accepted_per_round.size(); ++r) {
    out << "round," << r + 1 << ",accepted," << run.accepted_per_round[r] << '\n';
  }
  if (!c.get("test_manifest").empty()) {
    const MatrixSet test = load_matrix_set(load_manifest(c.get("test_manifest")), vocab);
    const auto probs = predict_batch(run.model, pipe.features(test.matrices));
    write_predictions(dir, test.ids, vocab, probs, argmax_labels(probs));
    report_accuracy(out, "test_accuracy", probs, test);
  }
  return 0;
}

int cmd_balance(const RunConfig& c, std::ostream& out) {
  const auto dir = open_run_dir(c, "balance");
  const Dataset ds = load_manifest(require(c, "train_manifest"));
  const auto matrices = load_features(ds);
  const std::size_t window = c.get_size("balance_window");
  const std::size_t hop = c.get_size("balance_hop");

  ClassRecordings classes;
  std::map<std::string, std::vector<AggregatedPoint>> points;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.segments()[i];
    if (!s.label) throw Error("balance: segment '" + s.segment_id + "' is unlabeled");
    classes[*s.label][s.recording_id].push_back(s.segment_id);
    points[s.segment_id] = aggregate_windows(matrices[i], window, hop);
  }
  const std::uint64_t seed = c.get_u64("seed");
  Rng cand_rng = make_rng(seed, "balance:candidates");
  const auto candidates = generate_candidates(classes, c.get_size("balance_dev_target"),
                                              c.get_size("balance_eval_target"),
                                              c.get_size("balance_candidates"), cand_rng);
  const auto scorer = make_divergence_scorer(points, c.get_size("balance_components"), c.gmm_config());
  Rng select_rng = make_rng(seed, "balance:select");
  const auto selection = select_balanced_split(candidates, scorer, select_rng);
  write_split_manifest(candidates[selection.index], dir / "split.csv");
  write_candidate_report(selection, dir / "candidates.csv");
  out << "selected," << selection.index << ",divergence,"
      << csv::format_double(selection.scores[selection.index]) << '\n';
  return 0;
}

int cmd_eval_split(const RunConfig& c, const std::string& manifest, std::ostream& out) {
  const auto dir = open_run_dir(c, "eval-split");
  const Dataset ds = load_manifest(manifest);
  TruthFile truth;
  for (const auto& s : ds.segments()) {
    if (!s.label) throw Error("eval-split needs ground truth; '" + s.segment_id + "' is unlabeled");
    truth.labels[s.segment_id] = *s.label;
  }
  truth.split = make_eval_split(truth.labels, c.get_double("eval_ratio"),
                                derive_seed(c.get_u64("seed"), "eval-split"));
  write_truth(truth, dir / "truth.csv");
  out << "public," << truth.split.public_ids.size() << ",private," << truth.split.private_ids.size()
      << '\n';
  return 0;
}

int cmd_ablation(const RunConfig& c, std::ostream& out) {
  const auto dir = open_run_dir(c, "ablation");
  const Dataset train_ds = load_manifest(require(c, "train_manifest"));
  const auto& vocab = train_ds.vocabulary();
  const MatrixSet train = load_matrix_set(train_ds, vocab);
  const MatrixSet test = load_matrix_set(load_manifest(require(c, "test_manifest")), vocab);
  const auto table = run_ablation(c, train, test, vocab.size());
  const auto text = table.to_csv();
  csv::write_text(dir / ("ablation_" + table.mode + ".csv"), text);
  out << text;
  return 0;
}

int cmd_score(const std::string& submission, const std::string& truth_path,
              const std::string& subset, std::ostream& out) {
  const auto truth = read_truth(truth_path);
  const auto preds = read_submission(submission);
  IdSet ids;
  if (subset == "all") {
    ids = truth.split.all_ids();
  } else if (subset == "public") {
    ids = truth.split.public_ids;
  } else if (subset == "private") {
    ids = truth.split.private_ids;
  } else {
    throw ConfigError("subset must be all, public or private");
  }
  out << "accuracy," << fixed4(score_submission(preds, truth.labels, ids)) << '\n';
  return 0;
}

struct SubmitArgs {
  std::string truth;
  std::string submission;
  std::string team;
  std::string timestamp;
  bool final_ranking = false;
  bool standings = false;
};

int cmd_submit(const RunConfig& c, const SubmitArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path dir = require(c, "out_dir");
  const fs::path journal = dir / "journal.csv";
  auto board = Leaderboard::replay(read_truth(a.truth), c.get_size("submission_limit"),
                                   read_journal(journal));
  if (a.final_ranking) {
    board.finalize();
    out << "rank,team,private_score\n";
    for (const auto& s : board.final_ranking()) {
      out << s.rank << ',' << csv::escape(s.team) << ',' << fixed4(s.score) << '\n';
    }
    return 0;
  }
  if (a.standings) {
    out << "rank,team,public_score\n";
    for (const auto& s : board.public_standings()) {
      out << s.rank << ',' << csv::escape(s.team) << ',' << fixed4(s.score) << '\n';
    }
    return 0;
  }
  if (a.team.empty() || a.submission.empty() || a.timestamp.empty()) {
    throw ConfigError("submit needs --team, --submission and --timestamp");
  }
  fs::create_directories(dir);
  const auto response =
      board.record_submission(a.team, parse_timestamp(a.timestamp), read_submission(a.submission));
  append_journal(board.journal().back(), journal);
  if (!response.accepted) {
    out << "accepted,0\nnext_allowed," << format_timestamp(*response.next_allowed) << '\n';
    err << "error: daily submission limit reached for team '" << a.team << "'\n";
    return 1;
  }
  out << "accepted,1\npublic_score," << fixed4(*response.public_score) << '\n';
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acoustic scene classification toolkit", "asc"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  ConfigOptions opts;
  auto pipeline_cmd = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    opts.attach(sub);
    return sub;
  };

  auto* train_cmd = pipeline_cmd("train", "train one classifier");
  std::string model_dir, manifest;
  auto* predict_cmd = pipeline_cmd("predict", "predict with a trained model directory");
  predict_cmd->add_option("--model_dir", model_dir, "directory written by train")->required();
  predict_cmd->add_option("--manifest", manifest, "manifest of segments to predict")->required();
  std::vector<std::string> inputs;
  auto* fuse_cmd = pipeline_cmd("fuse", "fuse probability files (average or majority)");
  fuse_cmd->add_option("--inputs", inputs, "probability CSV files")->required();
  auto* kfold_cmd = pipeline_cmd("kfold", "location-exclusive k-fold training and fusion");
  auto* ssl_cmd = pipeline_cmd("ssl", "pseudo-label semi-supervised training");
  auto* balance_cmd = pipeline_cmd("balance", "select a balanced development/evaluation split");
  std::string eval_manifest;
  auto* split_cmd = pipeline_cmd("eval-split", "split an evaluation set into public/private truth");
  split_cmd->add_option("--manifest", eval_manifest, "labeled evaluation manifest")->required();
  auto* ablation_cmd = pipeline_cmd("ablation", "run the augmentation or preprocessing ablation");

  std::string submission, truth, subset = "all";
  auto* score_cmd = app.add_subcommand("score", "score a submission against ground truth");
  score_cmd->add_option("--submission", submission, "submission CSV")->required();
  score_cmd->add_option("--truth", truth, "truth CSV")->required();
  score_cmd->add_option("--subset", subset, "all | public | private");

  SubmitArgs submit_args;
  auto* submit_cmd = pipeline_cmd("submit", "record a leaderboard submission");
  submit_cmd->add_option("--truth", submit_args.truth, "truth CSV")->required();
  submit_cmd->add_option("--submission", submit_args.submission, "submission CSV");
  submit_cmd->add_option("--team", submit_args.team, "team name");
  submit_cmd->add_option("--timestamp", submit_args.timestamp, "UTC time, YYYY-MM-DDTHH:MM:SSZ");
  submit_cmd->add_flag("--final_ranking", submit_args.final_ranking,
                       "end the competition and print the private ranking");
  submit_cmd->add_flag("--standings", submit_args.standings, "print public standings");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*score_cmd) return cmd_score(submission, truth, subset, out);
    const RunConfig c = opts.resolve();
    if (*train_cmd) return cmd_train(c, out);
    if (*predict_cmd) return cmd_predict(c, model_dir, manifest, out);
    if (*fuse_cmd) return cmd_fuse(c, inputs, out);
    if (*kfold_cmd) return cmd_kfold(c, out);
    if (*ssl_cmd) return cmd_ssl(c, out);
    if (*balance_cmd) return cmd_balance(c, out);
    if (*split_cmd) return cmd_eval_split(c, eval_manifest, out);
    if (*ablation_cmd) return cmd_ablation(c, out);
    if (*submit_cmd) return cmd_submit(c, submit_args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace asc
