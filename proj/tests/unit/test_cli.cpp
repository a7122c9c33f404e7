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

#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "asc/cli.hpp"
#include "asc/csv.hpp"
#include "asc/harness.hpp"
#include "support.hpp"

using namespace asc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<fs::path> tree(const fs::path& root) {
  std::set<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) out.insert(e.path());
  return out;
}

std::vector<std::string> quick(const fs::path& out_dir) {
  return {"--epochs", "10", "--batch_size", "8", "--base_lr", "0.05", "--seed", "4",
          "--out_dir", out_dir.string()};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("help, version and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"score", "--truth", "t.csv"}).code == 2);
  CHECK(run({"train", "--bogus_key", "1"}).code == 2);
}

TEST_CASE("score prints accuracy for a 2-of-4 fixture") {
  test::TempDir dir("cli_score");
  csv::write_text(dir / "t.csv",
                  "segment_id,scene_label,subset\na,x,public\nb,y,public\nc,x,private\nd,y,private\n");
  csv::write_text(dir / "s.csv", "segment_id,scene_label\na,x\nb,x\nc,x\nd,x\n");
  const auto r = run({"score", "--submission", (dir / "s.csv").string(), "--truth", (dir / "t.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "accuracy,0.5000\n");

  const auto truth = read_truth(dir / "t.csv");
  CHECK(score_submission(read_submission(dir / "s.csv"), truth.labels, truth.split.all_ids()) == 0.5);

  const auto pub = run({"score", "--submission", (dir / "s.csv").string(), "--truth",
                        (dir / "t.csv").string(), "--subset", "public"});
  CHECK(pub.out == "accuracy,0.5000\n");

  csv::write_text(dir / "short.csv", "segment_id,scene_label\na,x\n");
  CHECK(run({"score", "--submission", (dir / "short.csv").string(), "--truth", (dir / "t.csv").string()}).code == 1);
}

TEST_CASE("train then predict, confined to the output directory") {
  test::TempDir dir("cli_train");
  const auto train_m = test::write_blob_corpus(dir.path(), "train", 60, 3, 5, 6, 1);
  const auto test_m = test::write_blob_corpus(dir.path(), "test", 30, 3, 5, 6, 2);
  const auto before = tree(dir.path());

  const auto out = dir / "run1";
  const auto r = run(concat({"train", "--train_manifest", train_m.string(), "--test_manifest", test_m.string()}, quick(out)));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("test_accuracy,") != std::string::npos);
  for (const char* f : {"config.txt", "run.txt", "model.ascm", "labels.txt", "standardizer.csv", "loss.csv",
                        "pipeline.txt", "probabilities.csv", "submission.csv"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  CHECK(slurp(out / "run.txt").find(std::string("version = ") + version()) != std::string::npos);
  CHECK(slurp(out / "config.txt").find("seed = 4") != std::string::npos);
  for (const auto& p : tree(dir.path())) {
    if (before.count(p)) continue;
    CHECK_MESSAGE(p.string().rfind(out.string(), 0) == 0, p.string());
  }

  const auto again = dir / "run2";
  REQUIRE(run(concat({"train", "--train_manifest", train_m.string(), "--test_manifest", test_m.string()}, quick(again))).code == 0);
  CHECK(slurp(out / "model.ascm") == slurp(again / "model.ascm"));
  CHECK(slurp(out / "probabilities.csv") == slurp(again / "probabilities.csv"));

  const auto pred = dir / "pred";
  const auto p = run({"predict", "--model_dir", out.string(), "--manifest", test_m.string(), "--out_dir", pred.string()});
  REQUIRE(p.code == 0);
  CHECK(slurp(pred / "probabilities.csv") == slurp(out / "probabilities.csv"));
  CHECK(slurp(pred / "submission.csv") == slurp(out / "submission.csv"));
}

TEST_CASE("config file values are overridden by flags") {
  test::TempDir dir("cli_cfg");
  const auto train_m = test::write_blob_corpus(dir.path(), "train", 30, 3, 4, 4, 1);
  csv::write_text(dir / "run.cfg", "epochs = 2\nseed = 11\nmodel = mlp\nhidden_units = 4\n");
  const auto out = dir / "out";
  REQUIRE(run({"train", "--config", (dir / "run.cfg").string(), "--train_manifest", train_m.string(),
               "--seed", "12", "--out_dir", out.string()}).code == 0);
  const auto cfg = slurp(out / "config.txt");
  CHECK(cfg.find("seed = 12") != std::string::npos);
  CHECK(cfg.find("epochs = 2") != std::string::npos);
  CHECK(cfg.find("model = mlp") != std::string::npos);

  csv::write_text(dir / "bad.cfg", "epochz = 2\n");
  CHECK(run({"train", "--config", (dir / "bad.cfg").string(), "--out_dir", out.string()}).code == 2);
  CHECK(run({"train", "--out_dir", out.string()}).code == 2);  // no train_manifest
  CHECK(run({"train", "--train_manifest", (dir / "missing.csv").string(), "--out_dir", out.string()}).code == 1);
}

TEST_CASE("kfold, fuse and ssl subcommands") {
  test::TempDir dir("cli_ens");
  const auto train_m = test::write_blob_corpus(dir.path(), "train", 60, 3, 4, 5, 1);
  const auto test_m = test::write_blob_corpus(dir.path(), "test", 30, 3, 4, 5, 2);
  const auto unl_m = test::write_blob_corpus(dir.path(), "unl", 30, 3, 4, 5, 3, false);

  const auto kdir = dir / "kfold";
  const auto k = run(concat({"kfold", "--train_manifest", train_m.string(), "--test_manifest", test_m.string(),
                             "--folds", "5"}, quick(kdir)));
  REQUIRE(k.code == 0);
  CHECK(k.out.find("oof_accuracy,") != std::string::npos);
  CHECK(fs::exists(kdir / "fold4.ascm"));
  CHECK(fs::exists(kdir / "folds.csv"));
  CHECK(run(concat({"kfold", "--train_manifest", train_m.string(), "--folds", "11"}, quick(dir / "k11"))).code == 1);

  std::vector<std::string> inputs;
  for (int s = 0; s < 2; ++s) {
    const auto d = dir / ("m" + std::to_string(s));
    auto args = concat({"train", "--train_manifest", train_m.string(), "--test_manifest", test_m.string()}, quick(d));
    *std::next(std::find(args.begin(), args.end(), "--seed")) = std::to_string(100 + s);
    REQUIRE(run(args).code == 0);
    inputs.push_back((d / "probabilities.csv").string());
  }
  const auto fdir = dir / "fused";
  auto fuse_args = std::vector<std::string>{"fuse", "--out_dir", fdir.string(), "--inputs"};
  fuse_args.insert(fuse_args.end(), inputs.begin(), inputs.end());
  REQUIRE(run(fuse_args).code == 0);
  CHECK(fs::exists(fdir / "probabilities.csv"));
  fuse_args.push_back("--fusion");
  fuse_args.push_back("majority");
  REQUIRE(run(fuse_args).code == 0);

  const auto sdir = dir / "ssl";
  const auto s = run(concat({"ssl", "--train_manifest", train_m.string(), "--unlabeled_manifest", unl_m.string(),
                             "--test_manifest", test_m.string()}, quick(sdir)));
  REQUIRE(s.code == 0);
  CHECK(slurp(sdir / "round_log.csv").rfind("round,accepted,total_unlabeled,threshold\n", 0) == 0);
}

TEST_CASE("balance, eval-split, submit and ablation subcommands") {
  test::TempDir dir("cli_misc");
  const auto corpus = test::write_blob_corpus(dir.path(), "dev", 60, 3, 4, 8, 1);

  const auto bdir = dir / "balance";
  const auto b = run({"balance", "--train_manifest", corpus.string(), "--out_dir", bdir.string(),
                      "--balance_window", "4", "--balance_hop", "2", "--balance_components", "2",
                      "--balance_candidates", "8", "--balance_dev_target", "10", "--balance_eval_target", "5"});
  REQUIRE(b.code == 0);
  CHECK(slurp(bdir / "split.csv").rfind("segment_id,set\n", 0) == 0);
  CHECK(fs::exists(bdir / "candidates.csv"));

  const auto edir = dir / "eval";
  REQUIRE(run({"eval-split", "--manifest", corpus.string(), "--out_dir", edir.string()}).code == 0);
  const auto truth = read_truth(edir / "truth.csv");
  CHECK(truth.split.public_ids.size() == 30);

  write_submission(truth.labels, dir / "perfect.csv");
  const auto sub = dir / "board";
  auto submit = [&](const std::string& team, const std::string& ts) {
    return run({"submit", "--truth", (edir / "truth.csv").string(), "--submission", (dir / "perfect.csv").string(),
                "--team", team, "--timestamp", ts, "--out_dir", sub.string()});
  };
  const auto s1 = submit("alpha", "2018-01-01T10:00:00Z");
  CHECK(s1.code == 0);
  CHECK(s1.out == "accepted,1\npublic_score,1.0000\n");
  CHECK(submit("alpha", "2018-01-01T11:00:00Z").code == 0);
  const auto s3 = submit("alpha", "2018-01-01T12:00:00Z");
  CHECK(s3.code == 1);
  CHECK(s3.out.find("next_allowed,2018-01-02T00:00:00Z") != std::string::npos);
  CHECK(submit("beta", "2018-01-01T12:00:00Z").code == 0);

  const auto standings = run({"submit", "--truth", (edir / "truth.csv").string(), "--standings", "--out_dir", sub.string()});
  CHECK(standings.code == 0);
  CHECK(standings.out.find("private") == std::string::npos);

  const auto fin = run({"submit", "--truth", (edir / "truth.csv").string(), "--final_ranking", "--out_dir", sub.string()});
  CHECK(fin.code == 0);
  CHECK(fin.out.rfind("rank,team,private_score\n", 0) == 0);

  const auto test_m = test::write_blob_corpus(dir.path(), "heldout", 30, 3, 4, 8, 2);
  const auto adir = dir / "ablation";
  const auto a = run(concat({"ablation", "--train_manifest", corpus.string(), "--test_manifest", test_m.string()}, quick(adir)));
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("combination,clr,random_erasing,mixup,accuracy,delta\n", 0) == 0);
  CHECK(fs::exists(adir / "ablation_table1.csv"));
}
