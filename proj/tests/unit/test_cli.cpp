// Copyright 2026 The openset Authors. All Rights Reserved.
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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "openset/cli.hpp"
#include "openset/ingest.hpp"

using namespace openset;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("openset_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_name(const std::string& err) {
  return nlohmann::json::parse(err.substr(0, err.find('\n')))["error"].get<std::string>();
}

const std::vector<std::string> kSmall{"--train-images", "12", "--pretest-images", "6", "--test-images", "6"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("help lists the subcommands and their flags") {
  const Run top = run({"--help"});
  CHECK(top.code == kExitOk);
  for (const char* sub : {"synth", "train", "calibrate", "infer", "eval", "analyze", "ablate", "pipeline"}) {
    CHECK(top.out.find(sub) != std::string::npos);
  }
  CHECK(top.out.find("--seed") != std::string::npos);
  const Run train = run({"train", "--help"});
  CHECK(train.code == kExitOk);
  for (const char* flag : {"--dump", "--annotations", "--estimator", "--drop", "--trees", "--epochs"}) {
    CHECK(train.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("usage errors exit 2") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"bogus"}, {"eval", "--nope"}, {"train"}, {"infer", "--dump", "/nonexistent/file"}}) {
    const Run r = run(args);
    CHECK(r.code == kExitUsageError);
    CHECK(error_name(r.err) == "UsageError");
  }
  const fs::path dir = scratch("usage");
  CHECK(run({"synth", "--out", (dir / "s").string(), "--known-fraction", "0.9"}).code == kExitUsageError);
}

TEST_CASE("stages chain through files") {
  const fs::path dir = scratch("stages");
  const std::string data = (dir / "data").string();
  REQUIRE(run(concat({"synth", "--out", data}, kSmall)).code == kExitOk);
  for (const char* f : {"train/dump.jsonl", "pretest/annotations.json", "test/roles.jsonl", "known_categories.json"}) {
    CHECK(fs::exists(dir / "data" / f));
  }
  const std::string train_dump = data + "/train/dump.jsonl", train_ann = data + "/train/annotations.json";
  const std::string model = (dir / "model.json").string();
  const Run tr = run({"train", "--dump", train_dump, "--annotations", train_ann, "--trees", "8", "--out", model});
  REQUIRE(tr.code == kExitOk);

  const std::string curve = (dir / "curve.json").string();
  const Run cal = run({"calibrate", "--dump", data + "/pretest/dump.jsonl", "--annotations",
                       data + "/pretest/annotations.json", "--model", model, "--out", curve, "--plot",
                       (dir / "curve.tsv").string()});
  REQUIRE(cal.code == kExitOk);
  CHECK(cal.out.rfind("epsilon_star ", 0) == 0);

  const std::string preds = (dir / "preds.jsonl").string();
  REQUIRE(run({"infer", "--dump", data + "/test/dump.jsonl", "--model", model, "--curve", curve, "--out", preds}).code ==
          kExitOk);
  const Run ev = run({"eval", "--annotations", data + "/test/annotations.json", "--predictions", preds, "--out",
                      (dir / "report.json").string(), "--label", "rf"});
  REQUIRE(ev.code == kExitOk);
  CHECK(ev.out.find("R_u") != std::string::npos);
  CHECK(fs::exists(dir / "report.json"));

  const Run an = run({"analyze", "--dump", data + "/test/dump.jsonl", "--annotations", data + "/test/annotations.json",
                      "--model", model, "--out", (dir / "sep.json").string()});
  CHECK(an.code == kExitOk);
  CHECK(an.out.find("objectness") != std::string::npos);

  // Predictions for images the annotations do not list.
  const Run bad = run({"eval", "--annotations", data + "/pretest/annotations.json", "--predictions", preds});
  CHECK(bad.code == kExitDataError);
  CHECK(error_name(bad.err) == "MissingImage");

  // The threshold comes from exactly one source.
  CHECK(run({"infer", "--dump", data + "/test/dump.jsonl", "--model", model, "--curve", curve, "--epsilon", "0.3",
             "--out", preds})
            .code == kExitUsageError);

  const Run ab = run({"ablate", "--train", data + "/train", "--pretest", data + "/pretest", "--test", data + "/test",
                      "--mask", "full", "--mask", "f_nan", "--trees", "8", "--out", (dir / "abl.json").string()});
  REQUIRE(ab.code == kExitOk);
  CHECK(ab.out.find("w/o NAN") != std::string::npos);
  CHECK(ab.out.find("confidence only") != std::string::npos);
  CHECK(ab.out.find("epsilon* = ") != std::string::npos);
}

TEST_CASE("config files feed options and flags win") {
  const fs::path dir = scratch("config");
  const fs::path cfg = dir / "openset.toml";
  write_text_file(cfg, "seed = 11\n[synth]\ntrain-images = 2\npretest-images = 1\ntest-images = 1\n");
  REQUIRE(run({"--config", cfg.string(), "synth", "--out", (dir / "a").string()}).code == kExitOk);
  const FeatureDump a = load_feature_dump(dir / "a" / "train" / "dump.jsonl");
  CHECK(a.records.size() == 2);
  REQUIRE(run({"--config", cfg.string(), "synth", "--out", (dir / "b").string(), "--train-images", "3"}).code ==
          kExitOk);
  CHECK(load_feature_dump(dir / "b" / "train" / "dump.jsonl").records.size() == 3);
  REQUIRE(run({"--seed", "11", "synth", "--out", (dir / "c").string(), "--train-images", "2"}).code == kExitOk);
  CHECK(load_feature_dump(dir / "c" / "train" / "dump.jsonl") == a);

  write_text_file(cfg, "no_such_option = 1\n");
  CHECK(run({"--config", cfg.string(), "synth", "--out", (dir / "d").string()}).code == kExitUsageError);
}

TEST_CASE("pipeline output is reproducible") {
  const fs::path a = scratch("pipe_a"), b = scratch("pipe_b"), c = scratch("pipe_c");
  const std::vector<std::string> tail = concat({"--trees", "10"}, kSmall);
  const Run ra = run(concat({"--workers", "1", "pipeline", "--out", a.string()}, tail));
  REQUIRE(ra.code == kExitOk);
  REQUIRE(run(concat({"--workers", "1", "pipeline", "--out", b.string()}, tail)).code == kExitOk);
  REQUIRE(run(concat({"--workers", "4", "pipeline", "--out", c.string()}, tail)).code == kExitOk);
  for (const char* f : {"model.json", "calibration.json", "predictions.jsonl", "report.json", "separation.json",
                        "kde.tsv", "ablation.json", "data/test/dump.jsonl"}) {
    const std::string ta = read_text_file(a / f);
    CHECK_MESSAGE(ta == read_text_file(b / f), f);
    CHECK_MESSAGE(ta == read_text_file(c / f), f);
  }
  CHECK(ra.out.find("epsilon_star") != std::string::npos);
}
