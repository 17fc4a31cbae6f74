#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "rwt/cli/commands.hpp"
#include "rwt/cli/dispatch.hpp"
#include "rwt/datamodel/manifest.hpp"
#include "support.hpp"

using namespace rwt;
using rwt::cli::dispatch;
namespace fs = std::filesystem;

namespace {

// Runs dispatch with stderr captured.
std::pair<int, std::string> run(const std::vector<std::string>& args) {
  std::ostringstream err;
  auto* old = std::cerr.rdbuf(err.rdbuf());
  const int code = dispatch(args);
  std::cerr.rdbuf(old);
  return {code, err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the last CSV column (wall-clock seconds).
std::string without_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).first == 2);
  CHECK(run({"frobnicate"}).first == 2);
  CHECK(run({"select", "--manifest", "m.jsonl", "--out", "o.jsonl", "--bogus"}).first == 2);
  const auto [code, err] = run({"train", "--out", "x"});
  CHECK(code == 2);
  CHECK(err.find("--manifest") != std::string::npos);
  CHECK(run({"select", "--manifest", "m.jsonl"}).first == 2);
  CHECK(run({"select", "--manifest", "m", "--out", "o", "--gate-cutoff", "abc"}).first == 2);
  CHECK(run({"--help"}).first == 0);
}

TEST_CASE("domain errors exit with 1") {
  test::TempDir dir("cli");
  const auto out = (dir / "o" / "kept.jsonl").string();
  CHECK(run({"select", "--manifest", (dir / "missing.jsonl").string(), "--out", out}).first == 1);
  CHECK(fs::exists(dir / "o" / "effective_config.json"));
  std::ofstream(dir / "cfg.json") << R"({"nonsense": 1})";
  CHECK(run({"select", "--config", (dir / "cfg.json").string(), "--manifest", "m", "--out", out})
            .first == 2);
}

TEST_CASE("pipeline from synthesis to evaluation") {
  test::TempDir dir("cli");
  const auto d = [&](const std::string& s) { return (dir / s).string(); };
  REQUIRE(run({"synth", "--n", "24", "--seed", "5", "--out", d("corpus")}).first == 0);
  CHECK(read_manifest(dir / "corpus/manifest.jsonl").size() == 24);

  REQUIRE(run({"select", "--manifest", d("corpus/manifest.jsonl"), "--out", d("sel/kept.jsonl")})
              .first == 0);
  const auto kept = read_manifest(dir / "sel/kept.jsonl");
  CHECK(kept.size() > 0);
  CHECK(kept.size() <= 24);
  for (const auto& r : kept) CHECK(*r.gate_score > 5e-4);
  // Relative paths are rewritten to stay valid from the new directory.
  CHECK(fs::exists(dir.path() / "sel" / kept[0].image_path));
  const auto eff = nlohmann::json::parse(slurp(dir / "sel/effective_config.json"));
  CHECK(eff["command"] == "select");
  CHECK(eff["region_threshold"] == 0.8);
  CHECK(eff["gate_cutoff"] == 5e-4);
  CHECK(fs::exists(dir / "sel/rwt.log"));

  REQUIRE(run({"aggregate", "--manifest", d("corpus/manifest.jsonl"), "--votes",
               d("corpus/votes.csv"), "--out", d("agg/m.jsonl")})
              .first == 0);
  REQUIRE(run({"split", "--manifest", d("agg/m.jsonl"), "--out", d("split/m.jsonl")}).first == 0);
  const auto split = read_manifest(dir / "split/m.jsonl");
  int train = 0;
  for (const auto& r : split) train += r.split == Split::kTrain;
  CHECK(train == 18);

  REQUIRE(run({"stats", "--manifest", d("split/m.jsonl"), "--votes", d("corpus/votes.csv"),
               "--out-dir", d("stats")})
              .first == 0);

  std::ofstream(dir / "train.json") << R"({"head_width": 4, "target_side": 32, "kernel_size": 5,
      "init_sigma": 2.0, "max_epochs": 2, "batch_size": 8})";
  REQUIRE(run({"train", "--config", d("train.json"), "--manifest", d("split/m.jsonl"), "--out",
               d("run1")})
              .first == 0);
  CHECK(fs::exists(dir / "run1/model.ckpt"));
  CHECK(fs::exists(dir / "run1/history.csv"));
  const auto cfg = nlohmann::json::parse(slurp(dir / "run1/effective_config.json"));
  CHECK(cfg["head_width"] == 4);
  CHECK(cfg["lr0"] == 0.015);

  // The effective config alone reproduces the run.
  auto replay = cfg;
  replay["out"] = d("run2");
  std::ofstream(dir / "replay.json") << replay.dump();
  REQUIRE(run({"train", "--config", d("replay.json")}).first == 0);
  CHECK(slurp(dir / "run1/model.ckpt") == slurp(dir / "run2/model.ckpt"));
  CHECK(without_seconds(slurp(dir / "run1/history.csv")) ==
        without_seconds(slurp(dir / "run2/history.csv")));

  REQUIRE(run({"eval", "--ckpt", d("run1"), "--ckpt", d("run2/model.ckpt"), "--manifest",
               d("split/m.jsonl"), "--out", d("eval/report.json")})
              .first == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "eval/report.json"));
  CHECK(rep["models"].size() == 2);
  CHECK(rep["models"][0]["metrics"] == rep["models"][1]["metrics"]);
  CHECK(fs::exists(dir / "eval/report.txt"));

  CHECK(run({"eval", "--ckpt", d("run1"), "--manifest", d("split/m.jsonl"), "--split", "test",
             "--out", d("eval/x.json")})
            .first == 2);
  CHECK(run({"train", "--manifest", d("corpus/manifest.jsonl"), "--out", d("bad"), "--side", "33"})
            .first == 1);
}
