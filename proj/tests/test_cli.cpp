// End-to-end checks of the zson binary: exit codes, error prefixes, output
// locking, --force, artifact shapes, and a small gen/train/eval/report
// pipeline. The binary path arrives via the ZSON_BIN environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin_path() {
  const char* b = std::getenv("ZSON_BIN");
  REQUIRE_MESSAGE(b != nullptr, "ZSON_BIN must point at the zson binary");
  return b;
}

fs::path scratch_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "zson_cli_scratch";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path scratch(const std::string& name) {
  fs::path p = scratch_root() / name;
  fs::remove_all(p);
  return p;
}

struct CmdResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Runs "zson <args>", capturing exit code and both streams.
CmdResult run_cli(const std::string& args) {
  static int serial = 0;
  fs::path out = scratch_root() / ("stdout." + std::to_string(serial));
  fs::path err = scratch_root() / ("stderr." + std::to_string(serial));
  ++serial;
  std::string cmd = "\"" + bin_path() + "\" " + args + " >" + out.string() +
                    " 2>" + err.string();
  int status = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

int count_lines(const fs::path& p) {
  std::ifstream is(p);
  int n = 0;
  std::string line;
  while (std::getline(is, line)) ++n;
  return n;
}

// One small end-to-end pipeline shared by the tests that need real artifacts:
// 2 worlds, a 32-d noiseless encoder, 16 easy image episodes, a 2048-step
// training run, and two sampling evals at different seeds.
struct Pipeline {
  fs::path worlds, encoder, episodes, train, eval1, eval2;

  Pipeline() {
    fs::path root = scratch("pipeline");
    fs::create_directories(root);
    worlds = root / "worlds";
    encoder = root / "enc";
    episodes = root / "eps";
    train = root / "run";
    eval1 = root / "ev1";
    eval2 = root / "ev2";

    auto need = [](const CmdResult& r) {
      CAPTURE(r.err);
      REQUIRE(r.code == 0);
    };
    fs::path params = root / "worldgen.json";
    std::ofstream(params) << R"({"per_room_objects": ["sink"]})" << "\n";
    need(run_cli("gen-worlds --n 2 --seed 3 --params " + params.string() +
                 " --out " + worlds.string()));
    need(run_cli("gen-encoder --dim 32 --seed 5 --sigma 0 --out " +
                 encoder.string()));
    need(run_cli("gen-episodes --worlds " + worlds.string() + " --encoder " +
                 encoder.string() + "/encoder.json --kind image --per-tier 2" +
                 " --tiers easy --seed 3 --out " + episodes.string()));
    need(run_cli("train --worlds " + worlds.string() + " --dataset " +
                 episodes.string() + "/episodes.jsonl --encoder " +
                 encoder.string() + "/encoder.json --total-steps 2048" +
                 " --seed 1 --out " + train.string()));
    std::string eval_common = "eval --checkpoint " + train.string() +
                              "/ckpt_latest.bin --worlds " + worlds.string() +
                              " --dataset " + episodes.string() +
                              "/episodes.jsonl --encoder " + encoder.string() +
                              "/encoder.json";
    need(run_cli(eval_common + " --seed 9 --out " + eval1.string()));
    need(run_cli(eval_common + " --seed 10 --out " + eval2.string()));
  }
};

const Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("help and version exit zero") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("--version").code == 0);
  CHECK(run_cli("gen-worlds --help").code == 0);
}

TEST_CASE("bad usage exits 1 with an error prefix on stderr") {
  auto r = run_cli("frobnicate");
  CHECK(r.code == 1);
  CHECK(r.err.find("error: ") == 0);

  r = run_cli("gen-worlds --n 0 --out " + scratch("zero").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("error: ") == 0);

  // missing a required option
  r = run_cli("gen-worlds --n 2");
  CHECK(r.code == 1);

  // config errors in argument values exit 1 before any directory is touched
  r = run_cli("gen-episodes --worlds x --encoder y --kind volumetric --out " +
              scratch("badkind").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("--kind must be") != std::string::npos);
}

TEST_CASE("object episode generation requires --categories") {
  const Pipeline& p = pipeline();
  auto r = run_cli("gen-episodes --worlds " + p.worlds.string() +
                   " --encoder " + p.encoder.string() +
                   "/encoder.json --kind object --out " +
                   scratch("nocat").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("--categories") != std::string::npos);
}

TEST_CASE("gen-worlds writes world files plus a manifest and drops the lock") {
  fs::path out = scratch("gw");
  auto r = run_cli("gen-worlds --n 2 --seed 3 --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote 2 worlds") != std::string::npos);

  int world_files = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;
    CHECK(name.size() > 5);
    CHECK(name.substr(name.size() - 5) == ".json");
    ++world_files;
  }
  CHECK(world_files == 2);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK_FALSE(fs::exists(out / ".zson.lock"));

  json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m.at("command") == "gen-worlds");
  CHECK(m.at("extra").at("world_ids").size() == 2);
}

TEST_CASE("gen-worlds is deterministic in the seed") {
  fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  REQUIRE(run_cli("gen-worlds --n 2 --seed 17 --out " + a.string()).code == 0);
  REQUIRE(run_cli("gen-worlds --n 2 --seed 17 --out " + b.string()).code == 0);
  REQUIRE(run_cli("gen-worlds --n 2 --seed 18 --out " + c.string()).code == 0);

  // the manifests embed the (differing) --out argument, so compare world files
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;
    CHECK(fs::exists(b / name));
    CHECK(slurp(e.path()) == slurp(b / name));
    ++compared;
  }
  CHECK(compared == 2);

  bool any_same_id = false;
  for (const auto& e : fs::directory_iterator(c)) {
    std::string name = e.path().filename().string();
    if (name != "manifest.json" && fs::exists(a / name)) any_same_id = true;
  }
  CHECK_FALSE(any_same_id);
}

TEST_CASE("non-empty output directory needs --force") {
  fs::path out = scratch("force");
  fs::create_directories(out);
  std::ofstream(out / "junk.txt") << "x\n";

  auto r = run_cli("gen-worlds --n 1 --seed 1 --out " + out.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("not empty") != std::string::npos);

  r = run_cli("gen-worlds --n 1 --seed 1 --out " + out.string() + " --force");
  CAPTURE(r.err);
  CHECK(r.code == 0);
}

TEST_CASE("a stale lock file refuses the run") {
  fs::path out = scratch("locked");
  fs::create_directories(out);
  std::ofstream(out / ".zson.lock") << "";

  auto r = run_cli("gen-worlds --n 1 --seed 1 --out " + out.string() +
                   " --force");
  CHECK(r.code == 2);
  CHECK(r.err.find("locked") != std::string::npos);
  CHECK(fs::exists(out / ".zson.lock"));  // refusing must not steal the lock
}

TEST_CASE("eval with a missing checkpoint exits 2") {
  auto r = run_cli("eval --checkpoint /nonexistent/ck.bin --worlds x"
                   " --dataset y --out " +
                   scratch("evmiss").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("cannot open checkpoint") != std::string::npos);
}

TEST_CASE("pipeline: train and eval produce the documented artifacts") {
  const Pipeline& p = pipeline();

  CHECK(fs::exists(p.train / "metrics.csv"));
  CHECK(fs::exists(p.train / "ckpt_latest.bin"));
  CHECK(fs::exists(p.train / "config.json"));
  CHECK(fs::exists(p.train / "manifest.json"));
  CHECK_FALSE(fs::exists(p.train / ".zson.lock"));
  // 2048 steps at 8 envs x 64 steps = 4 updates
  CHECK(count_lines(p.train / "metrics.csv") == 5);

  for (const fs::path& ev : {p.eval1, p.eval2}) {
    CHECK(fs::exists(ev / "report.json"));
    CHECK(fs::exists(ev / "report.csv"));
    CHECK(fs::exists(ev / "traces.jsonl"));
    json rep = json::parse(slurp(ev / "report.json"));
    CHECK(rep.at("task") == "imagenav");
    CHECK(rep.at("n_episodes") == 16);
    CHECK(rep.at("trials") == 3);
    // 16 episodes x 3 trials
    CHECK(count_lines(ev / "traces.jsonl") == 48);
  }
}

TEST_CASE("report merges runs into comparison, long-form, and trace files") {
  const Pipeline& p = pipeline();
  fs::path out = scratch("rep");
  auto r = run_cli("report --runs " + p.eval1.string() + "," +
                   p.eval2.string() + " --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.code == 0);

  CHECK(count_lines(out / "comparison.csv") == 3);  // header + one per run
  CHECK(count_lines(out / "long.csv") == 7);        // header + 3 trials each
  CHECK(count_lines(out / "traces.jsonl") == 96);

  std::ifstream is(out / "traces.jsonl");
  std::string line;
  REQUIRE(std::getline(is, line));
  json t = json::parse(line);
  CHECK(t.contains("run"));
  CHECK(t.contains("spl"));
}

TEST_CASE("report refuses a run directory without a report") {
  const Pipeline& p = pipeline();
  fs::path empty = scratch("norep");
  fs::create_directories(empty);
  auto r = run_cli("report --runs " + p.eval1.string() + "," + empty.string() +
                   " --out " + scratch("repfail").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("missing report file:") != std::string::npos);
}

TEST_CASE("report refuses runs with different vocabularies") {
  const Pipeline& p = pipeline();
  fs::path forged = scratch("forged");
  fs::create_directories(forged);
  json rep = json::parse(slurp(p.eval1 / "report.json"));
  rep["vocab_hash"] = "00000000deadbeef";
  std::ofstream(forged / "report.json") << rep.dump(2) << "\n";

  auto r = run_cli("report --runs " + p.eval1.string() + "," + forged.string() +
                   " --out " + scratch("repmix").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("vocabulary hash mismatch") != std::string::npos);
}

TEST_CASE("audit passes clean worlds and flags corrupt ones") {
  const Pipeline& p = pipeline();
  auto r = run_cli("audit --worlds " + p.worlds.string());
  CAPTURE(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("all 2 worlds pass") != std::string::npos);

  fs::path broken = scratch("broken_worlds");
  fs::create_directories(broken);
  std::string victim;
  for (const auto& e : fs::directory_iterator(p.worlds)) {
    std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;
    fs::copy_file(e.path(), broken / name);
    victim = name;
  }
  std::ofstream(broken / victim, std::ios::trunc) << "{ not json";

  r = run_cli("audit --worlds " + broken.string());
  CHECK(r.code == 2);
  CHECK(r.out.find(victim) != std::string::npos);
  CHECK(r.err.find("1 of 2 worlds failed") != std::string::npos);
}

TEST_CASE("train rejects a dataset whose embeddings mismatch the encoder") {
  const Pipeline& p = pipeline();
  fs::path other_enc = scratch("enc64");
  REQUIRE(run_cli("gen-encoder --dim 64 --seed 5 --sigma 0 --out " +
                  other_enc.string())
              .code == 0);
  auto r = run_cli("train --worlds " + p.worlds.string() + " --dataset " +
                   p.episodes.string() + "/episodes.jsonl --encoder " +
                   other_enc.string() + "/encoder.json --total-steps 512" +
                   " --out " + scratch("trbad").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("32-d") != std::string::npos);
  CHECK(r.err.find("64-d") != std::string::npos);
}

TEST_CASE("zero-shot writes paired reports and episode sets") {
  const Pipeline& p = pipeline();
  fs::path out = scratch("zs");
  auto r = run_cli("zero-shot --checkpoint " + p.train.string() +
                   "/ckpt_latest.bin --eval-worlds " + p.worlds.string() +
                   " --encoder " + p.encoder.string() +
                   "/encoder.json --categories sink --per-tier 1 --n-object 2" +
                   " --trials 1 --seed 4 --out " + out.string());
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "zero_shot.json"));
  CHECK(fs::exists(out / "imagenav_episodes.jsonl"));
  CHECK(fs::exists(out / "objectnav_episodes.jsonl"));
  json j = json::parse(slurp(out / "zero_shot.json"));
  CHECK(j.at("imagenav").at("task") == "imagenav");
  CHECK(j.at("objectnav").at("task") == "objectnav");
  CHECK(j.contains("transfer_gap"));
}
