// End-to-end tests of the command-line front end: each case spawns the real
// binary (path baked in at configure time) against the shipped six-bus
// fixtures and checks artifacts, exit codes and rerun determinism.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridplan/system_config.hpp"
#include "gridplan/system_model.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gridplan;
using nlohmann::json;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CommandResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + (env.empty() ? "" : " ") + GRIDPLAN_CLI_PATH + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = out;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("gridplan_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

const std::string kConfig = std::string(GRIDPLAN_DATA_DIR) + "/six_bus.json";
const std::string kWeek = std::string(GRIDPLAN_DATA_DIR) + "/six_bus_week.csv";

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("plan writes the documented artifacts and a loadable design") {
  TempDir tmp("plan");
  const auto r = run_cli("plan --config " + kConfig + " --data " + kWeek +
                         " --out " + tmp.sub("out"));
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);

  for (const char* name : {"config.json", "summary.json", "timings.json",
                           "design.json", "schedule.csv"})
    CHECK(fs::exists(fs::path(tmp.sub("out")) / name));

  const SystemConfig cfg = SystemConfig::six_bus();
  const SystemDesign d = SystemDesign::from_json_text(
      slurp(fs::path(tmp.sub("out")) / "design.json"), cfg);
  CHECK(d.total_gen(cfg, "peaking") + d.total_gen(cfg, "wind") > 0.0);

  const std::string sched = slurp(fs::path(tmp.sub("out")) / "schedule.csv");
  CHECK(sched.rfind("timestamp,", 0) == 0);
  CHECK(count_lines(sched) == 7 * 24 + 1);  // header plus one row per hour

  const json summary =
      json::parse(slurp(fs::path(tmp.sub("out")) / "summary.json"));
  CHECK(summary.at("status") == "optimal");
  CHECK(summary.at("objective").get<double>() > 0.0);
}

TEST_CASE("bad invocations exit 1 with a pointer to help") {
  TempDir tmp("usage");
  auto r = run_cli("plan --config " + kConfig + " --data " + kWeek +
                   " --out " + tmp.sub("x") + " --bogus-flag");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("--help") != std::string::npos);

  r = run_cli("");
  CHECK(r.exit_code == 1);

  r = run_cli("no-such-command --config " + kConfig);
  CHECK(r.exit_code == 1);

  r = run_cli("plan --data " + kWeek + " --out " + tmp.sub("y"));
  CHECK(r.exit_code == 1);  // --config is required

  r = run_cli("plan --config /no/such/file.json --data " + kWeek + " --out " +
              tmp.sub("z"));
  CHECK(r.exit_code == 1);

  r = run_cli("--help");
  CHECK(r.exit_code == 0);
}

TEST_CASE("config overrides reach the echoed config; unknown keys are "
          "rejected") {
  TempDir tmp("override");
  auto r = run_cli("synth --config " + kConfig + " --out " + tmp.sub("a") +
                   " --days 2 --set voll=9000 --set storage.efficiency=0.9");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json echoed = json::parse(slurp(fs::path(tmp.sub("a")) / "config.json"));
  CHECK(echoed.at("voll").get<double>() == doctest::Approx(9000.0));
  CHECK(echoed.at("storage").at("efficiency").get<double>() ==
        doctest::Approx(0.9));

  r = run_cli("synth --config " + kConfig + " --out " + tmp.sub("b") +
              " --days 2 --set no_such_key=1");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("no_such_key") != std::string::npos);

  r = run_cli("synth --config " + kConfig + " --out " + tmp.sub("c") +
              " --days 2 --set voll=not_a_number");
  CHECK(r.exit_code == 1);  // voll must be numeric; rejected by validation
}

TEST_CASE("solver failures exit 2") {
  TempDir tmp("solverfail");
  const auto r = run_cli("plan --config " + kConfig + " --data " + kWeek +
                             " --out " + tmp.sub("out"),
                         "GRIDPLAN_TIME_LIMIT=1e-6");
  CAPTURE(r.output);
  CHECK(r.exit_code == 2);
  // diagnostics still land in the output directory
  CHECK(fs::exists(fs::path(tmp.sub("out")) / "summary.json"));
}

TEST_CASE("siss artifacts are bit-identical across reruns except timings") {
  TempDir tmp("determinism");
  const std::string flags = " --method F --n-a 4 --p-e 0.2";
  auto r1 = run_cli("siss --config " + kConfig + " --data " + kWeek +
                    " --out " + tmp.sub("one") + flags);
  auto r2 = run_cli("siss --config " + kConfig + " --data " + kWeek +
                    " --out " + tmp.sub("two") + flags);
  CAPTURE(r1.output);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(tmp.sub("one"))) {
    const std::string name = entry.path().filename().string();
    const fs::path other = fs::path(tmp.sub("two")) / name;
    REQUIRE(fs::exists(other));
    if (name == "timings.json") continue;  // wall clock, deliberately excluded
    CHECK_MESSAGE(slurp(entry.path()) == slurp(other), name);
    ++compared;
  }
  CHECK(compared >= 4);  // config, result, importances, design

  const json result =
      json::parse(slurp(fs::path(tmp.sub("one")) / "siss_result.json"));
  CHECK(result.at("stages") == json::array({"plan", "operate", "plan"}));
  const json timings =
      json::parse(slurp(fs::path(tmp.sub("one")) / "timings.json"));
  for (const char* key : {"plan_first_seconds", "operate_seconds",
                          "plan_second_seconds", "total_seconds"})
    CHECK(timings.at(key).get<double>() > 0.0);
}

TEST_CASE("designs flow from siss into evaluate and operate") {
  TempDir tmp("flow");
  auto r = run_cli("siss --config " + kConfig + " --data " + kWeek +
                   " --out " + tmp.sub("siss") + " --method B --n-a 4");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const std::string design = (fs::path(tmp.sub("siss")) / "design.json").string();

  r = run_cli("evaluate --config " + kConfig + " --data " + kWeek +
              " --design " + design + " --out " + tmp.sub("eval") + " --full");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json eval =
      json::parse(slurp(fs::path(tmp.sub("eval")) / "evaluation.json"));
  const double pct = eval.at("unserved_pct").get<double>();
  CHECK(pct >= 0.0);
  CHECK(pct <= 100.0);

  r = run_cli("operate --config " + kConfig + " --data " + kWeek +
              " --design " + design + " --out " + tmp.sub("op") +
              " --horizon 72 --window 48");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const std::string sched = slurp(fs::path(tmp.sub("op")) / "schedule.csv");
  CHECK(count_lines(sched) == 7 * 24 + 1);
}

TEST_CASE("synth output is deterministic per seed and feeds plan") {
  TempDir tmp("synth");
  auto r1 = run_cli("synth --config " + kConfig + " --out " + tmp.sub("a") +
                    " --days 3 --seed 11 --events 1 --event-days 1");
  auto r2 = run_cli("synth --config " + kConfig + " --out " + tmp.sub("b") +
                    " --days 3 --seed 11 --events 1 --event-days 1");
  auto r3 = run_cli("synth --config " + kConfig + " --out " + tmp.sub("c") +
                    " --days 3 --seed 12 --events 1 --event-days 1");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(fs::path(tmp.sub("a")) / "series.csv") ==
        slurp(fs::path(tmp.sub("b")) / "series.csv"));
  CHECK(slurp(fs::path(tmp.sub("a")) / "series.csv") !=
        slurp(fs::path(tmp.sub("c")) / "series.csv"));

  const auto r = run_cli("plan --config " + kConfig + " --data " +
                         tmp.sub("a") + "/series.csv --out " + tmp.sub("plan"));
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
}

TEST_CASE("aggregate emits a parseable aggregation for a-priori methods") {
  TempDir tmp("agg");
  const auto r = run_cli("aggregate --config " + kConfig + " --data " + kWeek +
                         " --out " + tmp.sub("out") + " --method C --n-a 5");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  const json agg =
      json::parse(slurp(fs::path(tmp.sub("out")) / "aggregation.json"));
  CHECK(agg.at("weights").size() == 5);
  CHECK(agg.at("mapping").size() == 7);
}

}  // TEST_SUITE
