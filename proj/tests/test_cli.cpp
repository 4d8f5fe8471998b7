#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "prefext/cli.hpp"
#include "prefext/config.hpp"
#include "prefext/error.hpp"

using namespace prefext;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "prefext");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string last_line(const std::string& text) {
  auto trimmed = text;
  while (!trimmed.empty() && trimmed.back() == '\n') trimmed.pop_back();
  return trimmed.substr(trimmed.rfind('\n') + 1);
}

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/prefext_test_") + name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("config from TOML and JSON") {
  RunConfig cfg;
  apply_toml(cfg, "l = 3\nbeta = 0.5\nloop_mode = \"model0\"\ninitial_weights = [1.5, 2]\nalpha = 2.0\nseed = 9\n");
  CHECK(cfg.l == 3);
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.loop_mode == LoopMode::Model0);
  CHECK(cfg.stopping.alpha == 2.0);
  CHECK(cfg.seed == 9);
  CHECK(cfg.model().initial_weights == std::vector<double>{1.5, 2.0});

  RunConfig j;
  apply_json(j, R"({"l": 2, "beta": 1, "stopping_kind": "floored_pareto", "threads": 2})");
  CHECK(j.l == 2);
  CHECK(j.threads == 2);
  CHECK(j.model().initial_weights == std::vector<double>{3.0});
}

TEST_CASE("config errors name the key") {
  auto key_of = [](const std::string& text) {
    RunConfig cfg;
    try {
      apply_toml(cfg, text);
      cfg.validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of("l = 0") == "l");
  CHECK(key_of("l = 1.5") == "l");
  CHECK(key_of("beta = \"x\"") == "beta");
  CHECK(key_of("loop_mode = \"model2\"") == "loop_mode");
  CHECK(key_of("initial_weights = []") == "initial_weights");
  CHECK(key_of("alpha = -1") == "alpha");
  CHECK(key_of("stopping_kind = \"lognormal\"") == "stopping_kind");
  CHECK(key_of("colour = 3") == "colour");
  CHECK(key_of("beta = 0\nloop_mode = \"model0\"\ninitial_weights = [0]") == "initial_weights");
  CHECK(key_of("l = [") != "<none>");
}

TEST_CASE("moments command") {
  const auto r = run({"moments", "--k", "0,0"});
  CHECK(r.code == 0);
  CHECK(last_line(r.out) == "1");
  CHECK(r.out.rfind("# prefext ", 0) == 0);
  const auto j = run({"moments", "--k", "1", "--format", "json", "--verify", "1000", "2000"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["value"].get<double>() == doctest::Approx(1.7724538509055159));
  CHECK(doc.contains("mc_mean"));
  CHECK(doc["meta"]["config"]["l"] == 1);
}

TEST_CASE("extreme command with t = 0 and the full sphere") {
  const auto r = run({"extreme", "--t", "0", "--event", "full", "--reps", "500", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["result"]["empirical"].get<double>() == 1.0);
  CHECK(doc["result"]["approx"].is_null());
}

TEST_CASE("table1 command layout") {
  const auto r = run({"table1", "--reps", "1e4"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0][0] == '#');
  CHECK(lines[1].rfind("l,beta,alpha,t,r,event,reps", 0) == 0);
  CHECK(lines[2].rfind("1,1,1,150,4,descending,10000,", 0) == 0);
  CHECK(lines[3].rfind("3,1,1,500,4,descending,10000,", 0) == 0);
  CHECK(lines[4].rfind("3,3,1,500,4,descending,10000,", 0) == 0);
}

TEST_CASE("spectral command") {
  const auto r = run({"spectral", "--r", "4", "--event", "descending", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["value"].get<double>() == doctest::Approx(6917.0 / 51840.0).epsilon(1e-6));
  CHECK(doc["method"] == "quad");
  const auto mc = run({"spectral", "--r", "3", "--method", "mc", "--samples", "1000", "--event", "coord:1:0.5"});
  CHECK(mc.code == 0);
  CHECK(run({"spectral", "--r", "5", "--method", "quad"}).code == 2);
}

TEST_CASE("simulate output is reproducible and honours SEED") {
  const auto a = run({"simulate", "--reps", "50", "--r", "2", "--seed", "5", "--threads", "1"});
  const auto b = run({"simulate", "--reps", "50", "--r", "2", "--seed", "5", "--threads", "3"});
  REQUIRE(a.code == 0);
  auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
  CHECK(body(a.out) == body(b.out));
  ::setenv("SEED", "5", 1);
  const auto env = run({"simulate", "--reps", "50", "--r", "2"});
  const auto flag_wins = run({"simulate", "--reps", "50", "--r", "2", "--seed", "6"});
  ::unsetenv("SEED");
  CHECK(body(env.out) == body(a.out));
  CHECK(body(flag_wins.out) != body(a.out));
  CHECK(flag_wins.out.find("\"seed\":6") != std::string::npos);
}

TEST_CASE("zipf commands") {
  const auto path = temp_file("edges.txt", "# src dst\n1 2\n3 2\n2 1\n");
  const auto r = run({"zipf-ingest", "--input", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("rank,degree\n1,2\n2,1\n") != std::string::npos);
  const auto bad = temp_file("bad.txt", "1 2\noops\n");
  const auto e = run({"zipf-ingest", "--input", bad});
  CHECK(e.code == 1);
  CHECK(e.err.find("line 2") != std::string::npos);
  CHECK(run({"zipf", "--n", "1000", "--format", "json"}).code == 0);
}

TEST_CASE("config file and exit codes") {
  const auto good = temp_file("cfg.toml", "l = 3\nbeta = 1.0\nalpha = 1.0\n");
  const auto r = run({"moments", "--config", good, "--k", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"l\":3") != std::string::npos);
  const auto bad = temp_file("bad.toml", "beta = -2\n");
  const auto e = run({"moments", "--config", bad, "--k", "1"});
  CHECK(e.code == 2);
  CHECK(e.err.find("beta") != std::string::npos);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"moments", "--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"extreme", "--event", "sideways"}).code == 2);
  CHECK(run({"simulate", "--reps", "abc"}).code == 2);
}

TEST_CASE("diagnose command") {
  const auto r = run({"diagnose", "--scale", "0.2"});
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["results"].size() == 11);
  CHECK(doc["passed"].get<bool>() == (r.code == 0));
  for (const auto& item : doc["results"]) {
    CAPTURE(item.dump());
    CHECK(item["passed"].get<bool>());
  }
}
