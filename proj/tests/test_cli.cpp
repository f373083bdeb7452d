#include "hcmix/experiment.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace hcmix;
namespace fs = std::filesystem;

namespace {

ExperimentConfig make(const std::string& cmd) {
  ExperimentConfig c;
  c.command = cmd;
  return c;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const ExperimentConfig& c) {
  std::ostringstream out, err;
  const int code = run_experiment(c, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string field_of(const ExperimentConfig& c) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("hcmix_test_" + name); }

}  // namespace

TEST_CASE("config json round trip") {
  ExperimentConfig c = make("couple");
  c.n = {16, 32};
  c.theta = 0.5;
  c.schedule = "inverse-sqrt";
  c.k = {0, 3};
  c.eps = {0.1, 0.25};
  c.t_max = "400";
  c.t_stride = 3;
  c.t_values = {1, 2, 5};
  c.alpha = {-1.0, 2.5};
  c.replicates = 77;
  c.seed = 0xFFFFFFFFFFFFFFFFull;
  c.coupling = "coordinatewise";
  c.format = "json";
  nlohmann::json j = c;
  const auto back = j.get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.seed == c.seed);
  CHECK(back.alpha == c.alpha);
  CHECK(back.t_values == c.t_values);
}

TEST_CASE("validation names the offending field") {
  auto with = [](auto&& edit) {
    ExperimentConfig c = make("profile");
    edit(c);
    return field_of(c);
  };
  CHECK(with([](ExperimentConfig&) {}) == "");
  CHECK(with([](ExperimentConfig& c) { c.command = "nope"; }) == "command");
  CHECK(with([](ExperimentConfig& c) { c.n = {0}; }) == "n");
  CHECK(with([](ExperimentConfig& c) { c.n = {}; }) == "n");
  CHECK(with([](ExperimentConfig& c) { c.theta = 0.0; }) == "theta");
  CHECK(with([](ExperimentConfig& c) { c.theta = 1.5; }) == "theta");
  CHECK(with([](ExperimentConfig& c) { c.schedule = "linear"; }) == "schedule");
  CHECK(with([](ExperimentConfig& c) { c.q = -0.1; }) == "q");
  CHECK(with([](ExperimentConfig& c) { c.k = {65}; }) == "k");
  CHECK(with([](ExperimentConfig& c) { c.eps = {0.0}; }) == "eps");
  CHECK(with([](ExperimentConfig& c) { c.t_max = "soon"; }) == "t_max");
  CHECK(with([](ExperimentConfig& c) { c.t_stride = 0; }) == "t_stride");
  CHECK(with([](ExperimentConfig& c) { c.replicates = 0; }) == "replicates");
  CHECK(with([](ExperimentConfig& c) { c.coupling = "maximal"; }) == "coupling");
  CHECK(with([](ExperimentConfig& c) { c.format = "xml"; }) == "format");
  CHECK(with([](ExperimentConfig& c) { c.command = "equiv", c.n = {17}; }) == "n");
  CHECK(with([](ExperimentConfig& c) { c.command = "bounds", c.q = 0.25; }) == "q");
  CHECK(with([](ExperimentConfig& c) { c.command = "bounds", c.alpha = {0.0}; }) == "alpha");

  ExperimentConfig bad = make("profile");
  bad.theta = 2.0;
  const auto r = run(bad);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("theta") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("from_json rejects unknown keys and wrong types by field") {
  ExperimentConfig c;
  try {
    nlohmann::json{{"command", "profile"}, {"thetaa", 1.0}}.get_to(c);
    FAIL("accepted unknown key");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "thetaa");
  }
  try {
    nlohmann::json{{"command", "profile"}, {"n", "sixty-four"}}.get_to(c);
    FAIL("accepted wrong type");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "n");
  }
}

TEST_CASE("profile table layout") {
  ExperimentConfig c = make("profile");
  c.n = {8};
  c.t_max = "20";
  const auto r = run(c);
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2 + 21);
  CHECK(ls[0].rfind("# config: {", 0) == 0);
  CHECK(ls[1] == "t,d");
  CHECK(ls[2] == "0,0.99609375");  // 1 - 2^-8 from all-ones
  CHECK(r.out.find('\r') == std::string::npos);
  double prev = 1.0;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const double d = std::stod(ls[i].substr(ls[i].find(',') + 1));
    CHECK(d <= prev + 1e-15);
    prev = d;
  }
}

TEST_CASE("t_max auto is three times the predicted time") {
  ExperimentConfig c = make("profile");
  c.n = {64};
  CHECK(resolve_t_max(c, 64) == std::llround(3.0 * 64 * std::log(64.0) / 2.0));
  c.t_max = "100";
  CHECK(resolve_t_max(c, 64) == 100);
}

TEST_CASE("equiv reports machine-precision agreement") {
  ExperimentConfig c = make("equiv");
  c.n = {1, 6, 10};
  c.theta = 0.3;
  const auto r = run(c);
  REQUIRE(r.code == kExitOk);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 5);
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const double diff = std::stod(ls[i].substr(ls[i].rfind(',') + 1));
    CHECK(diff <= 1e-15);
  }
}

TEST_CASE("mixing-time exit codes") {
  ExperimentConfig c = make("mixing-time");
  c.n = {16};
  c.eps = {0.25};
  CHECK(run(c).code == kExitOk);
  c.t_max = "3";
  const auto r = run(c);
  CHECK(r.code == kExitUnresolved);
  CHECK(r.out.find(",false,") != std::string::npos);
}

TEST_CASE("bounds rows stay below exact distance") {
  ExperimentConfig c = make("bounds");
  c.n = {256};
  c.alpha = {1.0, 2.0};
  c.format = "json";
  const auto r = run(c);
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("config").at("command") == "bounds");
  REQUIRE(j.at("rows").size() == 4);
  for (const auto& row : j.at("rows")) {
    if (!row[6].get<bool>()) continue;
    CHECK(row[5].get<double>() <= row[7].get<double>());
  }
}

TEST_CASE("replay from output is byte identical") {
  const fs::path first = scratch("couple_a.csv");
  const fs::path second = scratch("couple_b.csv");
  ExperimentConfig c = make("couple");
  c.n = {16};
  c.k = {4};
  c.alpha = {0.0, 2.0};
  c.replicates = 500;
  c.seed = 99;
  c.output = first.string();
  REQUIRE(run(c).code == kExitOk);

  ExperimentConfig replay = load_config(first.string());
  CHECK(nlohmann::json(replay) == nlohmann::json(c));
  replay.output = second.string();
  REQUIRE(run(replay).code == kExitOk);
  // Only the echoed output path differs.
  auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  CHECK(body(slurp(first)) == body(slurp(second)));

  c.output.clear();
  c.format = "json";
  const auto a = run(c).out;
  const fs::path jpath = scratch("couple.json");
  std::ofstream(jpath, std::ios::binary) << a;
  ExperimentConfig from_json_out = load_config(jpath.string());
  CHECK(run(from_json_out).out == a);
  fs::remove(first);
  fs::remove(second);
  fs::remove(jpath);
}

TEST_CASE("coupon moments match closed form at t = 0") {
  ExperimentConfig c = make("coupon");
  c.n = {32};
  c.t_values = {0};
  c.replicates = 100;
  const auto ls = lines(run(c).out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[2].rfind("32,1,0,32,0,0,0,32,0,", 0) == 0);
  // Seeds are unsigned 64-bit and print without sign.
  for (std::uint64_t seed = 1; seed < 40; ++seed) {
    c.seed = seed;
    const auto row = lines(run(c).out).at(2);
    CHECK(row.find('-') == std::string::npos);
  }
}

TEST_CASE("verify quick passes and the mutation hook trips lumping") {
  ExperimentConfig c = make("verify");
  const auto ok = run(c);
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find(",false,") == std::string::npos);

  c.mutate_kernel = true;
  const auto bad = run(c);
  CHECK(bad.code == kExitVerify);
  CHECK(bad.err.find("lumping") != std::string::npos);
}

#ifdef HCMIX_CLI_PATH
TEST_CASE("command line flags override a loaded config") {
  const std::string exe = HCMIX_CLI_PATH;
  const fs::path cfg = scratch("cfg.json");
  const fs::path out = scratch("cli_out.csv");
  std::ofstream(cfg) << R"({"n": [8], "t_max": "5", "theta": 0.5})";
  REQUIRE(shell(exe + " profile --config " + cfg.string() + " --t-max 7 -o " + out.string()) == 0);
  const ExperimentConfig got = load_config(out.string());
  CHECK(got.command == "profile");
  CHECK(got.n == std::vector<int>{8});
  CHECK(got.theta == 0.5);
  CHECK(got.t_max == "7");
  CHECK(lines(slurp(out)).size() == 2 + 8);

  CHECK(shell(exe + " profile --theta 3 -o " + out.string() + " 2>/dev/null") == kExitConfig);
  CHECK(shell(exe + " profile --bogus 2>/dev/null >/dev/null") == kExitConfig);
  CHECK(shell(exe + " mixing-time --n 16 --t-max 2 -o " + out.string() + " 2>/dev/null") == kExitUnresolved);
  fs::remove(cfg);
  fs::remove(out);
}
#endif
