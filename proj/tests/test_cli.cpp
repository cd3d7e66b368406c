#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reebpa/cli.hpp"
#include "reebpa/errors.hpp"

using namespace reebpa;
using nlohmann::json;

namespace {

std::string config_error_pointer(const json& cfg) {
  try {
    dispatch(cfg);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  FAIL("config accepted: " << cfg.dump());
  return {};
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "reebpa_cli");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("lefschetz command") {
  const CliResult r = dispatch({{"cmd", "lefschetz"}, {"model", "standard_pa"}, {"n", 4}, {"k", 0}, {"lambda", 2}});
  CHECK(r.exit_code == exit_pass);
  CHECK(r.report["result"]["index"] == -3);
  CHECK(r.report["schema"] == kReportSchema);
  CHECK(r.report["command"] == "lefschetz");
  CHECK(r.report["pass"] == true);
  CHECK(r.report.contains("version"));
  CHECK(r.report["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("census command") {
  const CliResult r = dispatch({{"cmd", "census"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 2}});
  CHECK(r.exit_code == exit_pass);
  CHECK(r.report["result"]["records"].size() == 3);
  for (const auto& lvl : r.report["result"]["levels"]) CHECK(lvl["fixed_points"] == lvl["expected"]);
}

TEST_CASE("verify command exits with a certified failure on neg_axis") {
  const CliResult r = dispatch({{"cmd", "verify"}, {"fixture", "neg_axis"}});
  CHECK(r.exit_code == exit_certified_fail);
  CHECK(r.report["pass"] == false);
  const json& contact = r.report["result"]["contact"];
  CHECK(contact["pass"] == false);
  CHECK_FALSE(contact["failing"].empty());

  const CliResult a = dispatch({{"cmd", "verify"}, {"fixture", "neg_axis"}, {"epsilon", "auto"}});
  CHECK(a.exit_code == exit_certified_fail);
  CHECK_FALSE(a.report["result"]["contact"]["failing"].empty());

  const CliResult ok = dispatch({{"cmd", "verify"}, {"fixture", "std"}, {"epsilon", "auto"}});
  CHECK(ok.exit_code == exit_pass);
}

TEST_CASE("schema violations name the offending key") {
  CHECK(config_error_pointer({{"cmd", "census"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmaxx", 2}}) == "/kmaxx");
  CHECK(config_error_pointer({{"cmd", "nope"}}) == "/cmd");
  CHECK(config_error_pointer({{"cmd", "census"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", "two"}}) == "/kmax");
  CHECK(config_error_pointer({{"cmd", "census"}, {"matrix", {{2, 1}, {1}}}}).rfind("/matrix", 0) == 0);
  CHECK(config_error_pointer({{"cmd", "verify"}, {"fixture", "std"}, {"chi", {{"A", 0.1}, {"B", 1}}}}) == "/chi/B");
  CHECK(config_error_pointer({{"cmd", "torsion"}, {"k", 1}, {"class", {2, 4}}}).rfind("/class", 0) == 0);
  CHECK(config_error_pointer({{"cmd", "census"}, {"matrix", {{2, 1}, {1, 1}}}, {"workers", 0}}) == "/workers");
  CHECK_THROWS_AS(dispatch(json::array()), ConfigError);
}

TEST_CASE("every command runs from a minimal config") {
  const std::vector<json> configs = {
      {{"cmd", "model"}, {"model", "standard_pa"}, {"n", 3}, {"k", 1}, {"lambda", 1.5}, {"points", {{0.1, 0.2}}}},
      {{"cmd", "model"}, {"model", "torus_aut"}, {"matrix", {{2, 1}, {1, 1}}}, {"points", {{0.1, 0.2}}}},
      {{"cmd", "smooth"}, {"fixture", "bp"}, {"points", {{0.0, 0.5, 0.0}}}},
      {{"cmd", "verify"}, {"fixture", "std"}},
      {{"cmd", "orbits"}, {"model", "torus_aut"}, {"matrix", {{2, 1}, {1, 1}}}, {"k", 2}},
      {{"cmd", "lefschetz"}, {"model", "perturbed"}, {"n", 4}, {"k", 0}, {"lambda", 2}},
      {{"cmd", "census"}, {"matrix", {{3, 1}, {2, 1}}}, {"kmax", 3}},
      {{"cmd", "growth"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 8}},
      {{"cmd", "chain"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 3}, {"L", 3}},
      {{"cmd", "torsion"}, {"k", 2}, {"class", {0, -1}}},
  };
  for (const json& cfg : configs) {
    CAPTURE(cfg.dump());
    const CliResult r = dispatch(cfg);
    CHECK(r.exit_code == exit_pass);
    CHECK(r.report["command"] == cfg["cmd"]);
  }
}

TEST_CASE("torsion and growth reports") {
  const CliResult t = dispatch({{"cmd", "torsion"}, {"k", 2}, {"class", {0, -1}}});
  CHECK(t.report["result"]["bound"] == 4);
  CHECK(t.report["result"]["tori"] == json({0.75, 1.75}));

  const CliResult g = dispatch({{"cmd", "growth"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 8}});
  CHECK(g.csv.rfind("L,GF,CHF\n", 0) == 0);
  CHECK(std::count(g.csv.begin(), g.csv.end(), '\n') == 9);
  CHECK(g.report["result"]["GF"] == g.report["result"]["CHF"]);
}

TEST_CASE("config hash ignores workers and output paths") {
  const json a = {{"cmd", "census"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 2}};
  json b = a;
  b["workers"] = 3;
  b["out"] = "x.json";
  CHECK(config_hash(a) == config_hash(b));
  json c = a;
  c["kmax"] = 3;
  CHECK(config_hash(a) != config_hash(c));
  json d = a;
  d["seed"] = 5;
  CHECK(config_hash(a) != config_hash(d));
}

TEST_CASE("reports are deterministic across worker counts") {
  json cfg = {{"cmd", "census"}, {"matrix", {{3, 1}, {2, 1}}}, {"kmax", 5}, {"checks", true}};
  cfg["workers"] = 1;
  const std::string one = dispatch(cfg).report.dump();
  cfg["workers"] = 4;
  const std::string four = dispatch(cfg).report.dump();
  CHECK(one == four);

  json track = {{"cmd", "track"}, {"fixture", "bp"}, {"L", 2.0}, {"seed", 7},
                {"orbits", {{{"id", 0}, {"period", 1.0}}}},
                {"options", {{"field_samples", 200}, {"tube_samples", 100}}}};
  const std::string t1 = dispatch(track).report.dump();
  const std::string t2 = dispatch(track).report.dump();
  CHECK(t1 == t2);
}

TEST_CASE("command line front end") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "reebpa_cli_test";
  fs::create_directories(dir);
  const fs::path cfg = dir / "cfg.json";
  const fs::path out = dir / "out.json";
  const fs::path csv = dir / "gf.csv";
  {
    std::ofstream f(cfg);
    f << json{{"cmd", "growth"}, {"matrix", {{2, 1}, {1, 1}}}, {"kmax", 8}}.dump();
  }
  CHECK(run({"growth", "--config", cfg.string(), "--out", out.string(), "--csv", csv.string(), "--workers", "2"}) == 0);
  const json rep = json::parse(slurp(out));
  CHECK(rep["command"] == "growth");
  CHECK(slurp(csv).rfind("L,GF,CHF", 0) == 0);

  CHECK(run({"census", "--matrix", "2,1,1,1", "--kmax", "2", "--out", out.string()}) == 0);
  CHECK(json::parse(slurp(out))["result"]["records"].size() == 3);

  {
    std::ofstream f(cfg);
    f << json{{"cmd", "verify"}, {"fixture", "neg_axis"}}.dump();
  }
  CHECK(run({"verify", "--config", cfg.string(), "--out", out.string()}) == 2);
  {
    std::ofstream f(cfg);
    f << json{{"cmd", "census"}, {"bogus", 1}}.dump();
  }
  CHECK(run({"census", "--config", cfg.string(), "--out", out.string()}) == 1);
  CHECK(run({"census", "--matrix", "2,1,1"}) == 1);
  fs::remove_all(dir);
}
