#include "doctest.h"

#include "grwflow/cli.hpp"
#include "grwflow/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace grwflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json minimal() {
  return json::parse(R"({
    "profile": {"name": "steady_state"},
    "leaf": {"n": 2, "domain": {"type": "interval", "a": 0, "b": 1}},
    "grid": {"points": 200},
    "initial": {"type": "constant", "c": 1},
    "time": {"t_end": 0.5}
  })");
}

std::string error_of(const json &j) {
  try {
    cli::parse_config_json(j);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / "grwflow_unit" / name;
  fs::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("minimal config is valid and defaults are echoed") {
  const auto cfg = cli::parse_config_json(minimal());
  CHECK(cfg.flow.profile == "steady_state");
  CHECK(cfg.flow.n == 2);
  CHECK(cfg.flow.grid == 200);
  CHECK(cfg.flow.t_end == 0.5);
  CHECK(cfg.echo["time"]["scheme"] == "explicit_rk2");
  CHECK(cfg.echo["checks"]["eps_slack"] == 1e-6);
  CHECK(cfg.echo["output"]["dir"] == "out");
  // the echo parses back to the same config
  CHECK(cli::parse_config_json(cfg.echo).echo == cfg.echo);
}

TEST_CASE("config errors") {
  auto j = minimal();
  j["profile"]["rho_prime"] = 1.0;
  const std::string e = error_of(j);
  CHECK(e.find("unknown key 'rho_prime'") != std::string::npos);
  CHECK(e.find("nearest valid key: 'name'") != std::string::npos);

  auto top = minimal();
  top["tme"] = json::object();
  CHECK(error_of(top).find("nearest valid key: 'time'") != std::string::npos);

  auto steep = minimal();
  steep["profile"]["name"] = "minkowski_product";
  steep["leaf"]["n"] = 1;
  steep["grid"]["points"] = 20;
  steep["initial"] = {{"type", "bump"}, {"c", 0}, {"amplitude", 0.9}, {"mode", 1}};
  CHECK(error_of(steep).find("at node 3") != std::string::npos);

  auto missing = minimal();
  missing["time"].erase("t_end");
  CHECK(error_of(missing).find("time.t_end") != std::string::npos);

  auto badtype = minimal();
  badtype["grid"]["points"] = "many";
  CHECK_FALSE(error_of(badtype).empty());

  auto curved_slab = minimal();
  curved_slab["leaf"]["K_M"] = -1.0;
  CHECK_FALSE(error_of(curved_slab).empty());

  auto unknown_check = minimal();
  unknown_check["checks"] = {{"enabled", {"hieght"}}};
  CHECK(error_of(unknown_check).find("height") != std::string::npos);

  CHECK_THROWS_AS(cli::parse_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("edit distance") {
  CHECK(cli::levenshtein("kitten", "sitting") == 3);
  CHECK(cli::levenshtein("", "abc") == 3);
  CHECK(cli::levenshtein("same", "same") == 0);
  CHECK(cli::nearest("rho_prime", {"name", "table", "s_base"}) == "name");
}

TEST_CASE("number formatting round-trips") {
  CHECK(cli::format_double(0.1) == "0.1");
  CHECK(cli::format_double(std::nan("")) == "");
  CHECK(std::stod(cli::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("output directory precedence") {
  auto cfg = cli::parse_config_json(minimal());
  cfg.output.dir = "from_config";
  ::unsetenv("GRWFLOW_OUT_DIR");
  CHECK(cli::resolve_out_dir("", cfg) == "from_config");
  ::setenv("GRWFLOW_OUT_DIR", "from_env", 1);
  CHECK(cli::resolve_out_dir("", cfg) == "from_env");
  CHECK(cli::resolve_out_dir("flag", cfg) == "flag");
  ::unsetenv("GRWFLOW_OUT_DIR");
}

TEST_CASE("run on the steady state constant config") {
  const auto cfg = cli::parse_config_json(minimal());
  const fs::path dir = scratch("steady");
  std::ostringstream err;
  const auto r = cli::run(cfg, dir, err);
  CHECK(r.exit_code == cli::kPass);
  CHECK(r.verdict == "pass");
  for (const char *f : {"trace.csv", "report.json", "manifest.json"}) {
    CHECK(fs::exists(dir / f));
  }
  std::istringstream csv(slurp(dir / "trace.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == cli::kTraceHeader);
  std::getline(csv, line);
  CHECK(line.rfind("t,min_u,max_u,osc,max_theta,min_H,max_H,max_A2,height,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::string t, lo, hi, osc;
    std::getline(fields, t, ',');
    std::getline(fields, lo, ',');
    std::getline(fields, hi, ',');
    std::getline(fields, osc, ',');
    CHECK(osc == "0");
    ++rows;
  }
  CHECK(rows > 100);

  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["verdict"] == "pass");
  CHECK(rep["final"]["max_u"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));
  const json man = json::parse(slurp(dir / "manifest.json"));
  for (const auto &f : man["outputs"]) {
    CHECK(fs::exists(f.get<std::string>()));
  }
  CHECK(man["version"] == cli::kToolVersion);
}

TEST_CASE("identical configs give identical bytes") {
  auto j = minimal();
  j["profile"]["name"] = "reference";
  j["grid"]["points"] = 41;
  j["initial"] = {{"type", "bump"}, {"c", 1}, {"amplitude", 0.2}};
  j["checks"] = {{"residuals", true}};
  j["time"]["t_end"] = 0.1;
  const auto cfg = cli::parse_config_json(j);
  std::ostringstream err;
  cli::run(cfg, scratch("det_a"), err);
  cli::run(cfg, scratch("det_b"), err);
  for (const char *f : {"trace.csv", "report.json", "residuals.csv", "boundary.csv"}) {
    CAPTURE(f);
    const fs::path base = fs::temp_directory_path() / "grwflow_unit";
    CHECK(slurp(base / "det_a" / f) == slurp(base / "det_b" / f));
  }
}

TEST_CASE("check on de Sitter") {
  auto j = minimal();
  j["profile"]["name"] = "de_sitter";
  j["initial"] = {{"type", "bump"}, {"c", 0.5}, {"amplitude", 0.1}};
  const auto cfg = cli::parse_config_json(j);
  std::ostringstream out, err;
  CHECK(cli::check(cfg, out, err) == cli::kPass);
  const std::string s = out.str();
  CHECK(s.find("ratio_nonincreasing=false\n") != std::string::npos);
  CHECK(s.find("check.height=not-applicable") != std::string::npos);
  CHECK(s.find("check.H_bound=not-applicable") != std::string::npos);
}

TEST_CASE("losing the profile interval is a runtime error with a snapshot") {
  auto j = minimal();
  j["profile"] = {{"name", "table"},
                  {"table", GRWFLOW_SOURCE_DIR "/tests/data/short_exp_table.txt"}};
  j["grid"]["points"] = 30;
  const auto cfg = cli::parse_config_json(j);
  const fs::path dir = scratch("breakdown");
  std::ostringstream err;
  const auto r = cli::run(cfg, dir, err);
  CHECK(r.exit_code == cli::kRuntimeError);
  CHECK(r.verdict == "error");
  CHECK(fs::exists(dir / "snapshot.csv"));
  CHECK(err.str().find("snapshot") != std::string::npos);
}

TEST_CASE("sweep writes one directory per config and an index") {
  const fs::path base = scratch("sweep");
  const fs::path cfgs = scratch("sweep_configs");
  fs::create_directories(cfgs);
  auto a = minimal();
  a["grid"]["points"] = 21;
  auto b = a;
  b["profile"]["name"] = "einstein_de_sitter";
  std::ofstream(cfgs / "a.json") << a.dump();
  std::ofstream(cfgs / "b.json") << b.dump();
  std::ofstream(cfgs / "c.json") << "{ not json";
  std::ostringstream err;
  const auto files = cli::expand_glob((cfgs / "*.json").string());
  REQUIRE(files.size() == 3);
  const int code = cli::sweep(files, base, 2, err);
  CHECK(code == cli::kRuntimeError); // worst exit code wins
  const json index = json::parse(slurp(base / "index.json"));
  REQUIRE(index["runs"].size() == 3);
  CHECK(index["runs"][0]["verdict"] == "pass");
  CHECK(index["runs"][1]["verdict"] == "pass");
  CHECK(index["runs"][2]["verdict"] == "error");
  CHECK(fs::exists(base / "a" / "report.json"));
  CHECK(fs::exists(base / "b" / "report.json"));
}
