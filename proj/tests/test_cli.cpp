#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using json = nlohmann::json;

namespace {

const char* cli_path() { return KPERT_CLI_PATH; }

int run_cli(const std::string& args) {
  std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kSeriesConfig = R"({
  "command": "series",
  "kernel": {"name": "beta", "beta": 0.5},
  "potential": {"name": "constant", "c": 1.0},
  "grid": {"times": [0.0, 0.5, 1.0]},
  "truncation": 4
})";

}  // namespace

TEST_CASE("series command succeeds and reports the closed-form value") {
  write_file("cfg_series.json", kSeriesConfig);
  CHECK(run_cli("--config cfg_series.json --out series_out.json") == 0);
  auto rep = json::parse(slurp("series_out.json"));
  CHECK(rep.contains("version"));
  CHECK(rep.contains("wall_clock_ms"));
  CHECK(rep["config"]["command"] == "series");
  const auto& rows = rep["payload"]["rows"];
  CHECK(rows.size() == 3);
  // first row is (s,t) = (0, 0.5); k_1 = (0.5)^0 / Gamma(1) * ... check k0 = (0.5)^{-1/2}/Gamma(1/2)
  double k0 = rows[0]["terms"][0]["value"].get<double>();
  CHECK(k0 == doctest::Approx(std::pow(0.5, -0.5) / std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("csv and json payloads carry identical values") {
  write_file("cfg_series.json", kSeriesConfig);
  REQUIRE(run_cli("--config cfg_series.json --out out.json --format json") == 0);
  REQUIRE(run_cli("--config cfg_series.json --out out.csv --format csv") == 0);
  auto rep = json::parse(slurp("out.json"));
  std::ifstream csv("out.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "s,x,t,y,n,value,err");
  std::string line;
  int count = 0;
  for (const auto& row : rep["payload"]["rows"]) {
    for (int n = 0; n < (int)row["terms"].size(); ++n) {
      REQUIRE(std::getline(csv, line));
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 7);
      CHECK(std::stod(cells[4]) == n);
      CHECK(std::stod(cells[5]) == row["terms"][n]["value"].get<double>());
      ++count;
    }
  }
  CHECK(count == 15);  // 3 rows x 5 terms
}

TEST_CASE("idempotence: identical payloads across runs") {
  write_file("cfg_series.json", kSeriesConfig);
  REQUIRE(run_cli("--config cfg_series.json --out run1.json") == 0);
  REQUIRE(run_cli("--config cfg_series.json --out run2.json") == 0);
  auto a = json::parse(slurp("run1.json"));
  auto b = json::parse(slurp("run2.json"));
  CHECK(a["payload"] == b["payload"]);
}

TEST_CASE("exit code 2 on config problems") {
  CHECK(run_cli("--config does_not_exist.json") == 2);
  write_file("cfg_bad.json", "{ not json");
  CHECK(run_cli("--config cfg_bad.json") == 2);
  write_file("cfg_nocmd.json", R"({"kernel": {"name": "beta", "beta": 0.5}})");
  CHECK(run_cli("--config cfg_nocmd.json") == 2);
  write_file("cfg_badkernel.json",
             R"({"command": "series", "kernel": {"name": "warp"}, "grid": {"times": [0,1]}})");
  CHECK(run_cli("--config cfg_badkernel.json") == 2);
  write_file("cfg_badcmd.json",
             R"({"command": "frobnicate", "kernel": {"name": "beta", "beta": 0.5},
                 "grid": {"times": [0,1]}})");
  CHECK(run_cli("--config cfg_badcmd.json") == 2);
}

TEST_CASE("exit code 3 on precondition violations") {
  // ck-check on the beta kernel: the flag gate rejects it
  write_file("cfg_ck_beta.json", R"({
    "command": "ck-check",
    "kernel": {"name": "beta", "beta": 0.5},
    "grid": {"times": [0.0, 0.5, 1.0]}
  })");
  CHECK(run_cli("--config cfg_ck_beta.json") == 3);
}

TEST_CASE("exit code 5 when no candidate certifies") {
  // large q on a long horizon: ratio k1/k0 exceeds every eta + c(t-s) fit is still linear;
  // force failure by pinning an explicit undersized control
  write_file("cfg_badcert.json", R"({
    "command": "certify",
    "kernel": {"name": "beta", "beta": 0.5},
    "potential": {"name": "constant", "c": 1.0},
    "grid": {"times": [0.0, 1.0]},
    "control": {"eta": 0.0, "c": 0.01}
  })");
  CHECK(run_cli("--config cfg_badcert.json") == 5);
}

TEST_CASE("exit code 6 when a verification command finds violations") {
  write_file("cfg_chain_bad.json", R"({
    "command": "chain",
    "kernel": {"name": "beta", "beta": 0.5},
    "potential": {"name": "constant", "c": 1.0},
    "grid": {"times": [0.0, 1.0]},
    "truncation": 6,
    "control": {"eta": 0.0, "c": 0.17724539}
  })");
  CHECK(run_cli("--config cfg_chain_bad.json") == 6);
}

TEST_CASE("certify with a generous eta yields a valid certificate, exit 0") {
  write_file("cfg_cert.json", R"({
    "command": "certify",
    "kernel": {"name": "beta", "beta": 0.5},
    "potential": {"name": "constant", "c": 1.0},
    "grid": {"times": [0.0, 0.5, 1.0]}
  })");
  CHECK(run_cli("--config cfg_cert.json --out cert.json") == 0);
  auto rep = json::parse(slurp("cert.json"));
  CHECK(rep["payload"]["valid"].get<bool>());
}

TEST_CASE("threep command reports the midpoint constant") {
  write_file("cfg_3p.json", R"({
    "command": "threep",
    "kernel": {"name": "beta", "beta": 0.5},
    "grid": {"times": [0.0, 0.25, 0.5, 0.75, 1.0]}
  })");
  CHECK(run_cli("--config cfg_3p.json --out 3p.json") == 0);
  auto rep = json::parse(slurp("3p.json"));
  CHECK(rep["payload"]["sup"].get<double>() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("override flag reaches nested config keys") {
  write_file("cfg_series.json", kSeriesConfig);
  REQUIRE(run_cli("--config cfg_series.json --override truncation=2 --out ov.json") == 0);
  auto rep = json::parse(slurp("ov.json"));
  CHECK(rep["config"]["truncation"] == 2);
  CHECK(rep["payload"]["rows"][0]["terms"].size() == 3);
  // nested path
  REQUIRE(run_cli("--config cfg_series.json --override quadrature.time.nodes=16 --out ov2.json") ==
          0);
  auto rep2 = json::parse(slurp("ov2.json"));
  CHECK(rep2["config"]["quadrature"]["time"]["nodes"] == 16);
}

TEST_CASE("command positional overrides the config") {
  write_file("cfg_series.json", kSeriesConfig);
  CHECK(run_cli("threep --config cfg_series.json --out pos.json") == 0);
  auto rep = json::parse(slurp("pos.json"));
  CHECK(rep["config"]["command"] == "threep");
  CHECK(rep["payload"].contains("sup"));
}
