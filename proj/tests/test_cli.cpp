#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridshape/cli.hpp"
#include "gridshape/report.hpp"

using namespace gridshape;
using nlohmann::json;

namespace {

const std::string kCase = GRIDSHAPE_DATA_DIR "/wscc9_modified.json";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gridshape");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("tune reproduces the reference droop", "[cli]") {
  const Outcome o = invoke({"tune", "--case", kCase, "--cospsi", "0.1", "--alpha", "0.2", "--dp", "0.2",
                            "--dwd", "200mHz", "--coi-override", "0"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["tuning"]["d_b"].get<double>() == Catch::Approx(35.89).margin(0.01));
  CHECK(j["tuning"]["d_b_coi_formula"].get<double>() == Catch::Approx(0.633).margin(0.01));
  CHECK(j["tuning"]["coi_overridden"].get<bool>());
  CHECK(j["tuning"]["regime"] == "LinearBoth");
  CHECK(j["version"] == std::string(version()));
  CHECK(j["case_hash"].get<std::string>().size() == 64);
}

TEST_CASE("reports are deterministic", "[cli]") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"analyze", "--case", kCase, "--db", "35.89"},
        std::vector<std::string>{"locus", "--case", kCase, "--controller", "vi", "--db", "35.89"},
        std::vector<std::string>{"frontier", "--case", kCase, "--points", "64"},
        std::vector<std::string>{"simulate", "--case", kCase, "--db", "35.89", "--u0", "0.1,0,0", "--t-end", "5",
                                 "--mode", "both"}}) {
    const Outcome a = invoke(args), b = invoke(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK_NOTHROW(json::parse(a.out));
  }
}

TEST_CASE("tuned droop passes its own region", "[cli]") {
  const Outcome t = invoke({"tune", "--case", kCase, "--cospsi", "0.1", "--alpha", "0.2", "--coi-override", "0"});
  const double d_b = json::parse(t.out)["tuning"]["d_b"].get<double>();
  std::ostringstream db;
  db.precision(17);
  db << d_b;
  const Outcome a = invoke({"analyze", "--case", kCase, "--db", db.str(), "--cospsi", "0.1", "--alpha", "0.2"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["analysis"]["pass"].get<bool>());
}

TEST_CASE("zero disturbance stays at rest", "[cli]") {
  const Outcome o =
      invoke({"simulate", "--case", kCase, "--db", "35.89", "--u0", "0,0,0", "--t-end", "3", "--mode", "both"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  for (const char* mode : {"direct", "modal"}) {
    for (const auto& v : j[mode]["coi"]) CHECK(v.get<double>() == 0.0);
    for (const auto& row : j[mode]["omega"])
      for (const auto& v : row) CHECK(v.get<double>() == 0.0);
  }
}

TEST_CASE("output directory artifacts", "[cli]") {
  const auto dir = std::filesystem::temp_directory_path() / "gridshape_cli_test";
  std::filesystem::remove_all(dir);
  const Outcome o = invoke({"simulate", "--case", kCase, "--db", "35.89", "--u0", "0.1,0,0", "--t-end", "2",
                            "--output-dir", dir.string(), "--format", "json,csv"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  REQUIRE(j["artifacts"].size() == 2);
  for (const auto& path : j["artifacts"]) CHECK(std::filesystem::exists(path.get<std::string>()));
  std::ifstream csv(dir / "simulate_direct.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,omega_1,omega_2,omega_3,coi,pinv_1,pinv_2,pinv_3");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 201);
  std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes", "[cli]") {
  const Outcome wrong_len = invoke({"simulate", "--case", kCase, "--db", "35.89", "--u0", "1,2"});
  CHECK(wrong_len.code == 1);
  CHECK(json::parse(wrong_len.err)["code"] == "InvalidInput");

  const Outcome missing = invoke({"analyze", "--case", "/nonexistent/case.json"});
  CHECK(missing.code == 1);

  const Outcome infeasible = invoke({"tune", "--case", kCase, "--cospsi", "0.1", "--alpha", "50"});
  CHECK(infeasible.code == 1);
  CHECK(json::parse(infeasible.err)["code"] == "InfeasibleDecayTarget");

  const Outcome nadir = invoke({"locus", "--case", kCase, "--controller", "vi", "--db", "35.89", "--mv", "1"});
  CHECK(nadir.code == 1);
  CHECK(json::parse(nadir.err)["code"] == "NadirConditionViolated");

  const Outcome usage = invoke({"analyze"});
  CHECK(usage.code != 0);

  cli::RunConfig cfg;
  cfg.command = cli::Command::analyze;
  cfg.case_path = kCase;
  cfg.controller = {ControllerKind::FS, 35.89, 0.0};
  std::ostringstream out, err;
  CHECK(cli::run(cfg, out, err) == 0);
  CHECK(err.str().empty());
}
