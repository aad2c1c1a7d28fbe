#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "corrsolve/lp_core.hpp"

#ifndef CORRSOLVE_CLI
#error "CORRSOLVE_CLI must point at the CLI binary"
#endif

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args) {
  std::string out_path = "cli_stdout.tmp";
  std::string err_path = "cli_stderr.tmp";
  std::string cmd = std::string(CORRSOLVE_CLI) + " " + args + " > " +
                    out_path + " 2> " + err_path;
  int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

// Strips the wall-time column so benchmark output can be compared across
// runs.
std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i == 7) continue;  // wall_ms
      out << cells[i] << ",";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("gen and info pipeline") {
  REQUIRE(run_cli("gen m2 --out cli_m2.json").exit_code == 0);
  RunResult info = run_cli("info cli_m2.json --xi");
  CHECK(info.exit_code == 0);
  CHECK(info.out.find("sequences: 3 x 3") != std::string::npos);
  CHECK(info.out.find("relevant pairs: 9") != std::string::npos);
  CHECK(info.out.find("xi rows: 7") != std::string::npos);
}

TEST_CASE("solve then verify round trip") {
  REQUIRE(run_cli("gen m2 --out cli_m2.json").exit_code == 0);
  RunResult solved =
      run_cli("solve cli_m2.json --concept nfcce --out cli_m2_sol.json");
  REQUIRE(solved.exit_code == 0);
  nlohmann::json sol = nlohmann::json::parse(slurp("cli_m2_sol.json"));
  CHECK(sol["status"] == "optimal");
  CHECK(std::abs(sol["objective"].get<double>() - 2.0) < 1e-9);

  RunResult verified = run_cli("verify cli_m2.json cli_m2_sol.json");
  CHECK(verified.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(verified.out);
  CHECK(report["pass"] == true);
}

TEST_CASE("tampered solutions fail verification with a named row") {
  REQUIRE(run_cli("gen m2 --out cli_m2.json").exit_code == 0);
  REQUIRE(run_cli("solve cli_m2.json --concept efcce --out cli_m2_sol.json")
              .exit_code == 0);
  nlohmann::json sol = nlohmann::json::parse(slurp("cli_m2_sol.json"));
  // Zero out the normalization entry.
  for (size_t k = 0; k < sol["xi"]["pairs"].size(); ++k) {
    if (sol["xi"]["pairs"][k][0] == 0 && sol["xi"]["pairs"][k][1] == 0) {
      sol["xi"]["values"][k] = 0.0;
    }
  }
  std::ofstream("cli_m2_bad.json") << sol.dump();
  RunResult verified = run_cli("verify cli_m2.json cli_m2_bad.json");
  CHECK(verified.exit_code == 1);
  nlohmann::json report = nlohmann::json::parse(verified.out);
  CHECK(report["pass"] == false);
  CHECK(report["xi_residual_row"] == "norm");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("solve").exit_code == 2);
  CHECK(run_cli("gen m2 --no-such-flag").exit_code == 2);
  CHECK(run_cli("solve missing-file.json --concept nfcce").exit_code == 2);
}

TEST_CASE("chance games are routed to the oracle") {
  REQUIRE(run_cli("gen sat --clause 0,~1 --clause ~0,1 --out cli_sat.json")
              .exit_code == 0);
  RunResult solved = run_cli("solve cli_sat.json --concept nfcce");
  CHECK(solved.exit_code == 2);
  CHECK(solved.err.find("oracle") != std::string::npos);

  RunResult oracle = run_cli("oracle cli_sat.json --concept nfcce");
  CHECK(oracle.exit_code == 0);
  nlohmann::json out = nlohmann::json::parse(oracle.out);
  CHECK(std::abs(out["value"].get<double>() - 2.0) < 1e-9);
}

TEST_CASE("infeasible welfare floor exits with the solver code") {
  REQUIRE(run_cli("gen m2 --out cli_m2.json").exit_code == 0);
  RunResult solved = run_cli(
      "solve cli_m2.json --concept nfcce --tau 2.1 --out cli_m2_sol.json");
  CHECK(solved.exit_code == 3);
  nlohmann::json sol = nlohmann::json::parse(slurp("cli_m2_sol.json"));
  CHECK(sol["status"] == "infeasible");
}

TEST_CASE("dumped LPs reload and resolve identically") {
  REQUIRE(run_cli("gen sheriff --n_max 1 --b_max 1 --r 1 --out cli_sh.json")
              .exit_code == 0);
  REQUIRE(run_cli("solve cli_sh.json --concept efce --out cli_sh_sol.json "
                  "--dump-lp cli_sh.lp")
              .exit_code == 0);
  nlohmann::json sol = nlohmann::json::parse(slurp("cli_sh_sol.json"));
  corrsolve::LinearProgram lp =
      corrsolve::LinearProgram::parse(slurp("cli_sh.lp"));
  corrsolve::LpSolution reload = corrsolve::solve(lp);
  REQUIRE(reload.status == corrsolve::LpStatus::Optimal);
  CHECK(std::abs(reload.objective - sol["objective"].get<double>()) <= 1e-9);
}

TEST_CASE("region command emits the documented CSV layout") {
  REQUIRE(run_cli("gen battleship --w 2 --h 1 --r 2 --out cli_bs.json")
              .exit_code == 0);
  RunResult region =
      run_cli("region cli_bs.json --concept efce --directions 6 --seed 1 "
              "--out cli_region.csv");
  REQUIRE(region.exit_code == 0);
  std::istringstream csv(slurp("cli_region.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "concept,dx,dy,u1,u2");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("bench output is stable modulo wall time") {
  RunResult a = run_cli("bench --game goofspiel --r 2 --out cli_bench_a.csv");
  REQUIRE(a.exit_code == 0);
  RunResult b = run_cli("bench --game goofspiel --r 2 --out cli_bench_b.csv");
  REQUIRE(b.exit_code == 0);
  std::string sa = strip_wall_ms(slurp("cli_bench_a.csv"));
  std::string sb = strip_wall_ms(slurp("cli_bench_b.csv"));
  CHECK(sa == sb);

  // One row per concept plus the header.
  std::istringstream csv(slurp("cli_bench_a.csv"));
  std::string line;
  int rows = 0;
  bool equal_sw = true;
  std::string first_sw;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    if (first_sw.empty()) {
      first_sw = cells[9];
    } else if (cells[9] != first_sw) {
      equal_sw = false;
    }
  }
  CHECK(rows == 3);
  CHECK(equal_sw);  // goofspiel welfare agrees across concepts
}
