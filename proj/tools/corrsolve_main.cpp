#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrsolve/generators.hpp"
#include "corrsolve/verify.hpp"

using namespace corrsolve;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolverFail = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Clause parse_clause(const std::string& text) {
  Clause clause;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    Literal lit;
    size_t at = 0;
    if (tok[at] == '~') {
      lit.negated = true;
      ++at;
    }
    if (at < tok.size() && tok[at] == 'v') ++at;
    lit.var = std::stoi(tok.substr(at));
    clause.push_back(lit);
  }
  if (clause.empty()) throw std::runtime_error("empty clause '" + text + "'");
  return clause;
}

json solution_to_json(const CompactSetup& setup,
                      const EquilibriumSolution& sol) {
  json doc;
  doc["concept"] = to_string(sol.kind);
  doc["status"] = to_string(sol.status);
  doc["objective"] = sol.objective;
  doc["followed_utility"] = sol.followed_utility;
  doc["max_gap"] = sol.max_gap;
  doc["xi_residual"] = sol.xi_residual;
  doc["lp_rows"] = sol.lp_rows;
  doc["lp_cols"] = sol.lp_cols;
  doc["lp_iterations"] = sol.lp_iterations;
  doc["wall_ms"] = sol.wall_ms;
  json gaps = json::array();
  for (const TriggerReport& tr : sol.trigger_reports) {
    gaps.push_back({{"player", tr.trigger.player},
                    {"infoset", tr.trigger.infoset},
                    {"sequence", tr.trigger.seq},
                    {"followed", tr.followed},
                    {"deviation", tr.deviation},
                    {"gap", tr.gap}});
  }
  doc["trigger_gaps"] = std::move(gaps);
  json pairs = json::array();
  json values = json::array();
  for (int k = 0; k < setup.pairs.num_pairs(); ++k) {
    pairs.push_back({setup.pairs.pair(k).seq1, setup.pairs.pair(k).seq2});
    values.push_back(k < static_cast<int>(sol.xi.size()) ? sol.xi[k] : 0.0);
  }
  doc["xi"] = {{"pairs", std::move(pairs)}, {"values", std::move(values)}};
  return doc;
}

int cmd_gen(const std::string& game, int n_max, int b_max, int w, int h,
            int rounds, const std::vector<std::string>& clause_texts,
            const std::string& out) {
  GameTree tree = [&]() {
    if (game == "m2") return gen_m2();
    if (game == "sheriff") return gen_sheriff(n_max, b_max, rounds);
    if (game == "battleship") return gen_battleship(w, h, rounds);
    if (game == "goofspiel") return gen_goofspiel(rounds);
    if (game == "sat") {
      std::vector<Clause> clauses;
      for (const std::string& text : clause_texts) {
        clauses.push_back(parse_clause(text));
      }
      return gen_sat_game(clauses);
    }
    throw std::runtime_error("unknown game '" + game + "'");
  }();
  write_text(out, save_game(tree));
  return kExitOk;
}

int cmd_info(const std::string& path, bool with_xi) {
  GameTree game = load_game_file(path);
  SequenceFormIndex index = build_sequences(game);
  std::printf("players: %d\n", game.num_players());
  std::printf("nodes: %d  leaves: %zu  infosets: %d\n", game.num_nodes(),
              game.leaves().size(), game.num_infosets());
  if (game.num_players() == 2) {
    RelevantPairSet pairs(game, index);
    std::printf("sequences: %d x %d\n", index.num_sequences(1),
                index.num_sequences(2));
    std::printf("sequence pairs: %ld\n", pairs.total_pair_count());
    std::printf("relevant pairs: %d\n", pairs.num_pairs());
    if (with_xi) {
      try {
        XiConstraintSystem xi = build_xi_constraints(game, index, pairs);
        std::printf("xi variables: %d\n", xi.num_vars);
        std::printf("xi rows: %zu\n", xi.rows.size());
      } catch (const std::exception& e) {
        std::printf("xi: unavailable (%s)\n", e.what());
      }
    }
  } else {
    for (int p = 1; p <= game.num_players(); ++p) {
      std::printf("sequences(player %d): %d\n", p, index.num_sequences(p));
    }
  }
  return kExitOk;
}

int cmd_solve(const std::string& path, const std::string& concept_name,
              const std::string& objective_name, double dx, double dy,
              std::optional<double> tau, const std::string& out,
              const std::string& dump_lp) {
  GameTree game = load_game_file(path);
  Concept kind = concept_from_string(concept_name);
  CompactSetup setup(std::move(game));

  std::vector<double> objective =
      objective_name == "dir"
          ? direction_vector(setup.game, setup.subs, setup.pairs, dx, dy)
          : welfare_vector(setup.game, setup.subs, setup.pairs);

  if (!dump_lp.empty()) {
    EquilibriumLp elp = build_lp(setup, kind, objective);
    if (tau) {
      add_welfare_floor(
          elp, welfare_vector(setup.game, setup.subs, setup.pairs), *tau);
    }
    write_text(dump_lp, elp.lp.dump());
  }

  EquilibriumSolution sol = solve_equilibrium(setup, kind, objective, tau);
  write_text(out, solution_to_json(setup, sol).dump(2) + "\n");
  if (sol.status != LpStatus::Optimal) {
    std::fprintf(stderr, "solver finished with status %s\n",
                 to_string(sol.status).c_str());
    return kExitSolverFail;
  }
  return kExitOk;
}

int cmd_verify(const std::string& game_path, const std::string& solution_path,
               double tol) {
  GameTree game = load_game_file(game_path);
  CompactSetup setup(std::move(game));

  std::ifstream in(solution_path);
  if (!in) throw std::runtime_error("cannot open '" + solution_path + "'");
  json doc = json::parse(in);
  Concept kind = concept_from_string(doc.at("concept").get<std::string>());

  std::vector<double> xi(setup.pairs.num_pairs(), 0.0);
  const json& jpairs = doc.at("xi").at("pairs");
  const json& jvalues = doc.at("xi").at("values");
  if (jpairs.size() != jvalues.size()) {
    throw std::runtime_error("solution xi arrays disagree in length");
  }
  for (size_t k = 0; k < jpairs.size(); ++k) {
    int s1 = jpairs[k][0].get<int>();
    int s2 = jpairs[k][1].get<int>();
    int coord = setup.pairs.index_of(s1, s2);
    if (coord < 0) {
      throw std::runtime_error("solution references pair (" +
                               std::to_string(s1) + ", " + std::to_string(s2) +
                               ") that is not relevant in this game");
    }
    xi[coord] = jvalues[k].get<double>();
  }

  VerificationReport report = certify(setup, xi, kind, tol);
  json out;
  out["concept"] = to_string(kind);
  out["pass"] = report.pass;
  out["tolerance"] = report.tolerance;
  out["max_gap"] = report.max_gap;
  out["xi_residual"] = report.xi_residual;
  out["xi_residual_row"] = report.xi_residual_tag;
  json triggers = json::array();
  for (const TriggerReport& tr : report.triggers) {
    triggers.push_back({{"player", tr.trigger.player},
                        {"infoset", tr.trigger.infoset},
                        {"sequence", tr.trigger.seq},
                        {"followed", tr.followed},
                        {"deviation", tr.deviation},
                        {"gap", tr.gap}});
  }
  out["triggers"] = std::move(triggers);
  std::cout << out.dump(2) << "\n";
  if (!report.pass) {
    std::fprintf(stderr, "verification failed: max gap %.3g, residual %.3g",
                 report.max_gap, report.xi_residual);
    if (report.xi_residual > tol) {
      std::fprintf(stderr, " (worst row: %s)", report.xi_residual_tag.c_str());
    }
    std::fprintf(stderr, "\n");
    return kExitVerifyFail;
  }
  return kExitOk;
}

int cmd_region(const std::string& path, const std::string& concept_name,
               int directions, unsigned long long seed,
               const std::string& out) {
  GameTree game = load_game_file(path);
  Concept kind = concept_from_string(concept_name);
  CompactSetup setup(std::move(game));
  std::vector<RegionSample> samples =
      sample_payoff_region(setup, kind, directions, seed);
  std::ostringstream csv;
  csv << "concept,dx,dy,u1,u2\n";
  for (const RegionSample& s : samples) {
    csv << to_string(kind) << "," << format_double(s.dx) << ","
        << format_double(s.dy) << "," << format_double(s.u1) << ","
        << format_double(s.u2) << "\n";
  }
  write_text(out, csv.str());
  return kExitOk;
}

int cmd_oracle(const std::string& path, const std::string& concept_name,
               const std::string& objective_name, double dx, double dy,
               long cap, const std::string& out) {
  GameTree game = load_game_file(path);
  Concept kind = concept_from_string(concept_name);
  std::vector<double> weights = objective_name == "dir"
                                    ? direction_leaf_weights(game, dx, dy)
                                    : welfare_leaf_weights(game);
  OracleResult result = oracle_optimum(game, kind, weights, cap);
  json doc;
  doc["concept"] = to_string(kind);
  doc["status"] = to_string(result.status);
  doc["value"] = result.value;
  doc["plan_counts"] = result.plan_counts;
  if (result.joint.size() <= 5000) {
    doc["joint"] = result.joint;  // witness distribution over plan tuples
  }
  write_text(out, doc.dump(2) + "\n");
  return result.status == LpStatus::Optimal ? kExitOk : kExitSolverFail;
}

struct BenchInstance {
  std::string game;
  std::string params;
  GameTree tree;
};

int cmd_bench(const std::string& which, std::vector<int> goof_r,
              std::vector<int> n_max, std::vector<int> b_max,
              std::vector<int> rounds, std::vector<int> widths,
              std::vector<int> heights, const std::string& out) {
  if (goof_r.empty()) goof_r = {2, 3};
  if (n_max.empty()) n_max = {1, 2};
  if (b_max.empty()) b_max = {1, 2};
  if (rounds.empty()) rounds = {1, 2};
  if (widths.empty()) widths = {2};
  if (heights.empty()) heights = {1, 2};

  std::vector<BenchInstance> grid;
  if (which == "goofspiel" || which == "all") {
    for (int r : goof_r) {
      grid.push_back(
          {"goofspiel", "r=" + std::to_string(r), gen_goofspiel(r)});
    }
  }
  if (which == "sheriff" || which == "all") {
    for (int n : n_max) {
      for (int b : b_max) {
        for (int r : rounds) {
          grid.push_back({"sheriff",
                          "n_max=" + std::to_string(n) + ";b_max=" +
                              std::to_string(b) + ";r=" + std::to_string(r),
                          gen_sheriff(n, b, r)});
        }
      }
    }
  }
  if (which == "battleship" || which == "all") {
    for (int w : widths) {
      for (int h : heights) {
        if (w * h < 2) continue;
        for (int r : rounds) {
          grid.push_back({"battleship",
                          "w=" + std::to_string(w) + ";h=" +
                              std::to_string(h) + ";r=" + std::to_string(r),
                          gen_battleship(w, h, r)});
        }
      }
    }
  }
  if (grid.empty()) throw std::runtime_error("empty bench grid");

  std::ostringstream csv;
  csv << "game,params,concept,seq_pairs,relevant_pairs,lp_rows,lp_cols,"
         "wall_ms,status,sw,max_gap\n";
  for (BenchInstance& inst : grid) {
    CompactSetup setup(std::move(inst.tree));
    std::vector<double> c =
        welfare_vector(setup.game, setup.subs, setup.pairs);
    for (Concept kind : {Concept::NFCCE, Concept::EFCCE, Concept::EFCE}) {
      EquilibriumSolution sol = solve_equilibrium(setup, kind, c);
      csv << inst.game << "," << inst.params << "," << to_string(kind) << ","
          << setup.pairs.total_pair_count() << ","
          << setup.pairs.num_pairs() << "," << sol.lp_rows << ","
          << sol.lp_cols << "," << format_double(sol.wall_ms) << ","
          << to_string(sol.status) << "," << format_double(sol.objective)
          << "," << format_double(sol.max_gap) << "\n";
      std::fprintf(stderr, "bench %s[%s] %s: sw=%s (%.0f ms)\n",
                   inst.game.c_str(), inst.params.c_str(),
                   to_string(kind).c_str(), format_double(sol.objective).c_str(),
                   sol.wall_ms);
    }
  }
  write_text(out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "corrsolve: correlated-equilibrium solver for two-player games"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  int exit_code = kExitOk;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a game file");
  std::string gen_game, gen_out;
  int gen_n_max = 1, gen_b_max = 1, gen_w = 2, gen_h = 1, gen_r = 1;
  std::vector<std::string> gen_clauses;
  gen->add_option("game", gen_game, "m2|sheriff|battleship|goofspiel|sat")
      ->required()
      ->check(CLI::IsMember({"m2", "sheriff", "battleship", "goofspiel",
                             "sat"}));
  gen->add_option("--n_max", gen_n_max, "sheriff: max illegal items");
  gen->add_option("--b_max", gen_b_max, "sheriff: max bribe");
  gen->add_option("--w", gen_w, "battleship: board width");
  gen->add_option("--h", gen_h, "battleship: board height");
  gen->add_option("--r", gen_r,
                  "rounds (sheriff/battleship) or cards (goofspiel)");
  gen->add_option("--clause", gen_clauses,
                  "sat: clause like '0,~1' (repeatable)");
  gen->add_option("--out", gen_out, "output path (default stdout)");
  gen->callback([&]() {
    exit_code = cmd_gen(gen_game, gen_n_max, gen_b_max, gen_w, gen_h, gen_r,
                        gen_clauses, gen_out);
  });

  // info
  auto* info = app.add_subcommand("info", "print size statistics");
  std::string info_path;
  bool info_xi = false;
  info->add_option("game", info_path, "game file")->required();
  info->add_flag("--xi", info_xi, "include xi system counts");
  info->callback([&]() { exit_code = cmd_info(info_path, info_xi); });

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve the equilibrium LP");
  std::string solve_path, solve_concept, solve_out, solve_dump;
  std::string solve_objective = "welfare";
  double solve_dx = 1.0, solve_dy = 1.0, solve_tau = 0.0;
  bool tau_set = false;
  solve_cmd->add_option("game", solve_path, "game file")->required();
  solve_cmd->add_option("--concept", solve_concept, "nfcce|efcce|efce")
      ->required()
      ->check(CLI::IsMember({"nfcce", "efcce", "efce"}));
  solve_cmd->add_option("--objective", solve_objective, "welfare|dir")
      ->check(CLI::IsMember({"welfare", "dir"}));
  solve_cmd->add_option("--dx", solve_dx, "direction x component");
  solve_cmd->add_option("--dy", solve_dy, "direction y component");
  auto* tau_opt =
      solve_cmd->add_option("--tau", solve_tau, "social-welfare floor");
  solve_cmd->add_option("--out", solve_out, "solution path (default stdout)");
  solve_cmd->add_option("--dump-lp", solve_dump, "write the LP text form");
  solve_cmd->callback([&]() {
    tau_set = tau_opt->count() > 0;
    exit_code = cmd_solve(solve_path, solve_concept, solve_objective,
                          solve_dx, solve_dy,
                          tau_set ? std::optional<double>(solve_tau)
                                  : std::nullopt,
                          solve_out, solve_dump);
  });

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "check a solution against its game");
  std::string verify_game, verify_solution;
  double verify_tol = 1e-6;
  verify_cmd->add_option("game", verify_game, "game file")->required();
  verify_cmd->add_option("solution", verify_solution, "solution file")
      ->required();
  verify_cmd->add_option("--tol", verify_tol, "verification tolerance");
  verify_cmd->callback([&]() {
    exit_code = cmd_verify(verify_game, verify_solution, verify_tol);
  });

  // region
  auto* region = app.add_subcommand("region", "sample the payoff region");
  std::string region_path, region_concept, region_out;
  int region_directions = 64;
  unsigned long long region_seed = 0;
  region->add_option("game", region_path, "game file")->required();
  region->add_option("--concept", region_concept, "nfcce|efcce|efce")
      ->required()
      ->check(CLI::IsMember({"nfcce", "efcce", "efce"}));
  region->add_option("--directions", region_directions, "direction count");
  region->add_option("--seed", region_seed, "direction phase seed");
  region->add_option("--out", region_out, "CSV path (default stdout)");
  region->callback([&]() {
    exit_code = cmd_region(region_path, region_concept, region_directions,
                           region_seed, region_out);
  });

  // oracle
  auto* oracle = app.add_subcommand("oracle", "brute-force plan enumeration");
  std::string oracle_path, oracle_concept, oracle_out;
  std::string oracle_objective = "welfare";
  double oracle_dx = 1.0, oracle_dy = 1.0;
  long oracle_cap = 1'000'000;
  oracle->add_option("game", oracle_path, "game file")->required();
  oracle->add_option("--concept", oracle_concept, "nfcce|efcce|efce")
      ->required()
      ->check(CLI::IsMember({"nfcce", "efcce", "efce"}));
  oracle->add_option("--objective", oracle_objective, "welfare|dir")
      ->check(CLI::IsMember({"welfare", "dir"}));
  oracle->add_option("--dx", oracle_dx, "direction x component");
  oracle->add_option("--dy", oracle_dy, "direction y component");
  oracle->add_option("--cap", oracle_cap, "plan enumeration cap");
  oracle->add_option("--out", oracle_out, "output path (default stdout)");
  oracle->callback([&]() {
    exit_code = cmd_oracle(oracle_path, oracle_concept, oracle_objective,
                           oracle_dx, oracle_dy, oracle_cap, oracle_out);
  });

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark grid");
  std::string bench_game = "all", bench_out;
  std::vector<int> bench_goof_r, bench_n, bench_b, bench_r, bench_w, bench_h;
  bench->add_option("--game", bench_game,
                    "goofspiel|sheriff|battleship|all");
  bench->add_option("--r", bench_r, "rounds/cards values (repeatable)");
  bench->add_option("--n_max", bench_n, "sheriff n_max values");
  bench->add_option("--b_max", bench_b, "sheriff b_max values");
  bench->add_option("--w", bench_w, "battleship widths");
  bench->add_option("--h", bench_h, "battleship heights");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");
  bench->callback([&]() {
    std::vector<int> goof_r = bench_r;
    exit_code = cmd_bench(bench_game, goof_r, bench_n, bench_b, bench_r,
                          bench_w, bench_h, bench_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return exit_code;
}
