#include "corrsolve/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace corrsolve {

double followed_value(const GameTree& game, const LeafSubstitutionIndex& subs,
                      const std::vector<double>& xi_values, int player) {
  double total = 0.0;
  for (int z : game.leaves()) {
    double u = game.node(z).payoffs[player - 1];
    if (u != 0.0) total += u * xi_values[subs.leaf_pair(z)];
  }
  return total;
}

namespace {

bool chain_contains_infoset(const SequenceFormIndex& index, int player,
                            int seq, int infoset) {
  while (seq != 0) {
    const Sequence& s = index.sequence(player, seq);
    if (s.infoset == infoset) return true;
    seq = index.seq_of_infoset(s.infoset);
  }
  return false;
}

}  // namespace

double best_deviation_value(const GameTree& game,
                            const SequenceFormIndex& index,
                            const LeafSubstitutionIndex& subs,
                            const std::vector<double>& xi_values, Concept kind,
                            const Trigger& trigger) {
  const int player = trigger.player;
  int anchor;
  switch (kind) {
    case Concept::NFCCE: anchor = 0; break;
    case Concept::EFCCE: anchor = index.seq_of_infoset(trigger.infoset); break;
    case Concept::EFCE: anchor = trigger.seq; break;
  }

  // Leaf weights u_i(z) * xi[anchor ~ z], bucketed by the player's sequence.
  std::vector<double> bucket(index.num_sequences(player), 0.0);
  for (int z : game.leaves()) {
    int seq = index.seq_at_node(z, player);
    if (kind != Concept::NFCCE &&
        !chain_contains_infoset(index, player, seq, trigger.infoset)) {
      continue;
    }
    double u = game.node(z).payoffs[player - 1];
    if (u == 0.0) continue;
    bucket[seq] += u * xi_values[subs.coord(player, anchor, z)];
  }

  auto children = infosets_by_parent_sequence(game, index, player);
  auto value_of = [&](auto&& self, int is_id) -> double {
    const InfoSet& is = game.infoset(is_id);
    double best = -kInf;
    for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
      int seq = index.seq_id(is_id, a);
      double v = bucket[seq];
      for (int child : children[seq]) v += self(self, child);
      best = std::max(best, v);
    }
    return best;
  };

  if (kind == Concept::NFCCE) {
    double total = bucket[0];
    for (int root : children[0]) total += value_of(value_of, root);
    return total;
  }
  return value_of(value_of, trigger.infoset);
}

VerificationReport certify(const CompactSetup& setup,
                           const std::vector<double>& xi_values, Concept kind,
                           double tol) {
  VerificationReport report;
  report.kind = kind;
  report.tolerance = tol;

  MembershipResult mem = check_membership(xi_values, setup.xi);
  report.xi_residual = mem.max_violation;
  report.xi_residual_tag = mem.worst_tag;

  report.max_gap = -kInf;
  for (const Trigger& trigger :
       triggers_for(setup.game, setup.index, kind)) {
    IncentiveBlock block =
        incentive_block(setup.game, setup.index, setup.subs, kind, trigger);
    TriggerReport tr;
    tr.trigger = trigger;
    for (auto [coord, value] : block.b_terms) {
      tr.followed += value * xi_values[coord];
    }
    tr.deviation = best_deviation_value(setup.game, setup.index, setup.subs,
                                        xi_values, kind, trigger);
    tr.gap = tr.deviation - tr.followed;
    report.max_gap = std::max(report.max_gap, tr.gap);
    report.triggers.push_back(std::move(tr));
  }
  if (report.triggers.empty()) report.max_gap = 0.0;
  report.pass = report.max_gap <= tol && report.xi_residual <= tol;
  return report;
}

// ---------------------------------------------------------------------
// Brute-force oracle over plan tuples.
// ---------------------------------------------------------------------

std::vector<double> welfare_leaf_weights(const GameTree& game) {
  std::vector<double> w(game.num_nodes(), 0.0);
  for (int z : game.leaves()) {
    for (double u : game.node(z).payoffs) w[z] += u;
  }
  return w;
}

std::vector<double> direction_leaf_weights(const GameTree& game, double dx,
                                           double dy) {
  std::vector<double> w(game.num_nodes(), 0.0);
  for (int z : game.leaves()) {
    w[z] = dx * game.node(z).payoffs[0] + dy * game.node(z).payoffs[1];
  }
  return w;
}

namespace {

struct OracleTables {
  const GameTree& game;
  SequenceFormIndex index;
  std::vector<PlanSet> plansets;  // per player, 0-based
  std::vector<int> counts;
  std::vector<long> strides;
  long tuples = 0;

  OracleTables(const GameTree& g, long cap) : game(g), index(g) {
    const int n = g.num_players();
    for (int p = 1; p <= n; ++p) {
      plansets.emplace_back(g, index, p, cap);
      counts.push_back(plansets.back().num_plans());
    }
    strides.assign(n, 1);
    tuples = 1;
    for (int p = n - 1; p >= 0; --p) {
      strides[p] = tuples;
      if (tuples > 4'000'000 / std::max(counts[p], 1)) {
        throw std::runtime_error(
            "too large for enumeration: joint plan tuples exceed the oracle "
            "budget");
      }
      tuples *= counts[p];
    }
  }

  bool reaches(int player, int plan, int leaf) const {
    return plansets[player - 1]
        .reaching(index.seq_at_node(leaf, player))
        .test(plan);
  }
};

}  // namespace

OracleResult oracle_optimum(const GameTree& game, Concept kind,
                            const std::vector<double>& leaf_weights,
                            long cap, const LpOptions& options) {
  OracleTables tab(game, cap);
  const int n = game.num_players();
  const long tuples = tab.tuples;

  std::vector<int> digits(n, 0);
  auto for_each_tuple = [&](auto&& body) {
    std::fill(digits.begin(), digits.end(), 0);
    for (long t = 0; t < tuples; ++t) {
      body(t, digits);
      for (int p = n - 1; p >= 0; --p) {
        if (++digits[p] < tab.counts[p]) break;
        digits[p] = 0;
      }
    }
  };

  LinearProgram lp;
  lp.set_objective_sense(ObjectiveSense::Maximize);

  // Objective: expected leaf weight when everyone follows the sampled plans.
  for_each_tuple([&](long t, const std::vector<int>& dig) {
    double val = 0.0;
    for (int z : game.leaves()) {
      if (leaf_weights[z] == 0.0) continue;
      bool all = true;
      for (int p = 1; p <= n && all; ++p) all = tab.reaches(p, dig[p - 1], z);
      if (all) val += leaf_weights[z] * game.chance_reach(z);
    }
    lp.add_variable("mu" + std::to_string(t), 0.0, kInf, val);
  });

  {
    std::vector<LpTerm> terms;
    for (long t = 0; t < tuples; ++t) {
      terms.push_back({static_cast<int>(t), 1.0});
    }
    lp.add_row("mass", RowSense::Equal, 1.0, std::move(terms));
  }

  // One incentive row per trigger and pure deviation plan. Writing the
  // trigger-agent utility minus the followed utility per tuple, the telescoped
  // coefficient is
  //   sum over steerable leaves of u*c*[fires]*[others reach]*[pi-hat reaches]
  //   minus the followed utility over the forfeited leaves.
  for (const Trigger& trigger : triggers_for(game, tab.index, kind)) {
    const int i = trigger.player;
    const PlanSet& own = tab.plansets[i - 1];

    int fire_seq = 0;  // sampled-plan condition for the trigger to fire
    switch (kind) {
      case Concept::NFCCE: fire_seq = 0; break;
      case Concept::EFCCE:
        fire_seq = tab.index.seq_of_infoset(trigger.infoset);
        break;
      case Concept::EFCE: fire_seq = trigger.seq; break;
    }
    const Bitset& fire_mask = own.reaching(fire_seq);

    // Steerable leaves: below the trigger infoset (everything for NFCCE).
    // Forfeited leaves: the followed branch (all steerable for the coarse
    // concepts, the recommended branch only for EFCE).
    std::vector<char> steerable(game.num_nodes(), 0);
    std::vector<char> forfeited(game.num_nodes(), 0);
    for (int z : game.leaves()) {
      int seq = tab.index.seq_at_node(z, i);
      bool below = kind == Concept::NFCCE ||
                   chain_contains_infoset(tab.index, i, seq, trigger.infoset);
      steerable[z] = below;
      if (kind == Concept::EFCE) {
        bool on_branch = false;
        int walk = seq;
        while (walk != 0) {
          if (walk == trigger.seq) {
            on_branch = true;
            break;
          }
          walk = tab.index.seq_of_infoset(tab.index.sequence(i, walk).infoset);
        }
        forfeited[z] = below && on_branch;
      } else {
        forfeited[z] = below;
      }
    }

    const Bitset& deviations =
        kind == Concept::NFCCE
            ? own.reaching(0)
            : own.reaching(tab.index.seq_of_infoset(trigger.infoset));
    std::vector<int> deviation_plans;
    deviations.for_each([&](int p) { deviation_plans.push_back(p); });

    for (int dev_plan : deviation_plans) {
      std::vector<LpTerm> terms;
      for_each_tuple([&](long t, const std::vector<int>& dig) {
        double coef = 0.0;
        for (int z : game.leaves()) {
          double u = game.node(z).payoffs[i - 1];
          if (u == 0.0) continue;
          bool others = true;
          for (int p = 1; p <= n && others; ++p) {
            if (p != i) others = tab.reaches(p, dig[p - 1], z);
          }
          if (!others) continue;
          double uc = u * game.chance_reach(z);
          if (steerable[z] && fire_mask.test(dig[i - 1]) &&
              tab.reaches(i, dev_plan, z)) {
            coef += uc;
          }
          if (forfeited[z] && tab.reaches(i, dig[i - 1], z)) {
            coef -= uc;
          }
        }
        if (coef != 0.0) terms.push_back({static_cast<int>(t), coef});
      });
      lp.add_row("trig_p" + std::to_string(i) + "_I" +
                     std::to_string(trigger.infoset) + "_s" +
                     std::to_string(trigger.seq) + "_d" +
                     std::to_string(dev_plan),
                 RowSense::LessEqual, 0.0, std::move(terms));
    }
  }

  LpSolution sol = solve(lp, options);
  OracleResult result;
  result.status = sol.status;
  result.value = sol.objective;
  result.joint = sol.primal;
  result.plan_counts = tab.counts;
  return result;
}

EquilibriumSolution solve_equilibrium(const CompactSetup& setup, Concept kind,
                                      const std::vector<double>& objective,
                                      std::optional<double> tau,
                                      const LpOptions& options) {
  auto start = std::chrono::steady_clock::now();
  EquilibriumLp elp = build_lp(setup, kind, objective);
  if (tau) {
    add_welfare_floor(elp, welfare_vector(setup.game, setup.subs, setup.pairs),
                      *tau);
  }
  LpSolution sol = solve(elp.lp, options);

  EquilibriumSolution out;
  out.kind = kind;
  out.status = sol.status;
  out.lp_rows = elp.lp.num_rows();
  out.lp_cols = elp.lp.num_variables();
  out.lp_iterations = sol.iterations;
  if (sol.status == LpStatus::Optimal) {
    out.objective = sol.objective;
    out.xi = elp.extract_xi(sol);
    for (int p = 1; p <= setup.game.num_players(); ++p) {
      out.followed_utility.push_back(
          followed_value(setup.game, setup.subs, out.xi, p));
    }
    VerificationReport report = certify(setup, out.xi, kind);
    out.trigger_reports = std::move(report.triggers);
    out.max_gap = report.max_gap;
    out.xi_residual = report.xi_residual;
  }
  auto stop = std::chrono::steady_clock::now();
  out.wall_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  return out;
}

std::vector<RegionSample> sample_payoff_region(const CompactSetup& setup,
                                               Concept kind, int directions,
                                               unsigned long long seed,
                                               const LpOptions& options) {
  if (directions < 1) throw std::invalid_argument("need >= 1 direction");
  // Portable seeded phase in [0, 1).
  unsigned long long state = seed * 6364136223846793005ull + 1442695040888963407ull;
  state ^= state >> 33;
  double phase = static_cast<double>(state >> 11) * 0x1.0p-53;

  std::vector<RegionSample> samples;
  const double two_pi = 6.283185307179586476925286766559;
  for (int k = 0; k < directions; ++k) {
    double angle = two_pi * (k + phase) / directions;
    double dx = std::cos(angle);
    double dy = std::sin(angle);
    std::vector<double> c =
        direction_vector(setup.game, setup.subs, setup.pairs, dx, dy);
    EquilibriumSolution sol =
        solve_equilibrium(setup, kind, c, std::nullopt, options);
    if (sol.status != LpStatus::Optimal) {
      throw std::runtime_error("payoff-region solve ended " +
                               to_string(sol.status));
    }
    samples.push_back({dx, dy, sol.followed_utility[0],
                       sol.followed_utility[1], sol.objective});
  }
  return samples;
}

InclusionResult inclusion_check(const CompactSetup& setup, double tol,
                                const LpOptions& options) {
  std::vector<double> c =
      welfare_vector(setup.game, setup.subs, setup.pairs);
  InclusionResult result;
  auto solve_one = [&](Concept kind) {
    EquilibriumSolution sol =
        solve_equilibrium(setup, kind, c, std::nullopt, options);
    if (sol.status != LpStatus::Optimal) {
      throw std::runtime_error("welfare solve ended " + to_string(sol.status));
    }
    return sol.objective;
  };
  result.sw_nfcce = solve_one(Concept::NFCCE);
  result.sw_efcce = solve_one(Concept::EFCCE);
  result.sw_efce = solve_one(Concept::EFCE);
  result.ordered = result.sw_efce <= result.sw_efcce + tol &&
                   result.sw_efcce <= result.sw_nfcce + tol;
  return result;
}

}  // namespace corrsolve
