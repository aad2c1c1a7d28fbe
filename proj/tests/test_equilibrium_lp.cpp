#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "corrsolve/equilibrium_lp.hpp"
#include "corrsolve/generators.hpp"
#include "corrsolve/plans.hpp"
#include "corrsolve/verify.hpp"

using namespace corrsolve;

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = ed(rng) + 1e-9;
    sum += v;
  }
  for (double& v : w) v /= sum;
  double s2 = 0.0;
  for (double v : w) s2 += v;
  for (double& v : w) v /= s2;
  return w;
}

std::vector<double> random_xi(std::mt19937_64& rng, const CompactSetup& s,
                              const PlanSet& p1, const PlanSet& p2) {
  return correlation_from_joint(
      p1, p2, s.pairs,
      random_distribution(rng, p1.num_plans() * p2.num_plans()));
}

// Random sequence-form strategy from a random behavioral strategy.
std::vector<double> random_sequence_strategy(std::mt19937_64& rng,
                                             const GameTree& g,
                                             const SequenceFormIndex& idx,
                                             int player) {
  std::uniform_real_distribution<double> ud(0.05, 1.0);
  std::vector<double> y(idx.num_sequences(player), 0.0);
  y[0] = 1.0;
  // Infosets are renumbered topologically (parents before children), so a
  // forward sweep sees parents first.
  for (int is_id : g.infosets_of(player)) {
    const InfoSet& is = g.infoset(is_id);
    double mass = y[idx.seq_of_infoset(is_id)];
    std::vector<double> p(is.actions.size());
    double total = 0.0;
    for (double& v : p) total += (v = ud(rng));
    for (size_t a = 0; a < p.size(); ++a) {
      y[idx.seq_id(is_id, static_cast<int>(a))] = mass * p[a] / total;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("trigger sets by concept") {
  GameTree g = gen_m2();
  SequenceFormIndex idx = build_sequences(g);
  CHECK(triggers_for(g, idx, Concept::NFCCE).size() == 2);
  CHECK(triggers_for(g, idx, Concept::EFCCE).size() == 2);
  CHECK(triggers_for(g, idx, Concept::EFCE).size() == 4);

  GameTree gs = gen_goofspiel(3);
  SequenceFormIndex gidx = build_sequences(gs);
  CHECK(triggers_for(gs, gidx, Concept::EFCCE).size() == 20);
  CHECK(triggers_for(gs, gidx, Concept::EFCE).size() == 42);
}

TEST_CASE("m2 incentive blocks") {
  CompactSetup s(gen_m2());
  Trigger nf{1, -1, -1};
  IncentiveBlock block =
      incentive_block(s.game, s.index, s.subs, Concept::NFCCE, nf);

  // Followed side: the two unit-payoff matching leaves.
  REQUIRE(block.b_terms.size() == 2);
  CHECK(block.b_terms[0].first == s.pairs.index_of(1, 1));
  CHECK(block.b_terms[0].second == 1.0);
  CHECK(block.b_terms[1].first == s.pairs.index_of(2, 2));
  CHECK(block.b_terms[1].second == 1.0);
  CHECK(block.anchor_seq == 0);
  CHECK(block.norm_seq == 0);

  // The root-infoset EFCCE trigger collapses to the same block.
  int root_infoset = s.game.node(s.game.root()).infoset;
  Trigger ef{1, root_infoset, -1};
  IncentiveBlock efcce =
      incentive_block(s.game, s.index, s.subs, Concept::EFCCE, ef);
  CHECK(efcce.a_terms == block.a_terms);
  CHECK(efcce.b_terms == block.b_terms);
  CHECK(efcce.anchor_seq == 0);
  CHECK(efcce.norm_seq == 0);
}

TEST_CASE("efce deviation columns stay below the trigger infoset") {
  CompactSetup s(gen_goofspiel(3));
  for (const Trigger& t : triggers_for(s.game, s.index, Concept::EFCE)) {
    if (s.index.seq_of_infoset(t.infoset) == 0) continue;  // want round two
    IncentiveBlock block =
        incentive_block(s.game, s.index, s.subs, Concept::EFCE, t);
    for (const auto& [coord, seq, value] : block.a_terms) {
      // Column sequence must pass through the trigger infoset.
      int walk = seq;
      bool below = false;
      while (walk != 0) {
        const Sequence& sq = s.index.sequence(t.player, walk);
        if (sq.infoset == t.infoset) {
          below = true;
          break;
        }
        walk = s.index.seq_of_infoset(sq.infoset);
      }
      CHECK(below);
    }
  }
}

TEST_CASE("deviation scopes and the leaf partitions") {
  CompactSetup s(gen_m2());
  Trigger nf{1, -1, -1};
  DeviationScope scope =
      deviation_block_scope(s.game, s.index, Concept::NFCCE, nf);
  CHECK(scope.leaves.size() == 4);
  CHECK(scope.norm_seq == 0);

  int i2 = s.game.node(s.game.node(s.game.root()).children[0]).infoset;
  Trigger t2{2, i2, -1};
  DeviationScope efcce =
      deviation_block_scope(s.game, s.index, Concept::EFCCE, t2);
  CHECK(efcce.leaves.size() == 4);
  CHECK(efcce.norm_seq == 0);

  // {Z_sigma}_{sigma in I} partitions Z_I, and root-infoset scopes
  // partition Z.
  for (GameTree g :
       {gen_goofspiel(3), gen_sheriff(1, 1, 1), gen_battleship(2, 1, 2)}) {
    SequenceFormIndex idx = build_sequences(g);
    for (int player : {1, 2}) {
      std::vector<int> root_cover(g.num_nodes(), 0);
      for (int is_id : g.infosets_of(player)) {
        Trigger ti{player, is_id, -1};
        DeviationScope zi =
            deviation_block_scope(g, idx, Concept::EFCCE, ti);
        std::vector<int> cover(g.num_nodes(), 0);
        const InfoSet& is = g.infoset(is_id);
        for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
          Trigger ts{player, is_id, idx.seq_id(is_id, a)};
          DeviationScope zs =
              deviation_block_scope(g, idx, Concept::EFCE, ts);
          for (int z : zs.leaves) ++cover[z];
        }
        int inside = 0;
        for (int z : zi.leaves) {
          CHECK(cover[z] == 1);
          ++inside;
        }
        int covered = 0;
        for (int z : g.leaves()) covered += cover[z];
        CHECK(covered == inside);
        if (idx.seq_of_infoset(is_id) == 0) {
          for (int z : zi.leaves) ++root_cover[z];
        }
      }
      for (int z : g.leaves()) CHECK(root_cover[z] == 1);
    }
  }
}

TEST_CASE("welfare vector forms") {
  CompactSetup s(gen_m2());
  std::vector<double> c = welfare_vector(s.game, s.subs, s.pairs);
  CHECK(c[s.pairs.index_of(1, 1)] == 2.0);
  CHECK(c[s.pairs.index_of(2, 2)] == 2.0);
  CHECK(c[s.pairs.index_of(1, 2)] == 0.0);

  // c equals the sum of the players' followed-side vectors, exactly on
  // integer payoffs.
  for (GameTree g : {gen_m2(), gen_sheriff(1, 1, 1), gen_goofspiel(3)}) {
    CompactSetup setup(std::move(g));
    std::vector<double> welfare =
        welfare_vector(setup.game, setup.subs, setup.pairs);
    std::vector<double> summed(welfare.size(), 0.0);
    for (int player : {1, 2}) {
      IncentiveBlock block = incentive_block(
          setup.game, setup.index, setup.subs, Concept::NFCCE,
          Trigger{player, -1, -1});
      for (auto [coord, value] : block.b_terms) summed[coord] += value;
    }
    CHECK(welfare == summed);
  }
}

TEST_CASE("uniform-play welfare matches the exact expectation") {
  CompactSetup s(gen_sheriff(1, 1, 1));
  PlanSet p1 = enumerate_plans(s.game, s.index, 1);
  PlanSet p2 = enumerate_plans(s.game, s.index, 2);
  std::vector<double> mu(p1.num_plans() * p2.num_plans(),
                         1.0 / (p1.num_plans() * p2.num_plans()));
  std::vector<double> xi = correlation_from_joint(p1, p2, s.pairs, mu);
  std::vector<double> c = welfare_vector(s.game, s.subs, s.pairs);
  double lp_side = 0.0;
  for (size_t k = 0; k < c.size(); ++k) lp_side += c[k] * xi[k];

  // Independent route: each leaf is reached when both uniform plan draws
  // allow it.
  double direct = 0.0;
  for (int z : s.game.leaves()) {
    double reach1 =
        static_cast<double>(p1.reaching(s.index.seq_at_node(z, 1)).count()) /
        p1.num_plans();
    double reach2 =
        static_cast<double>(p2.reaching(s.index.seq_at_node(z, 2)).count()) /
        p2.num_plans();
    double sw = s.game.node(z).payoffs[0] + s.game.node(z).payoffs[1];
    direct += sw * reach1 * reach2;
  }
  CHECK(lp_side == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("m2 NFCCE LP has 14 variables and 15 rows") {
  CompactSetup s(gen_m2());
  EquilibriumLp elp =
      build_lp(s, Concept::NFCCE, welfare_vector(s.game, s.subs, s.pairs));
  CHECK(elp.lp.num_variables() == 14);  // 9 xi + u + 2x2 duals
  CHECK(elp.lp.num_rows() == 15);       // 7 xi rows + 2x(1+3) trigger rows
}

TEST_CASE("LP sizes grow with the concept on sheriff") {
  CompactSetup s(gen_sheriff(1, 1, 1));
  std::vector<double> c = welfare_vector(s.game, s.subs, s.pairs);
  EquilibriumLp nf = build_lp(s, Concept::NFCCE, c);
  EquilibriumLp ec = build_lp(s, Concept::EFCCE, c);
  EquilibriumLp ee = build_lp(s, Concept::EFCE, c);
  CHECK(nf.lp.num_rows() < ec.lp.num_rows());
  CHECK(ec.lp.num_rows() < ee.lp.num_rows());
  CHECK(nf.lp.num_variables() < ec.lp.num_variables());
  CHECK(ec.lp.num_variables() < ee.lp.num_variables());
}

TEST_CASE("m2 optimum is 2 for every concept") {
  CompactSetup s(gen_m2());
  std::vector<double> c = welfare_vector(s.game, s.subs, s.pairs);
  for (Concept kind : {Concept::NFCCE, Concept::EFCCE, Concept::EFCE}) {
    EquilibriumLp elp = build_lp(s, kind, c);
    LpSolution sol = solve(elp.lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("deviation LP on hand-computed m2 plans") {
  CompactSetup s(gen_m2());
  // Correlated coin: half (H,h), half (T,t).
  std::vector<double> diag(s.pairs.num_pairs(), 0.0);
  diag[s.pairs.index_of(0, 0)] = 1.0;
  diag[s.pairs.index_of(1, 0)] = 0.5;
  diag[s.pairs.index_of(2, 0)] = 0.5;
  diag[s.pairs.index_of(0, 1)] = 0.5;
  diag[s.pairs.index_of(0, 2)] = 0.5;
  diag[s.pairs.index_of(1, 1)] = 0.5;
  diag[s.pairs.index_of(2, 2)] = 0.5;
  REQUIRE(check_membership(diag, s.xi).max_violation <= 1e-12);

  LinearProgram dev = build_deviation_lp(s, diag, Concept::NFCCE);
  LpSolution sol = solve(dev);
  REQUIRE(sol.status == LpStatus::Optimal);
  // Best deviation reaches 0.5 against a followed value of 1.
  CHECK(sol.objective == doctest::Approx(-0.5).epsilon(1e-9));

  // Independent play: uniform product.
  PlanSet p1 = enumerate_plans(s.game, s.index, 1);
  PlanSet p2 = enumerate_plans(s.game, s.index, 2);
  std::vector<double> uniform(4, 0.25);
  std::vector<double> prod = correlation_from_joint(p1, p2, s.pairs, uniform);
  LpSolution sol2 = solve(build_deviation_lp(s, prod, Concept::NFCCE));
  REQUIRE(sol2.status == LpStatus::Optimal);
  CHECK(sol2.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("deviation LP equals the max trigger gap") {
  CompactSetup s(gen_m2());
  std::mt19937_64 rng(5);
  PlanSet p1 = enumerate_plans(s.game, s.index, 1);
  PlanSet p2 = enumerate_plans(s.game, s.index, 2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xi = random_xi(rng, s, p1, p2);
    for (Concept kind : {Concept::NFCCE, Concept::EFCCE, Concept::EFCE}) {
      LpSolution sol = solve(build_deviation_lp(s, xi, kind));
      REQUIRE(sol.status == LpStatus::Optimal);
      double max_gap = -kInf;
      for (const Trigger& t : triggers_for(s.game, s.index, kind)) {
        double dev = best_deviation_value(s.game, s.index, s.subs, xi, kind, t);
        IncentiveBlock block =
            incentive_block(s.game, s.index, s.subs, kind, t);
        double followed = 0.0;
        for (auto [coord, value] : block.b_terms) followed += value * xi[coord];
        max_gap = std::max(max_gap, dev - followed);
      }
      CHECK(sol.objective == doctest::Approx(max_gap).epsilon(1e-9));
    }
  }
}

TEST_CASE("welfare floor feasibility") {
  CompactSetup s(gen_m2());
  std::vector<double> c = welfare_vector(s.game, s.subs, s.pairs);
  EquilibriumSolution base = solve_equilibrium(s, Concept::NFCCE, c);
  REQUIRE(base.status == LpStatus::Optimal);

  EquilibriumSolution at = solve_equilibrium(s, Concept::NFCCE, c,
                                             base.objective - 1e-9);
  CHECK(at.status == LpStatus::Optimal);

  EquilibriumSolution above =
      solve_equilibrium(s, Concept::NFCCE, c, base.objective + 0.1);
  CHECK(above.status == LpStatus::Infeasible);

  EquilibriumSolution no_floor = solve_equilibrium(s, Concept::NFCCE, c);
  CHECK(no_floor.objective == doctest::Approx(base.objective));
}

TEST_CASE("blocks evaluate the leaf sums bilinearly") {
  std::mt19937_64 rng(31337);
  for (GameTree g : {gen_m2(), gen_goofspiel(3), gen_sheriff(1, 1, 1)}) {
    CompactSetup s(std::move(g));
    PlanSet p1 = enumerate_plans(s.game, s.index, 1);
    PlanSet p2 = enumerate_plans(s.game, s.index, 2);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> xi = random_xi(rng, s, p1, p2);
      for (Concept kind : {Concept::NFCCE, Concept::EFCCE, Concept::EFCE}) {
        for (const Trigger& t : triggers_for(s.game, s.index, kind)) {
          std::vector<double> y =
              random_sequence_strategy(rng, s.game, s.index, t.player);
          IncentiveBlock block =
              incentive_block(s.game, s.index, s.subs, kind, t);

          double via_block = 0.0;
          for (const auto& [coord, seq, value] : block.a_terms) {
            via_block += xi[coord] * value * y[seq];
          }
          double direct = 0.0;
          for (int z : block.deviation_leaves) {
            direct += s.game.node(z).payoffs[t.player - 1] *
                      xi[s.subs.coord(t.player, block.anchor_seq, z)] *
                      y[s.index.seq_at_node(z, t.player)];
          }
          CHECK(via_block == doctest::Approx(direct).epsilon(1e-9));

          double b_via = 0.0;
          for (auto [coord, value] : block.b_terms) b_via += value * xi[coord];
          double b_direct = 0.0;
          for (int z : block.followed_leaves) {
            b_direct += s.game.node(z).payoffs[t.player - 1] *
                        xi[s.subs.leaf_pair(z)];
          }
          CHECK(b_via == doctest::Approx(b_direct).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("trigger validation") {
  CompactSetup s(gen_m2());
  CHECK_THROWS_AS(incentive_block(s.game, s.index, s.subs, Concept::EFCCE,
                                  Trigger{1, 99, -1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(incentive_block(s.game, s.index, s.subs, Concept::NFCCE,
                                  Trigger{7, -1, -1}),
                  std::invalid_argument);
}
