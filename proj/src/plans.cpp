#include "corrsolve/plans.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace corrsolve {

int Bitset::count() const {
  int total = 0;
  for (std::uint64_t word : blocks_) total += std::popcount(word);
  return total;
}

namespace {

long saturating_add(long a, long b, long cap) {
  return (a > cap - b) ? cap : a + b;
}

long saturating_mul(long a, long b, long cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap;
  return a * b;
}

}  // namespace

long count_plans(const GameTree& game, const SequenceFormIndex& index,
                 int player, long saturate) {
  auto children = infosets_by_parent_sequence(game, index, player);
  // N(I) = sum over actions of the product of N over child infosets.
  std::vector<long> memo(game.num_infosets(), -1);
  auto count_infoset = [&](auto&& self, int is_id) -> long {
    if (memo[is_id] >= 0) return memo[is_id];
    const InfoSet& is = game.infoset(is_id);
    long total = 0;
    for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
      long prod = 1;
      for (int child : children[index.seq_id(is_id, a)]) {
        prod = saturating_mul(prod, self(self, child), saturate);
      }
      total = saturating_add(total, prod, saturate);
    }
    return memo[is_id] = total;
  };
  long total = 1;
  for (int root : children[0]) {
    total = saturating_mul(total, count_infoset(count_infoset, root), saturate);
  }
  return total;
}

PlanSet::PlanSet(const GameTree& game, const SequenceFormIndex& index,
                 int player, long cap) : player_(player) {
  if (player < 1 || player > game.num_players()) {
    throw std::invalid_argument("unknown player");
  }
  long predicted = count_plans(game, index, player, cap + 1);
  if (predicted > cap) {
    throw std::runtime_error("too large for enumeration: player " +
                             std::to_string(player) + " exceeds " +
                             std::to_string(cap) + " reduced plans");
  }

  const std::vector<int>& own = game.infosets_of(player);
  ordinal_.assign(game.num_infosets(), -1);
  for (size_t k = 0; k < own.size(); ++k) ordinal_[own[k]] = static_cast<int>(k);

  auto children = infosets_by_parent_sequence(game, index, player);

  // Depth-first enumeration over a pending list of reachable infosets.
  std::vector<int> current(own.size(), ReducedPlan::kUnreachable);
  std::vector<int> pending = children[0];
  auto rec = [&](auto&& self, size_t next) -> void {
    if (next == pending.size()) {
      ReducedPlan plan;
      plan.action_at = current;
      plans_.push_back(std::move(plan));
      return;
    }
    int is_id = pending[next];
    const InfoSet& is = game.infoset(is_id);
    for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
      current[ordinal_[is_id]] = a;
      size_t mark = pending.size();
      const std::vector<int>& kids = children[index.seq_id(is_id, a)];
      pending.insert(pending.end(), kids.begin(), kids.end());
      self(self, next + 1);
      pending.resize(mark);
    }
    current[ordinal_[is_id]] = ReducedPlan::kUnreachable;
  };
  rec(rec, 0);

  // Membership mask per sequence: the empty sequence admits every plan, a
  // pair (I, a) admits the plans that choose a at I.
  const int nseq = index.num_sequences(player);
  reaching_.assign(nseq, Bitset(num_plans()));
  for (int p = 0; p < num_plans(); ++p) {
    reaching_[0].set(p);
    const ReducedPlan& plan = plans_[p];
    for (size_t k = 0; k < own.size(); ++k) {
      int a = plan.action_at[k];
      if (a != ReducedPlan::kUnreachable) {
        reaching_[index.seq_id(own[k], a)].set(p);
      }
    }
  }
}

PlanSet enumerate_plans(const GameTree& game, const SequenceFormIndex& index,
                        int player, long cap) {
  return PlanSet(game, index, player, cap);
}

namespace {

void check_distribution(const std::vector<double>& mu, size_t want) {
  if (mu.size() != want) {
    throw std::invalid_argument("distribution has wrong support size");
  }
  double sum = 0.0;
  for (double w : mu) {
    if (w < 0.0) throw std::invalid_argument("distribution has negative mass");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("distribution mass is " + std::to_string(sum) +
                                ", expected 1");
  }
}

}  // namespace

std::vector<double> strategy_from_distribution(const PlanSet& planset,
                                               const std::vector<double>& mu) {
  check_distribution(mu, planset.num_plans());
  std::vector<double> y(planset.num_sequences(), 0.0);
  for (int s = 0; s < planset.num_sequences(); ++s) {
    double total = 0.0;
    planset.reaching(s).for_each([&](int p) { total += mu[p]; });
    y[s] = total;
  }
  return y;
}

std::vector<double> correlation_from_joint(const PlanSet& plans1,
                                           const PlanSet& plans2,
                                           const RelevantPairSet& pairs,
                                           const std::vector<double>& joint) {
  check_distribution(joint,
                     static_cast<size_t>(plans1.num_plans()) *
                         plans2.num_plans());
  const int n2 = plans2.num_plans();
  std::vector<double> xi(pairs.num_pairs(), 0.0);
  for (int k = 0; k < pairs.num_pairs(); ++k) {
    const RelevantPair& pr = pairs.pair(k);
    double total = 0.0;
    plans1.reaching(pr.seq1).for_each([&](int a) {
      plans2.reaching(pr.seq2).for_each([&](int b) {
        total += joint[static_cast<size_t>(a) * n2 + b];
      });
    });
    xi[k] = total;
  }
  return xi;
}

}  // namespace corrsolve
