#pragma once

#include <cstdint>
#include <vector>

#include "corrsolve/game.hpp"
#include "corrsolve/sequence_form.hpp"

namespace corrsolve {

class Bitset {
 public:
  explicit Bitset(int bits = 0) : bits_(bits), blocks_((bits + 63) / 64, 0) {}
  void set(int i) { blocks_[i >> 6] |= 1ull << (i & 63); }
  bool test(int i) const { return (blocks_[i >> 6] >> (i & 63)) & 1u; }
  int size() const { return bits_; }
  int count() const;
  template <typename F>
  void for_each(F&& f) const {
    for (size_t blk = 0; blk < blocks_.size(); ++blk) {
      std::uint64_t word = blocks_[blk];
      while (word) {
        int bit = __builtin_ctzll(word);
        f(static_cast<int>(blk * 64 + bit));
        word &= word - 1;
      }
    }
  }

 private:
  int bits_;
  std::vector<std::uint64_t> blocks_;
};

/// One action per own infoset still reachable under the plan's own earlier
/// choices; kUnreachable elsewhere. Indexed by per-player infoset ordinal.
struct ReducedPlan {
  static constexpr int kUnreachable = -1;
  std::vector<int> action_at;
};

/// All reduced plans of one player plus, per sequence, the subset of plans
/// consistent with it (as a bitmask over plan indices).
class PlanSet {
 public:
  PlanSet(const GameTree& game, const SequenceFormIndex& index, int player,
          long cap);

  int player() const { return player_; }
  int num_plans() const { return static_cast<int>(plans_.size()); }
  const std::vector<ReducedPlan>& plans() const { return plans_; }
  const ReducedPlan& plan(int k) const { return plans_[k]; }
  /// Ordinal of an infoset within its player's infoset list.
  int ordinal(int infoset_id) const { return ordinal_.at(infoset_id); }
  int num_sequences() const { return static_cast<int>(reaching_.size()); }
  /// Plans consistent with a sequence of this player.
  const Bitset& reaching(int seq) const { return reaching_[seq]; }

 private:
  int player_;
  std::vector<ReducedPlan> plans_;
  std::vector<int> ordinal_;
  std::vector<Bitset> reaching_;
};

/// Materializes the player's reduced plans; refuses above `cap` plans.
PlanSet enumerate_plans(const GameTree& game, const SequenceFormIndex& index,
                        int player, long cap = 1'000'000);

/// Product-form plan count by recursion over the infoset forest, saturated
/// at `saturate`. Independent of the enumeration path.
long count_plans(const GameTree& game, const SequenceFormIndex& index,
                 int player, long saturate = 1'000'000'000);

/// Sequence-form strategy induced by a distribution over the plan set.
std::vector<double> strategy_from_distribution(const PlanSet& planset,
                                               const std::vector<double>& mu);

/// Correlation plan over relevant pairs induced by a joint distribution on
/// plan pairs (player-1-major layout).
std::vector<double> correlation_from_joint(const PlanSet& plans1,
                                           const PlanSet& plans2,
                                           const RelevantPairSet& pairs,
                                           const std::vector<double>& joint);

}  // namespace corrsolve
