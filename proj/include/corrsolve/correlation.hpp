#pragma once

#include <array>
#include <string>
#include <vector>

#include "corrsolve/game.hpp"
#include "corrsolve/sequence_form.hpp"

namespace corrsolve {

struct XiRow {
  std::vector<std::pair<int, double>> terms;  // (pair coordinate, coefficient)
  double rhs = 0.0;
  std::string tag;
};

/// Equality description of the correlation-plan polytope over relevant-pair
/// coordinates, plus nonnegativity on every coordinate. Row 0 pins the
/// (empty, empty) coordinate to one; every other row conserves mass when one
/// player's sequence is expanded across an opposing infoset's actions.
struct XiConstraintSystem {
  int num_vars = 0;
  std::vector<XiRow> rows;
};

/// Requires exactly two players and no chance nodes; other games are served
/// by the enumeration oracle only.
XiConstraintSystem build_xi_constraints(const GameTree& game,
                                        const SequenceFormIndex& index,
                                        const RelevantPairSet& pairs);

/// Resolves xi[sigma relative-to z]: the coordinate pairing sigma with the
/// other player's sequence at leaf z. Non-relevant requests throw instead of
/// silently reading zero.
class LeafSubstitutionIndex {
 public:
  LeafSubstitutionIndex(const GameTree& game, const SequenceFormIndex& index,
                        const RelevantPairSet& pairs);

  int coord(int player, int seq, int leaf) const;
  /// Coordinate of the leaf's own pair (sigma_1(z), sigma_2(z)).
  int leaf_pair(int leaf) const;
  int leaf_seq(int leaf, int player) const {
    return leaf_seqs_[leaf][player - 1];
  }

 private:
  const RelevantPairSet* pairs_;
  std::vector<std::array<int, 2>> leaf_seqs_;  // dense by node id
  std::vector<char> is_leaf_;
};

double xi_leaf(const std::vector<double>& xi,
               const LeafSubstitutionIndex& subs, int player, int seq,
               int leaf);

struct MembershipResult {
  double max_violation = 0.0;
  int worst_row = -1;  // -1: a nonnegativity bound
  std::string worst_tag;
};

/// Max violation over equality rows and nonnegativity bounds.
MembershipResult check_membership(const std::vector<double>& xi,
                                  const XiConstraintSystem& system);

}  // namespace corrsolve
