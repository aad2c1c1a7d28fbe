#include "corrsolve/correlation.hpp"

#include <cmath>
#include <stdexcept>

namespace corrsolve {

XiConstraintSystem build_xi_constraints(const GameTree& game,
                                        const SequenceFormIndex& index,
                                        const RelevantPairSet& pairs) {
  if (game.num_players() != 2) {
    throw std::invalid_argument(
        "compact xi constraints require exactly two players; use the oracle "
        "path");
  }
  if (game.has_chance_nodes()) {
    throw std::invalid_argument(
        "chance not supported by compact xi constraints; use the oracle path");
  }

  auto conn = compute_connectivity(game);
  XiConstraintSystem sys;
  sys.num_vars = pairs.num_pairs();

  XiRow norm;
  norm.terms.push_back({pairs.index_of(0, 0), 1.0});
  norm.rhs = 1.0;
  norm.tag = "norm";
  sys.rows.push_back(std::move(norm));

  // For a fixed sequence of one player and an opposing infoset J visible
  // from it, the mass on (sigma, parent(J)) splits exactly across J's
  // actions. Visibility means every referenced pair is relevant.
  auto add_family = [&](int fixed_player) {
    const int other = fixed_player == 1 ? 2 : 1;
    for (int s = 0; s < index.num_sequences(fixed_player); ++s) {
      const Sequence& fixed_seq = index.sequence(fixed_player, s);
      for (int j : game.infosets_of(other)) {
        if (!fixed_seq.empty() && !conn[fixed_seq.infoset][j]) continue;
        int parent = index.seq_of_infoset(j);
        auto pair_of = [&](int other_seq) {
          return fixed_player == 1 ? pairs.index_of(s, other_seq)
                                   : pairs.index_of(other_seq, s);
        };
        int parent_coord = pair_of(parent);
        if (parent_coord < 0) continue;
        XiRow row;
        const InfoSet& infoset = game.infoset(j);
        for (int a = 0; a < static_cast<int>(infoset.actions.size()); ++a) {
          int coord = pair_of(index.seq_id(j, a));
          if (coord < 0) {
            throw std::logic_error("relevant pair set is not closed");
          }
          row.terms.push_back({coord, 1.0});
        }
        row.terms.push_back({parent_coord, -1.0});
        row.rhs = 0.0;
        row.tag = "p" + std::to_string(fixed_player) + "s" + std::to_string(s) +
                  "/I" + std::to_string(j);
        sys.rows.push_back(std::move(row));
      }
    }
  };
  add_family(1);
  add_family(2);
  return sys;
}

LeafSubstitutionIndex::LeafSubstitutionIndex(const GameTree& game,
                                             const SequenceFormIndex& index,
                                             const RelevantPairSet& pairs)
    : pairs_(&pairs) {
  leaf_seqs_.assign(game.num_nodes(), {0, 0});
  is_leaf_.assign(game.num_nodes(), 0);
  for (int z : game.leaves()) {
    leaf_seqs_[z] = {index.seq_at_node(z, 1), index.seq_at_node(z, 2)};
    is_leaf_[z] = 1;
  }
}

int LeafSubstitutionIndex::coord(int player, int seq, int leaf) const {
  if (leaf < 0 || leaf >= static_cast<int>(is_leaf_.size()) ||
      !is_leaf_[leaf]) {
    throw std::invalid_argument("unknown leaf " + std::to_string(leaf));
  }
  int s1 = player == 1 ? seq : leaf_seqs_[leaf][0];
  int s2 = player == 1 ? leaf_seqs_[leaf][1] : seq;
  int k = pairs_->index_of(s1, s2);
  if (k < 0) {
    throw std::domain_error("xi substitution (" + std::to_string(s1) + ", " +
                            std::to_string(s2) + ") at leaf " +
                            std::to_string(leaf) +
                            " is not a relevant pair");
  }
  return k;
}

int LeafSubstitutionIndex::leaf_pair(int leaf) const {
  return coord(1, leaf_seqs_[leaf][0], leaf);
}

double xi_leaf(const std::vector<double>& xi,
               const LeafSubstitutionIndex& subs, int player, int seq,
               int leaf) {
  return xi[subs.coord(player, seq, leaf)];
}

MembershipResult check_membership(const std::vector<double>& xi,
                                  const XiConstraintSystem& system) {
  if (static_cast<int>(xi.size()) != system.num_vars) {
    throw std::invalid_argument("xi dimension mismatch");
  }
  MembershipResult result;
  for (size_t r = 0; r < system.rows.size(); ++r) {
    const XiRow& row = system.rows[r];
    double act = 0.0;
    for (auto [coord, coef] : row.terms) act += coef * xi[coord];
    double viol = std::abs(act - row.rhs);
    if (viol > result.max_violation) {
      result.max_violation = viol;
      result.worst_row = static_cast<int>(r);
      result.worst_tag = row.tag;
    }
  }
  for (int k = 0; k < system.num_vars; ++k) {
    if (-xi[k] > result.max_violation) {
      result.max_violation = -xi[k];
      result.worst_row = -1;
      result.worst_tag = "nonneg[" + std::to_string(k) + "]";
    }
  }
  return result;
}

}  // namespace corrsolve
