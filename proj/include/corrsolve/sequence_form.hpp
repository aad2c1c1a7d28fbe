#pragma once

#include <utility>
#include <vector>

#include "corrsolve/game.hpp"

namespace corrsolve {

/// A player's sequence: the empty sequence (infoset == -1) or an
/// (infoset, action) pair. Sequences are referenced by dense per-player
/// indices with the empty sequence at index 0.
struct Sequence {
  int player = 0;
  int infoset = -1;
  int action = -1;
  bool empty() const { return infoset < 0; }
};

struct SparseRow {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

/// Per-player sequence numbering, parent-sequence maps, and the sequence-form
/// constraint rows F y = f (row 0 fixes y(empty) = 1, one mass-conservation
/// row per infoset).
class SequenceFormIndex {
 public:
  explicit SequenceFormIndex(const GameTree& game);

  int num_players() const { return static_cast<int>(seqs_.size()); }
  int num_sequences(int player) const {
    return static_cast<int>(seqs_[player - 1].size());
  }
  const Sequence& sequence(int player, int seq) const {
    return seqs_[player - 1][seq];
  }
  const std::vector<Sequence>& sequences(int player) const {
    return seqs_[player - 1];
  }
  /// Index of the (infoset, action) sequence.
  int seq_id(int infoset, int action) const {
    return infoset_seq_start_[infoset] + action;
  }
  /// sigma_i(v): the player's last sequence strictly above the node.
  int seq_at_node(int node, int player) const {
    return seq_at_node_[node][player - 1];
  }
  /// sigma(I): the parent sequence of an infoset (well-defined under perfect
  /// recall).
  int seq_of_infoset(int infoset) const { return seq_of_infoset_[infoset]; }
  /// Rows of F for a player; entries lie in {-1, 0, 1}, rhs = e_1.
  const std::vector<SparseRow>& constraints(int player) const {
    return rows_[player - 1];
  }
  /// Row position of an infoset's mass-conservation row within its player's
  /// constraint system.
  int row_of_infoset(int infoset) const { return row_of_infoset_[infoset]; }

 private:
  std::vector<std::vector<Sequence>> seqs_;
  std::vector<std::vector<int>> seq_at_node_;
  std::vector<int> seq_of_infoset_;
  std::vector<int> infoset_seq_start_;
  std::vector<int> row_of_infoset_;
  std::vector<std::vector<SparseRow>> rows_;
};

SequenceFormIndex build_sequences(const GameTree& game);

/// A player's infosets grouped by parent-sequence index (index 0 lists the
/// root infosets).
std::vector<std::vector<int>> infosets_by_parent_sequence(
    const GameTree& game, const SequenceFormIndex& index, int player);

/// True when some node of one infoset lies on the root path of a node of the
/// other. Arguments must belong to distinct players.
bool connected(const GameTree& game, int infoset_a, int infoset_b);

/// All-pairs infoset connectivity, computed in one sweep by recording the
/// opposing infosets on each node's root path.
std::vector<std::vector<char>> compute_connectivity(const GameTree& game);

enum class PairKind : unsigned char {
  EmptyEmpty,
  EmptyPair,
  PairEmpty,
  ConnectedPair,
};

struct RelevantPair {
  int seq1 = 0;
  int seq2 = 0;
};

/// The relevant sequence pairs of a two-player game in lexicographic order,
/// with a dense bidirectional index. Pair 0 is (empty, empty).
class RelevantPairSet {
 public:
  RelevantPairSet(const GameTree& game, const SequenceFormIndex& index);

  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  const RelevantPair& pair(int k) const { return pairs_[k]; }
  PairKind kind(int k) const { return kinds_[k]; }
  /// Dense pair index, or -1 when the pair is not relevant.
  int index_of(int seq1, int seq2) const {
    return lookup_[static_cast<size_t>(seq1) * s2_ + seq2];
  }
  long total_pair_count() const { return static_cast<long>(s1_) * s2_; }

 private:
  int s1_ = 0, s2_ = 0;
  std::vector<RelevantPair> pairs_;
  std::vector<PairKind> kinds_;
  std::vector<int> lookup_;
};

RelevantPairSet relevant_pairs(const GameTree& game,
                               const SequenceFormIndex& index);

}  // namespace corrsolve
