#include "corrsolve/sequence_form.hpp"

#include <stdexcept>
#include <string>

namespace corrsolve {

SequenceFormIndex::SequenceFormIndex(const GameTree& game) {
  const int players = game.num_players();
  const int n = game.num_nodes();

  {
    PerfectRecallReport recall = validate_perfect_recall(game);
    if (!recall.ok) {
      throw std::runtime_error(
          "perfect recall violated at infoset " +
          std::to_string(recall.violations.front().infoset) +
          "; sequences are ill-defined");
    }
  }

  seqs_.resize(players);
  infoset_seq_start_.assign(game.num_infosets(), -1);
  row_of_infoset_.assign(game.num_infosets(), -1);
  for (int p = 1; p <= players; ++p) {
    std::vector<Sequence>& list = seqs_[p - 1];
    list.push_back({p, -1, -1});
    for (int is_id : game.infosets_of(p)) {
      const InfoSet& is = game.infoset(is_id);
      infoset_seq_start_[is_id] = static_cast<int>(list.size());
      for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
        list.push_back({p, is_id, a});
      }
    }
  }

  // sigma_i(v) for every node and player by one root-down sweep.
  seq_at_node_.assign(n, std::vector<int>(players, 0));
  {
    std::vector<int> stack{game.root()};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& nd = game.node(id);
      for (size_t a = 0; a < nd.children.size(); ++a) {
        int c = nd.children[a];
        seq_at_node_[c] = seq_at_node_[id];
        if (nd.owner != kChancePlayer) {
          seq_at_node_[c][nd.owner - 1] =
              seq_id(nd.infoset, static_cast<int>(a));
        }
        stack.push_back(c);
      }
    }
  }

  seq_of_infoset_.assign(game.num_infosets(), 0);
  for (const InfoSet& is : game.infosets()) {
    int expected = seq_at_node_[is.members[0]][is.player - 1];
    for (int mb : is.members) {
      if (seq_at_node_[mb][is.player - 1] != expected) {
        throw std::runtime_error("perfect recall violated: infoset " +
                                 std::to_string(is.id) +
                                 " has an ambiguous parent sequence");
      }
    }
    seq_of_infoset_[is.id] = expected;
  }

  rows_.resize(players);
  for (int p = 1; p <= players; ++p) {
    std::vector<SparseRow>& rows = rows_[p - 1];
    rows.push_back({{{0, 1.0}}, 1.0});
    for (int is_id : game.infosets_of(p)) {
      const InfoSet& is = game.infoset(is_id);
      SparseRow row;
      row.rhs = 0.0;
      row.terms.push_back({seq_of_infoset_[is_id], -1.0});
      for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
        row.terms.push_back({seq_id(is_id, a), 1.0});
      }
      row_of_infoset_[is_id] = static_cast<int>(rows.size());
      rows.push_back(std::move(row));
    }
  }
}

SequenceFormIndex build_sequences(const GameTree& game) {
  return SequenceFormIndex(game);
}

std::vector<std::vector<int>> infosets_by_parent_sequence(
    const GameTree& game, const SequenceFormIndex& index, int player) {
  std::vector<std::vector<int>> by_seq(index.num_sequences(player));
  for (int is_id : game.infosets_of(player)) {
    by_seq[index.seq_of_infoset(is_id)].push_back(is_id);
  }
  return by_seq;
}

std::vector<std::vector<char>> compute_connectivity(const GameTree& game) {
  const int k = game.num_infosets();
  std::vector<std::vector<char>> conn(k, std::vector<char>(k, 0));
  // DFS carrying the infosets seen on the current root path.
  std::vector<int> path;
  struct Frame {
    int node;
    size_t child = 0;
    bool pushed = false;
  };
  std::vector<Frame> stack{{game.root()}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const Node& nd = game.node(f.node);
    if (!f.pushed) {
      f.pushed = true;
      if (!nd.is_leaf() && nd.owner != kChancePlayer) {
        for (int above : path) {
          if (game.infoset(above).player != nd.owner) {
            conn[above][nd.infoset] = 1;
            conn[nd.infoset][above] = 1;
          }
        }
        path.push_back(nd.infoset);
      }
    }
    if (f.child < nd.children.size()) {
      int c = nd.children[f.child++];
      stack.push_back({c});
      continue;
    }
    if (!nd.is_leaf() && nd.owner != kChancePlayer) path.pop_back();
    stack.pop_back();
  }
  return conn;
}

bool connected(const GameTree& game, int infoset_a, int infoset_b) {
  const InfoSet& a = game.infoset(infoset_a);
  const InfoSet& b = game.infoset(infoset_b);
  if (a.player == b.player) {
    throw std::invalid_argument(
        "connectivity is defined between infosets of distinct players");
  }
  auto conn = compute_connectivity(game);
  return conn[infoset_a][infoset_b] != 0;
}

RelevantPairSet::RelevantPairSet(const GameTree& game,
                                 const SequenceFormIndex& index) {
  if (game.num_players() != 2) {
    throw std::invalid_argument("relevant pairs require exactly two players");
  }
  s1_ = index.num_sequences(1);
  s2_ = index.num_sequences(2);
  auto conn = compute_connectivity(game);
  lookup_.assign(static_cast<size_t>(s1_) * s2_, -1);
  for (int a = 0; a < s1_; ++a) {
    const Sequence& sa = index.sequence(1, a);
    for (int b = 0; b < s2_; ++b) {
      const Sequence& sb = index.sequence(2, b);
      PairKind kind;
      if (sa.empty() && sb.empty()) {
        kind = PairKind::EmptyEmpty;
      } else if (sa.empty()) {
        kind = PairKind::EmptyPair;
      } else if (sb.empty()) {
        kind = PairKind::PairEmpty;
      } else if (conn[sa.infoset][sb.infoset]) {
        kind = PairKind::ConnectedPair;
      } else {
        continue;
      }
      lookup_[static_cast<size_t>(a) * s2_ + b] =
          static_cast<int>(pairs_.size());
      pairs_.push_back({a, b});
      kinds_.push_back(kind);
    }
  }
}

RelevantPairSet relevant_pairs(const GameTree& game,
                               const SequenceFormIndex& index) {
  return RelevantPairSet(game, index);
}

}  // namespace corrsolve
