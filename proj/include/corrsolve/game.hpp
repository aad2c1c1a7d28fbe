#pragma once

#include <string>
#include <vector>

namespace corrsolve {

/// Players are numbered 1..N. Owner 0 is the chance player; leaves carry
/// owner -1 (no one moves).
inline constexpr int kChancePlayer = 0;
inline constexpr int kNoPlayer = -1;

struct Node {
  int id = -1;
  int owner = kNoPlayer;
  std::vector<std::string> actions;   // empty at leaves
  std::vector<int> children;          // one per action
  std::vector<double> chance_probs;   // present iff owner == kChancePlayer
  std::vector<double> payoffs;        // present iff leaf, length = players
  int infoset = -1;                   // present iff player-owned internal node

  bool is_leaf() const { return actions.empty(); }
};

struct InfoSet {
  int id = -1;
  int player = kNoPlayer;
  std::vector<int> members;
  std::vector<std::string> actions;
};

/// Finite extensive-form game tree. Immutable after construction; single-
/// action decision nodes are collapsed away and ids renumbered densely.
class GameTree {
 public:
  GameTree(int num_players, std::vector<Node> nodes,
           std::vector<InfoSet> infosets, int root);

  int num_players() const { return num_players_; }
  int root() const { return root_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const Node& node(int id) const { return nodes_.at(id); }
  const InfoSet& infoset(int id) const { return infosets_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<InfoSet>& infosets() const { return infosets_; }
  const std::vector<int>& leaves() const { return leaves_; }
  /// Infoset ids belonging to a player, in id order.
  const std::vector<int>& infosets_of(int player) const {
    return by_player_.at(player - 1);
  }
  int parent_of(int node_id) const { return parents_.at(node_id); }
  bool has_chance_nodes() const { return has_chance_; }
  /// Product of chance probabilities on the root path (1 without chance).
  double chance_reach(int leaf_id) const { return chance_reach_.at(leaf_id); }

 private:
  int num_players_;
  int root_;
  std::vector<Node> nodes_;
  std::vector<InfoSet> infosets_;
  std::vector<int> leaves_;
  std::vector<std::vector<int>> by_player_;
  std::vector<int> parents_;
  std::vector<double> chance_reach_;
  bool has_chance_ = false;
};

struct PerfectRecallViolation {
  int infoset = -1;
  std::string detail;
};

struct PerfectRecallReport {
  bool ok = true;
  std::vector<PerfectRecallViolation> violations;
};

/// Checks that within every infoset all member nodes share the identical
/// ordered history of the owner's (infoset, action) pairs.
PerfectRecallReport validate_perfect_recall(const GameTree& game);

double leaf_payoff(const GameTree& game, int leaf_id, int player);

GameTree load_game(const std::string& text);
std::string save_game(const GameTree& game);
GameTree load_game_file(const std::string& path);
void save_game_file(const GameTree& game, const std::string& path);

/// Structural equality after canonical renumbering (used by round-trip
/// checks).
bool structurally_equal(const GameTree& a, const GameTree& b);

}  // namespace corrsolve
