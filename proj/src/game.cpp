#include "corrsolve/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace corrsolve {

namespace {

using nlohmann::json;

[[noreturn]] void vfail(const std::string& msg) {
  throw std::runtime_error("validation error: " + msg);
}

[[noreturn]] void pfail(const std::string& msg) {
  throw std::runtime_error("parse error: " + msg);
}

// Follows chains of single-action internal nodes down to the surviving node.
int resolve_collapsed(const std::vector<Node>& nodes, int id) {
  while (!nodes[id].is_leaf() && nodes[id].actions.size() == 1) {
    id = nodes[id].children[0];
  }
  return id;
}

}  // namespace

GameTree::GameTree(int num_players, std::vector<Node> raw,
                   std::vector<InfoSet> raw_infosets, int root)
    : num_players_(num_players) {
  if (num_players < 2) vfail("at least two players required");
  const int n = static_cast<int>(raw.size());
  if (n == 0) vfail("empty node list");

  // Ids must be dense and unique; store nodes by id.
  std::vector<Node> by_id(n);
  std::vector<char> seen(n, 0);
  for (Node& nd : raw) {
    if (nd.id < 0 || nd.id >= n) vfail("node id out of range");
    if (seen[nd.id]) vfail("duplicate node id " + std::to_string(nd.id));
    seen[nd.id] = 1;
    by_id[nd.id] = std::move(nd);
  }
  if (root < 0 || root >= n) vfail("root id out of range");

  // Per-node shape checks.
  for (Node& nd : by_id) {
    if (nd.is_leaf()) {
      if (nd.payoffs.size() != static_cast<size_t>(num_players)) {
        vfail("leaf node " + std::to_string(nd.id) +
              " needs one payoff per player");
      }
      if (!nd.children.empty() || !nd.chance_probs.empty() || nd.infoset != -1) {
        vfail("leaf node " + std::to_string(nd.id) + " has decision fields");
      }
      nd.owner = kNoPlayer;
      continue;
    }
    if (!nd.payoffs.empty()) {
      vfail("internal node " + std::to_string(nd.id) + " carries payoffs");
    }
    if (nd.children.size() != nd.actions.size()) {
      vfail("node " + std::to_string(nd.id) +
            " has mismatched actions/children");
    }
    if (nd.owner == kChancePlayer) {
      if (nd.chance_probs.size() != nd.actions.size()) {
        vfail("chance node " + std::to_string(nd.id) +
              " needs one probability per action");
      }
      double sum = 0.0;
      for (double p : nd.chance_probs) {
        if (p < 0.0) {
          vfail("chance node " + std::to_string(nd.id) +
                " has a negative probability");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        vfail("chance node " + std::to_string(nd.id) +
              " probabilities sum to " + std::to_string(sum));
      }
      if (nd.infoset != -1) {
        vfail("chance node " + std::to_string(nd.id) + " has an infoset");
      }
    } else {
      if (nd.owner < 1 || nd.owner > num_players) {
        vfail("node " + std::to_string(nd.id) + " has invalid owner");
      }
      if (!nd.chance_probs.empty()) {
        vfail("player node " + std::to_string(nd.id) +
              " has chance probabilities");
      }
      if (nd.infoset < 0 ||
          nd.infoset >= static_cast<int>(raw_infosets.size())) {
        pfail("node " + std::to_string(nd.id) +
              " references unknown infoset id " + std::to_string(nd.infoset));
      }
    }
    for (int c : nd.children) {
      if (c < 0 || c >= n) {
        vfail("node " + std::to_string(nd.id) + " has child id out of range");
      }
    }
  }

  // Infoset consistency on the raw nodes.
  {
    std::vector<int> infoset_of(n, -1);
    for (size_t k = 0; k < raw_infosets.size(); ++k) {
      InfoSet& is = raw_infosets[k];
      if (is.members.empty()) {
        vfail("infoset " + std::to_string(k) + " has no members");
      }
      if (is.player < 1 || is.player > num_players) {
        vfail("infoset " + std::to_string(k) + " has invalid player");
      }
      for (int mb : is.members) {
        if (mb < 0 || mb >= n) {
          vfail("infoset " + std::to_string(k) + " member out of range");
        }
        const Node& nd = by_id[mb];
        if (nd.is_leaf() || nd.owner != is.player) {
          vfail("infoset " + std::to_string(k) +
                " member not an internal node of its player");
        }
        if (nd.actions != is.actions) {
          vfail("infoset " + std::to_string(k) +
                " members disagree on action labels");
        }
        if (infoset_of[mb] != -1) {
          vfail("node " + std::to_string(mb) + " belongs to two infosets");
        }
        infoset_of[mb] = static_cast<int>(k);
        if (nd.infoset != static_cast<int>(k)) {
          vfail("node " + std::to_string(mb) +
                " disagrees with its infoset membership");
        }
      }
    }
    for (const Node& nd : by_id) {
      if (!nd.is_leaf() && nd.owner != kChancePlayer &&
          infoset_of[nd.id] == -1) {
        vfail("internal node " + std::to_string(nd.id) +
              " of player " + std::to_string(nd.owner) + " has no infoset");
      }
    }
  }

  // Reachability: every node visited exactly once from the root.
  {
    std::vector<int> visits(n, 0);
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (++visits[id] > 1) vfail("node " + std::to_string(id) +
                                  " reached more than once (not a tree)");
      for (int c : by_id[id].children) stack.push_back(c);
    }
    for (int id = 0; id < n; ++id) {
      if (visits[id] == 0) {
        vfail("node " + std::to_string(id) + " unreachable from root");
      }
    }
  }

  // Collapse single-action decision nodes, renumber in preorder.
  int new_root = resolve_collapsed(by_id, root);
  std::vector<int> new_id(n, -1);
  std::vector<int> order;
  order.reserve(n);
  {
    std::vector<int> stack{new_root};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      new_id[id] = static_cast<int>(order.size());
      order.push_back(id);
      const Node& nd = by_id[id];
      for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) {
        stack.push_back(resolve_collapsed(by_id, *it));
      }
    }
  }

  // Surviving infosets renumbered by earliest member in preorder.
  std::vector<int> new_infoset_id(raw_infosets.size(), -1);
  int next_infoset = 0;
  {
    std::vector<std::pair<int, int>> first_member;  // (min new id, old id)
    for (size_t k = 0; k < raw_infosets.size(); ++k) {
      if (raw_infosets[k].actions.size() < 2) continue;
      int lo = n;
      for (int mb : raw_infosets[k].members) lo = std::min(lo, new_id[mb]);
      first_member.push_back({lo, static_cast<int>(k)});
    }
    std::sort(first_member.begin(), first_member.end());
    for (const auto& [lo, k] : first_member) new_infoset_id[k] = next_infoset++;
  }

  nodes_.resize(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    Node nd = by_id[order[i]];
    nd.id = static_cast<int>(i);
    for (int& c : nd.children) c = new_id[resolve_collapsed(by_id, c)];
    if (nd.infoset != -1) nd.infoset = new_infoset_id[nd.infoset];
    nodes_[i] = std::move(nd);
  }
  root_ = 0;

  infosets_.resize(next_infoset);
  for (size_t k = 0; k < raw_infosets.size(); ++k) {
    if (new_infoset_id[k] == -1) continue;
    InfoSet is = raw_infosets[k];
    is.id = new_infoset_id[k];
    for (int& mb : is.members) mb = new_id[mb];
    std::sort(is.members.begin(), is.members.end());
    infosets_[is.id] = std::move(is);
  }

  // Derived structures.
  parents_.assign(nodes_.size(), -1);
  chance_reach_.assign(nodes_.size(), 1.0);
  by_player_.assign(num_players_, {});
  for (const Node& nd : nodes_) {
    if (nd.is_leaf()) {
      leaves_.push_back(nd.id);
      continue;
    }
    if (nd.owner == kChancePlayer) has_chance_ = true;
    for (size_t a = 0; a < nd.children.size(); ++a) {
      int c = nd.children[a];
      parents_[c] = nd.id;
      chance_reach_[c] =
          chance_reach_[nd.id] *
          (nd.owner == kChancePlayer ? nd.chance_probs[a] : 1.0);
    }
  }
  for (const InfoSet& is : infosets_) {
    by_player_[is.player - 1].push_back(is.id);
  }
}

PerfectRecallReport validate_perfect_recall(const GameTree& game) {
  // Own-history per node: ordered (infoset, action) pairs of the owner on the
  // root path, computed per player.
  const int n = game.num_nodes();
  PerfectRecallReport report;
  for (int player = 1; player <= game.num_players(); ++player) {
    std::vector<std::vector<std::pair<int, int>>> hist(n);
    std::vector<int> stack{game.root()};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& nd = game.node(id);
      for (size_t a = 0; a < nd.children.size(); ++a) {
        int c = nd.children[a];
        hist[c] = hist[id];
        if (nd.owner == player) {
          hist[c].push_back({nd.infoset, static_cast<int>(a)});
        }
        stack.push_back(c);
      }
    }
    for (int is_id : game.infosets_of(player)) {
      const InfoSet& is = game.infoset(is_id);
      for (size_t k = 1; k < is.members.size(); ++k) {
        if (hist[is.members[k]] != hist[is.members[0]]) {
          report.ok = false;
          report.violations.push_back(
              {is_id, "members " + std::to_string(is.members[0]) + " and " +
                          std::to_string(is.members[k]) +
                          " reach infoset " + std::to_string(is_id) +
                          " with different own histories"});
          break;
        }
      }
    }
  }
  std::sort(report.violations.begin(), report.violations.end(),
            [](const auto& a, const auto& b) { return a.infoset < b.infoset; });
  return report;
}

double leaf_payoff(const GameTree& game, int leaf_id, int player) {
  if (leaf_id < 0 || leaf_id >= game.num_nodes() ||
      !game.node(leaf_id).is_leaf()) {
    throw std::invalid_argument("unknown leaf " + std::to_string(leaf_id));
  }
  if (player < 1 || player > game.num_players()) {
    throw std::invalid_argument("unknown player " + std::to_string(player));
  }
  return game.node(leaf_id).payoffs[player - 1];
}

GameTree load_game(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    pfail(std::string("invalid JSON: ") + e.what());
  }
  try {
    int players = doc.at("players").get<int>();
    int root = doc.at("root").get<int>();
    std::vector<Node> nodes;
    for (const json& jn : doc.at("nodes")) {
      Node nd;
      nd.id = jn.at("id").get<int>();
      nd.owner = jn.at("owner").get<int>();
      if (jn.contains("actions")) {
        nd.actions = jn["actions"].get<std::vector<std::string>>();
      }
      if (jn.contains("children")) {
        nd.children = jn["children"].get<std::vector<int>>();
      }
      if (jn.contains("chance_probs")) {
        nd.chance_probs = jn["chance_probs"].get<std::vector<double>>();
      }
      if (jn.contains("payoffs")) {
        nd.payoffs = jn["payoffs"].get<std::vector<double>>();
      }
      if (jn.contains("infoset")) {
        nd.infoset = jn["infoset"].get<int>();
      }
      nodes.push_back(std::move(nd));
    }
    std::vector<InfoSet> infosets;
    for (const json& ji : doc.at("infosets")) {
      InfoSet is;
      is.id = ji.at("id").get<int>();
      is.player = ji.at("player").get<int>();
      is.members = ji.at("members").get<std::vector<int>>();
      is.actions = ji.at("actions").get<std::vector<std::string>>();
      infosets.push_back(std::move(is));
    }
    // Infoset ids must be dense and in order.
    for (size_t k = 0; k < infosets.size(); ++k) {
      if (infosets[k].id != static_cast<int>(k)) {
        pfail("infoset ids must be dense and ordered");
      }
    }
    return GameTree(players, std::move(nodes), std::move(infosets), root);
  } catch (const json::exception& e) {
    pfail(std::string("missing or mistyped field: ") + e.what());
  }
}

std::string save_game(const GameTree& game) {
  json doc;
  doc["players"] = game.num_players();
  doc["root"] = game.root();
  json nodes = json::array();
  for (const Node& nd : game.nodes()) {
    json jn;
    jn["id"] = nd.id;
    jn["owner"] = nd.owner;
    if (!nd.actions.empty()) jn["actions"] = nd.actions;
    if (!nd.children.empty()) jn["children"] = nd.children;
    if (!nd.chance_probs.empty()) jn["chance_probs"] = nd.chance_probs;
    if (!nd.payoffs.empty()) jn["payoffs"] = nd.payoffs;
    if (nd.infoset != -1) jn["infoset"] = nd.infoset;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  json infosets = json::array();
  for (const InfoSet& is : game.infosets()) {
    json ji;
    ji["id"] = is.id;
    ji["player"] = is.player;
    ji["members"] = is.members;
    ji["actions"] = is.actions;
    infosets.push_back(std::move(ji));
  }
  doc["infosets"] = std::move(infosets);
  return doc.dump(2) + "\n";
}

GameTree load_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_game(buf.str());
}

void save_game_file(const GameTree& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write game file '" + path + "'");
  out << save_game(game);
}

bool structurally_equal(const GameTree& a, const GameTree& b) {
  if (a.num_players() != b.num_players() || a.root() != b.root() ||
      a.num_nodes() != b.num_nodes() || a.num_infosets() != b.num_infosets()) {
    return false;
  }
  for (int i = 0; i < a.num_nodes(); ++i) {
    const Node& x = a.node(i);
    const Node& y = b.node(i);
    if (x.owner != y.owner || x.actions != y.actions ||
        x.children != y.children || x.chance_probs != y.chance_probs ||
        x.payoffs != y.payoffs || x.infoset != y.infoset) {
      return false;
    }
  }
  for (int k = 0; k < a.num_infosets(); ++k) {
    const InfoSet& x = a.infoset(k);
    const InfoSet& y = b.infoset(k);
    if (x.player != y.player || x.members != y.members ||
        x.actions != y.actions) {
      return false;
    }
  }
  return true;
}

}  // namespace corrsolve
