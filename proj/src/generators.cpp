#include "corrsolve/generators.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace corrsolve {

namespace {

// Bottom-up tree assembly with infosets keyed by (player, information
// string): nodes sharing a key land in one infoset.
class Builder {
 public:
  int leaf(std::vector<double> payoffs) {
    Node nd;
    nd.id = next_id();
    nd.owner = kNoPlayer;
    nd.payoffs = std::move(payoffs);
    nodes_.push_back(std::move(nd));
    return nodes_.back().id;
  }

  int player_node(int player, const std::string& info_key,
                  std::vector<std::string> actions, std::vector<int> children) {
    Node nd;
    nd.id = next_id();
    nd.owner = player;
    nd.actions = std::move(actions);
    nd.children = std::move(children);
    auto key = std::make_pair(player, info_key);
    auto it = infoset_ids_.find(key);
    if (it == infoset_ids_.end()) {
      InfoSet is;
      is.id = static_cast<int>(infosets_.size());
      is.player = player;
      is.actions = nd.actions;
      infosets_.push_back(std::move(is));
      it = infoset_ids_.emplace(key, infosets_.back().id).first;
    }
    nd.infoset = it->second;
    infosets_[nd.infoset].members.push_back(nd.id);
    nodes_.push_back(std::move(nd));
    return nodes_.back().id;
  }

  int chance_node(std::vector<std::string> actions, std::vector<double> probs,
                  std::vector<int> children) {
    Node nd;
    nd.id = next_id();
    nd.owner = kChancePlayer;
    nd.actions = std::move(actions);
    nd.chance_probs = std::move(probs);
    nd.children = std::move(children);
    nodes_.push_back(std::move(nd));
    return nodes_.back().id;
  }

  GameTree finish(int players, int root) {
    return GameTree(players, std::move(nodes_), std::move(infosets_), root);
  }

 private:
  int next_id() const { return static_cast<int>(nodes_.size()); }

  std::vector<Node> nodes_;
  std::vector<InfoSet> infosets_;
  std::map<std::pair<int, std::string>, int> infoset_ids_;
};

}  // namespace

GameTree gen_m2() {
  Builder b;
  int hh = b.leaf({1.0, 1.0});
  int ht = b.leaf({0.0, 0.0});
  int th = b.leaf({0.0, 0.0});
  int tt = b.leaf({1.0, 1.0});
  int p2h = b.player_node(2, "turn", {"h", "t"}, {hh, ht});
  int p2t = b.player_node(2, "turn", {"h", "t"}, {th, tt});
  int root = b.player_node(1, "root", {"H", "T"}, {p2h, p2t});
  return b.finish(2, root);
}

namespace {

constexpr int kSheriffItemValue = 5;
constexpr int kSheriffPenalty = 1;
constexpr int kSheriffSting = 1;

int sheriff_round(Builder& b, int n_max, int b_max, int rounds, int loaded,
                  int round, const std::string& transcript) {
  // Smuggler proposes a bribe, sheriff answers; only the final answer binds.
  std::vector<std::string> bribe_labels;
  std::vector<int> bribe_children;
  for (int bribe = 0; bribe <= b_max; ++bribe) {
    std::string t_bribe =
        transcript + "b" + std::to_string(bribe);
    std::vector<int> answer_children;
    for (int accept = 1; accept >= 0; --accept) {
      std::string t_full = t_bribe + (accept ? ":acc|" : ":rej|");
      int child;
      if (round == rounds) {
        double smuggler, sheriff;
        if (accept) {
          smuggler = kSheriffItemValue * loaded - bribe;
          sheriff = bribe;
        } else if (loaded > 0) {
          smuggler = -kSheriffPenalty * loaded;
          sheriff = kSheriffPenalty * loaded;
        } else {
          smuggler = kSheriffSting;
          sheriff = -kSheriffSting;
        }
        child = b.leaf({smuggler, sheriff});
      } else {
        child = sheriff_round(b, n_max, b_max, rounds, loaded, round + 1,
                              t_full);
      }
      answer_children.push_back(child);
    }
    // Sheriff sees the public transcript, never the cargo.
    int answer_node = b.player_node(2, t_bribe, {"accept", "reject"},
                                    std::move(answer_children));
    bribe_labels.push_back(std::to_string(bribe));
    bribe_children.push_back(answer_node);
  }
  return b.player_node(1, "n" + std::to_string(loaded) + "|" + transcript,
                       std::move(bribe_labels), std::move(bribe_children));
}

}  // namespace

GameTree gen_sheriff(int n_max, int b_max, int rounds) {
  if (n_max < 1 || b_max < 1 || rounds < 1) {
    throw std::invalid_argument("sheriff parameters must be >= 1");
  }
  Builder b;
  std::vector<std::string> load_labels;
  std::vector<int> load_children;
  for (int loaded = 0; loaded <= n_max; ++loaded) {
    load_labels.push_back(std::to_string(loaded));
    load_children.push_back(sheriff_round(b, n_max, b_max, rounds, loaded,
                                          1, ""));
  }
  int root = b.player_node(1, "load", std::move(load_labels),
                           std::move(load_children));
  return b.finish(2, root);
}

namespace {

int battleship_shot(Builder& b, int cells, int rounds, int place1, int place2,
                    int shot, const std::string& history) {
  if (shot > rounds) return b.leaf({0.0, 0.0});
  int shooter = (shot % 2 == 1) ? 1 : 2;
  int target_ship = shooter == 1 ? place2 : place1;
  int own_ship = shooter == 1 ? place1 : place2;
  std::vector<std::string> labels;
  std::vector<int> children;
  for (int cell = 0; cell < cells; ++cell) {
    labels.push_back("c" + std::to_string(cell));
    if (cell == target_ship) {
      children.push_back(shooter == 1 ? b.leaf({1.0, -2.0})
                                      : b.leaf({-2.0, 1.0}));
    } else {
      children.push_back(battleship_shot(b, cells, rounds, place1, place2,
                                         shot + 1,
                                         history + "c" + std::to_string(cell) +
                                             "|"));
    }
  }
  // A shooter knows their own placement and the public shot record.
  return b.player_node(shooter,
                       "ship" + std::to_string(own_ship) + "|" + history,
                       std::move(labels), std::move(children));
}

}  // namespace

GameTree gen_battleship(int width, int height, int rounds) {
  if (width < 1 || height < 1 || width * height < 2) {
    throw std::invalid_argument("battleship grid too small");
  }
  if (rounds < 1) throw std::invalid_argument("battleship needs >= 1 round");
  int cells = width * height;
  Builder b;
  std::vector<std::string> labels;
  for (int cell = 0; cell < cells; ++cell) {
    labels.push_back("c" + std::to_string(cell));
  }
  std::vector<int> p2_choices;
  for (int place1 = 0; place1 < cells; ++place1) {
    std::vector<int> after_p2;
    for (int place2 = 0; place2 < cells; ++place2) {
      after_p2.push_back(
          battleship_shot(b, cells, rounds, place1, place2, 1, ""));
    }
    p2_choices.push_back(b.player_node(2, "place", labels, std::move(after_p2)));
  }
  int root = b.player_node(1, "place", labels, std::move(p2_choices));
  return b.finish(2, root);
}

namespace {

int goofspiel_p1(Builder& b, int cards, int round, unsigned hand1,
                 unsigned hand2, double score1, double score2,
                 const std::string& history);

int goofspiel_p2(Builder& b, int cards, int round, unsigned hand1,
                 unsigned hand2, double score1, double score2,
                 const std::string& history, int pick1) {
  std::vector<std::string> labels;
  std::vector<int> children;
  double prize = round;
  for (int card = 1; card <= cards; ++card) {
    if (!(hand2 & (1u << card))) continue;
    labels.push_back(std::to_string(card));
    double s1 = score1 + (pick1 > card ? prize : 0.0);
    double s2 = score2 + (card > pick1 ? prize : 0.0);
    std::string next_history = history + std::to_string(pick1) + "v" +
                               std::to_string(card) + "|";
    children.push_back(goofspiel_p1(b, cards, round + 1,
                                    hand1 & ~(1u << pick1),
                                    hand2 & ~(1u << card), s1, s2,
                                    next_history));
  }
  // Simultaneous pick: the second player has seen only past reveals.
  return b.player_node(2, "r" + std::to_string(round) + "|" + history,
                       std::move(labels), std::move(children));
}

int goofspiel_p1(Builder& b, int cards, int round, unsigned hand1,
                 unsigned hand2, double score1, double score2,
                 const std::string& history) {
  if (round > cards) return b.leaf({score1, score2});
  std::vector<std::string> labels;
  std::vector<int> children;
  for (int card = 1; card <= cards; ++card) {
    if (!(hand1 & (1u << card))) continue;
    labels.push_back(std::to_string(card));
    children.push_back(goofspiel_p2(b, cards, round, hand1, hand2, score1,
                                    score2, history, card));
  }
  return b.player_node(1, "r" + std::to_string(round) + "|" + history,
                       std::move(labels), std::move(children));
}

}  // namespace

GameTree gen_goofspiel(int cards) {
  if (cards < 2) throw std::invalid_argument("goofspiel needs >= 2 cards");
  Builder b;
  unsigned full = 0;
  for (int card = 1; card <= cards; ++card) full |= 1u << card;
  int root = goofspiel_p1(b, cards, 1, full, full, 0.0, 0.0, "");
  return b.finish(2, root);
}

GameTree gen_sat_game(const std::vector<Clause>& clauses) {
  if (clauses.empty()) throw std::invalid_argument("empty clause list");
  for (const Clause& clause : clauses) {
    if (clause.empty()) throw std::invalid_argument("empty clause");
  }
  Builder b;
  std::vector<std::string> clause_labels;
  std::vector<int> clause_children;
  for (size_t ci = 0; ci < clauses.size(); ++ci) {
    std::vector<std::string> literal_labels;
    std::vector<int> literal_children;
    for (const Literal& lit : clauses[ci]) {
      std::string var_name = "v" + std::to_string(lit.var);
      std::string lit_name = (lit.negated ? "~" : "") + var_name;
      // Satisfied when the assignment matches the literal's polarity.
      int sat = b.leaf({1.0, 1.0});
      int unsat = b.leaf({0.0, 0.0});
      int child_true = lit.negated ? unsat : sat;
      int child_false = lit.negated ? sat : unsat;
      literal_labels.push_back(lit_name);
      literal_children.push_back(b.player_node(
          2, var_name, {var_name + "=true", var_name + "=false"},
          {child_true, child_false}));
    }
    clause_labels.push_back("clause" + std::to_string(ci));
    clause_children.push_back(
        b.player_node(1, "clause" + std::to_string(ci),
                      std::move(literal_labels), std::move(literal_children)));
  }
  std::vector<double> probs(clauses.size(), 1.0 / clauses.size());
  int root = b.chance_node(std::move(clause_labels), std::move(probs),
                           std::move(clause_children));
  return b.finish(2, root);
}

}  // namespace corrsolve
