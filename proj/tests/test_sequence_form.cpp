#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <vector>

#include "corrsolve/game.hpp"
#include "corrsolve/generators.hpp"
#include "corrsolve/sequence_form.hpp"

using namespace corrsolve;

namespace {

int node_at(const GameTree& g, const std::vector<std::string>& path) {
  int id = g.root();
  for (const std::string& a : path) {
    const Node& nd = g.node(id);
    bool found = false;
    for (size_t k = 0; k < nd.actions.size(); ++k) {
      if (nd.actions[k] == a) {
        id = nd.children[k];
        found = true;
        break;
      }
    }
    REQUIRE(found);
  }
  return id;
}

bool is_ancestor(const GameTree& g, int up, int down) {
  while (down != -1) {
    if (down == up) return true;
    down = g.parent_of(down);
  }
  return false;
}

// Quadratic oracle: two infosets are connected iff some member of one is an
// ancestor of (or equal to) some member of the other.
std::vector<std::vector<char>> connectivity_by_paths(const GameTree& g) {
  int k = g.num_infosets();
  std::vector<std::vector<char>> conn(k, std::vector<char>(k, 0));
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (g.infoset(a).player == g.infoset(b).player) continue;
      for (int u : g.infoset(a).members) {
        for (int v : g.infoset(b).members) {
          if (is_ancestor(g, u, v) || is_ancestor(g, v, u)) {
            conn[a][b] = 1;
          }
        }
      }
    }
  }
  return conn;
}

}  // namespace

TEST_CASE("m2 sequence counts and constraint rows") {
  GameTree g = gen_m2();
  SequenceFormIndex idx = build_sequences(g);
  REQUIRE(idx.num_sequences(1) == 3);
  REQUIRE(idx.num_sequences(2) == 3);
  CHECK(idx.sequence(1, 0).empty());

  const std::vector<SparseRow>& f1 = idx.constraints(1);
  REQUIRE(f1.size() == 2);
  CHECK(f1[0].terms == std::vector<std::pair<int, double>>{{0, 1.0}});
  CHECK(f1[0].rhs == 1.0);
  CHECK(f1[1].terms ==
        std::vector<std::pair<int, double>>{{0, -1.0}, {1, 1.0}, {2, 1.0}});
  CHECK(f1[1].rhs == 0.0);
}

TEST_CASE("goofspiel r=3 has 22 sequences per player") {
  GameTree g = gen_goofspiel(3);
  SequenceFormIndex idx = build_sequences(g);
  CHECK(idx.num_sequences(1) == 22);
  CHECK(idx.num_sequences(2) == 22);
  CHECK(g.infosets_of(1).size() == 10);
  CHECK(g.infosets_of(2).size() == 10);
}

TEST_CASE("parent sequences follow the root path") {
  GameTree g = gen_m2();
  SequenceFormIndex idx = build_sequences(g);
  int hh = node_at(g, {"H", "h"});
  CHECK(idx.seq_at_node(g.root(), 1) == 0);
  CHECK(idx.seq_at_node(hh, 1) == 1);  // (I1, H)
  CHECK(idx.seq_at_node(hh, 2) == 1);  // (I2, h)
  int p2_after_h = node_at(g, {"H"});
  CHECK(idx.seq_at_node(p2_after_h, 2) == 0);
  CHECK(idx.seq_of_infoset(g.node(p2_after_h).infoset) == 0);
}

TEST_CASE("connectivity examples") {
  GameTree m2 = gen_m2();
  int i1 = m2.node(m2.root()).infoset;
  int i2 = m2.node(node_at(m2, {"H"})).infoset;
  CHECK(connected(m2, i1, i2));
  CHECK_THROWS_AS(connected(m2, i1, i1), std::invalid_argument);

  // Distinct public histories never share a path.
  GameTree gs = gen_goofspiel(3);
  int p1_after_12 = gs.node(node_at(gs, {"1", "2"})).infoset;
  int p2_after_13 = gs.node(node_at(gs, {"1", "3", "2"})).infoset;
  CHECK(gs.infoset(p1_after_12).player == 1);
  CHECK(gs.infoset(p2_after_13).player == 2);
  CHECK_FALSE(connected(gs, p1_after_12, p2_after_13));

  // Player 1 places at the root, so every player-2 infoset is connected
  // to it.
  GameTree bs = gen_battleship(2, 1, 2);
  int root_infoset = bs.node(bs.root()).infoset;
  for (int is_id : bs.infosets_of(2)) {
    CHECK(connected(bs, root_infoset, is_id));
  }
}

TEST_CASE("ancestor-scan connectivity matches the path oracle") {
  for (const GameTree& g :
       {gen_m2(), gen_goofspiel(3), gen_sheriff(1, 1, 1),
        gen_sheriff(2, 1, 1), gen_battleship(2, 1, 2),
        gen_battleship(2, 2, 1)}) {
    REQUIRE(g.num_nodes() <= 500);
    auto fast = compute_connectivity(g);
    auto slow = connectivity_by_paths(g);
    CHECK(fast == slow);
  }
}

TEST_CASE("m2 relevant pairs") {
  GameTree g = gen_m2();
  SequenceFormIndex idx = build_sequences(g);
  RelevantPairSet pairs = relevant_pairs(g, idx);
  CHECK(pairs.num_pairs() == 9);  // single connected infoset pair
  CHECK(pairs.pair(0).seq1 == 0);
  CHECK(pairs.pair(0).seq2 == 0);
  CHECK(pairs.kind(0) == PairKind::EmptyEmpty);
  CHECK(pairs.index_of(0, 0) == 0);
  CHECK(pairs.total_pair_count() == 9);
}

TEST_CASE("non-connected infosets shrink the pair set") {
  GameTree gs = gen_goofspiel(3);
  SequenceFormIndex idx = build_sequences(gs);
  RelevantPairSet pairs = relevant_pairs(gs, idx);
  CHECK(pairs.num_pairs() < pairs.total_pair_count());

  // Brute-force recount straight from the definition, using the quadratic
  // connectivity oracle.
  auto conn = connectivity_by_paths(gs);
  int count = 0;
  for (int a = 0; a < idx.num_sequences(1); ++a) {
    for (int b = 0; b < idx.num_sequences(2); ++b) {
      const Sequence& sa = idx.sequence(1, a);
      const Sequence& sb = idx.sequence(2, b);
      if (sa.empty() || sb.empty() || conn[sa.infoset][sb.infoset]) ++count;
    }
  }
  CHECK(pairs.num_pairs() == count);
}

TEST_CASE("relevance is symmetric under player swap") {
  GameTree g = gen_sheriff(1, 1, 1);
  auto conn = compute_connectivity(g);
  for (size_t a = 0; a < conn.size(); ++a) {
    for (size_t b = 0; b < conn.size(); ++b) {
      CHECK(conn[a][b] == conn[b][a]);
    }
  }
}

TEST_CASE("relevant pairs reject games with more than two players") {
  std::vector<Node> nodes(7);
  nodes[0] = {0, 1, {"a", "b"}, {1, 2}, {}, {}, 0};
  nodes[1] = {1, 2, {"c", "d"}, {3, 4}, {}, {}, 1};
  nodes[2] = {2, 3, {"e", "f"}, {5, 6}, {}, {}, 2};
  for (int i = 3; i < 7; ++i) {
    nodes[i] = {i, kNoPlayer, {}, {}, {}, {0.0, 0.0, 0.0}, -1};
  }
  std::vector<InfoSet> infosets = {
      {0, 1, {0}, {"a", "b"}},
      {1, 2, {1}, {"c", "d"}},
      {2, 3, {2}, {"e", "f"}},
  };
  GameTree g(3, nodes, infosets, 0);
  SequenceFormIndex idx = build_sequences(g);
  CHECK(idx.num_sequences(3) == 3);
  CHECK_THROWS_AS(relevant_pairs(g, idx), std::invalid_argument);
}

TEST_CASE("building sequences on imperfect recall fails") {
  std::vector<Node> nodes(7);
  nodes[0] = {0, 1, {"a", "b"}, {1, 2}, {}, {}, 0};
  nodes[1] = {1, 1, {"l", "r"}, {3, 4}, {}, {}, 1};
  nodes[2] = {2, 1, {"l", "r"}, {5, 6}, {}, {}, 1};
  for (int i = 3; i < 7; ++i) {
    nodes[i] = {i, kNoPlayer, {}, {}, {}, {0.0, 0.0}, -1};
  }
  std::vector<InfoSet> infosets = {
      {0, 1, {0}, {"a", "b"}},
      {1, 1, {1, 2}, {"l", "r"}},
  };
  GameTree g(2, nodes, infosets, 0);
  CHECK_THROWS_WITH_AS(build_sequences(g),
                       doctest::Contains("perfect recall"),
                       std::runtime_error);
}
