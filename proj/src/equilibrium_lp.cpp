#include "corrsolve/equilibrium_lp.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace corrsolve {

std::string to_string(Concept kind) {
  switch (kind) {
    case Concept::NFCCE: return "nfcce";
    case Concept::EFCCE: return "efcce";
    case Concept::EFCE: return "efce";
  }
  return "?";
}

Concept concept_from_string(const std::string& name) {
  if (name == "nfcce") return Concept::NFCCE;
  if (name == "efcce") return Concept::EFCCE;
  if (name == "efce") return Concept::EFCE;
  throw std::invalid_argument("unknown concept '" + name + "'");
}

std::vector<Trigger> triggers_for(const GameTree& game,
                                  const SequenceFormIndex& index,
                                  Concept kind) {
  std::vector<Trigger> out;
  for (int player = 1; player <= game.num_players(); ++player) {
    switch (kind) {
      case Concept::NFCCE:
        out.push_back({player, -1, -1});
        break;
      case Concept::EFCCE:
        for (int is_id : game.infosets_of(player)) {
          out.push_back({player, is_id, -1});
        }
        break;
      case Concept::EFCE:
        // No recommendation precedes the empty sequence, so triggers range
        // over the non-empty sequences only.
        for (int is_id : game.infosets_of(player)) {
          const InfoSet& is = game.infoset(is_id);
          for (int a = 0; a < static_cast<int>(is.actions.size()); ++a) {
            out.push_back({player, is_id, index.seq_id(is_id, a)});
          }
        }
        break;
    }
  }
  return out;
}

namespace {

bool chain_contains_infoset(const SequenceFormIndex& index, int player,
                            int seq, int infoset) {
  while (seq != 0) {
    const Sequence& s = index.sequence(player, seq);
    if (s.infoset == infoset) return true;
    seq = index.seq_of_infoset(s.infoset);
  }
  return false;
}

bool chain_contains_seq(const SequenceFormIndex& index, int player, int seq,
                        int target) {
  while (seq != 0) {
    if (seq == target) return true;
    seq = index.seq_of_infoset(index.sequence(player, seq).infoset);
  }
  return false;
}

void check_trigger(const GameTree& game, const SequenceFormIndex& index,
                   Concept kind, const Trigger& t) {
  if (t.player < 1 || t.player > game.num_players()) {
    throw std::invalid_argument("trigger player out of range");
  }
  if (kind == Concept::NFCCE) return;
  if (t.infoset < 0 || t.infoset >= game.num_infosets() ||
      game.infoset(t.infoset).player != t.player) {
    throw std::invalid_argument("trigger infoset not in game");
  }
  if (kind == Concept::EFCE) {
    const Sequence& s = index.sequence(t.player, t.seq);
    if (s.empty() || s.infoset != t.infoset) {
      throw std::invalid_argument("trigger sequence not at its infoset");
    }
  }
}

}  // namespace

DeviationScope deviation_block_scope(const GameTree& game,
                                     const SequenceFormIndex& index,
                                     Concept kind, const Trigger& trigger) {
  check_trigger(game, index, kind, trigger);
  DeviationScope scope;
  switch (kind) {
    case Concept::NFCCE:
      scope.leaves = game.leaves();
      scope.norm_seq = 0;
      break;
    case Concept::EFCCE:
      for (int z : game.leaves()) {
        if (chain_contains_infoset(index, trigger.player,
                                   index.seq_at_node(z, trigger.player),
                                   trigger.infoset)) {
          scope.leaves.push_back(z);
        }
      }
      scope.norm_seq = index.seq_of_infoset(trigger.infoset);
      break;
    case Concept::EFCE:
      for (int z : game.leaves()) {
        if (chain_contains_seq(index, trigger.player,
                               index.seq_at_node(z, trigger.player),
                               trigger.seq)) {
          scope.leaves.push_back(z);
        }
      }
      scope.norm_seq = index.seq_of_infoset(trigger.infoset);
      break;
  }
  return scope;
}

IncentiveBlock incentive_block(const GameTree& game,
                               const SequenceFormIndex& index,
                               const LeafSubstitutionIndex& subs, Concept kind,
                               const Trigger& trigger) {
  check_trigger(game, index, kind, trigger);
  const int player = trigger.player;

  IncentiveBlock block;
  block.trigger = trigger;
  DeviationScope followed = deviation_block_scope(game, index, kind, trigger);
  block.norm_seq = followed.norm_seq;
  block.followed_leaves = followed.leaves;
  switch (kind) {
    case Concept::NFCCE:
      block.anchor_seq = 0;
      block.deviation_leaves = game.leaves();
      break;
    case Concept::EFCCE:
      block.anchor_seq = index.seq_of_infoset(trigger.infoset);
      block.deviation_leaves = followed.leaves;
      break;
    case Concept::EFCE:
      // The triggered agent steers every leaf below the infoset, not only
      // those of the recommended branch; the followed side stays on the
      // recommended branch.
      block.anchor_seq = trigger.seq;
      for (int z : game.leaves()) {
        if (chain_contains_infoset(index, player, index.seq_at_node(z, player),
                                   trigger.infoset)) {
          block.deviation_leaves.push_back(z);
        }
      }
      break;
  }

  std::map<std::pair<int, int>, double> a_accum;
  for (int z : block.deviation_leaves) {
    double u = game.node(z).payoffs[player - 1];
    if (u == 0.0) continue;
    int coord = subs.coord(player, block.anchor_seq, z);
    int col = index.seq_at_node(z, player);
    a_accum[{coord, col}] += u;
  }
  for (const auto& [key, value] : a_accum) {
    if (value != 0.0) block.a_terms.push_back({key.first, key.second, value});
  }

  std::map<int, double> b_accum;
  for (int z : block.followed_leaves) {
    double u = game.node(z).payoffs[player - 1];
    if (u == 0.0) continue;
    b_accum[subs.leaf_pair(z)] += u;
  }
  for (const auto& [coord, value] : b_accum) {
    if (value != 0.0) block.b_terms.push_back({coord, value});
  }
  return block;
}

std::vector<double> welfare_vector(const GameTree& game,
                                   const LeafSubstitutionIndex& subs,
                                   const RelevantPairSet& pairs) {
  std::vector<double> c(pairs.num_pairs(), 0.0);
  for (int z : game.leaves()) {
    double total = 0.0;
    for (double u : game.node(z).payoffs) total += u;
    c[subs.leaf_pair(z)] += total;
  }
  return c;
}

std::vector<double> direction_vector(const GameTree& game,
                                     const LeafSubstitutionIndex& subs,
                                     const RelevantPairSet& pairs, double dx,
                                     double dy) {
  std::vector<double> c(pairs.num_pairs(), 0.0);
  for (int z : game.leaves()) {
    const std::vector<double>& u = game.node(z).payoffs;
    c[subs.leaf_pair(z)] += dx * u[0] + dy * u[1];
  }
  return c;
}

std::vector<double> EquilibriumLp::extract_xi(const LpSolution& sol) const {
  std::vector<double> xi(xi_count);
  for (int k = 0; k < xi_count; ++k) xi[k] = sol.primal[xi_offset + k];
  return xi;
}

EquilibriumLp build_lp(const CompactSetup& setup, Concept kind,
                       const std::vector<double>& objective) {
  const GameTree& game = setup.game;
  const SequenceFormIndex& index = setup.index;
  if (static_cast<int>(objective.size()) != setup.pairs.num_pairs()) {
    throw std::invalid_argument("objective has wrong dimension");
  }

  EquilibriumLp out;
  out.kind = kind;
  LinearProgram& lp = out.lp;
  lp.set_objective_sense(ObjectiveSense::Maximize);

  out.xi_offset = 0;
  out.xi_count = setup.pairs.num_pairs();
  for (int k = 0; k < setup.pairs.num_pairs(); ++k) {
    lp.add_variable("xi" + std::to_string(k), 0.0, kInf, objective[k]);
  }
  out.u_var = lp.add_variable("u", -kInf, 0.0, 0.0);

  out.triggers = triggers_for(game, index, kind);
  std::vector<IncentiveBlock> blocks;
  blocks.reserve(out.triggers.size());
  for (size_t t = 0; t < out.triggers.size(); ++t) {
    const Trigger& trigger = out.triggers[t];
    blocks.push_back(incentive_block(game, index, setup.subs, kind, trigger));
    EquilibriumLp::TriggerVars tv;
    tv.v_count = static_cast<int>(index.constraints(trigger.player).size());
    tv.v_offset = lp.num_variables();
    for (int r = 0; r < tv.v_count; ++r) {
      lp.add_variable("v" + std::to_string(t) + "_" + std::to_string(r), -kInf,
                      kInf, 0.0);
    }
    tv.w_var = -1;
    if (kind != Concept::NFCCE) {
      tv.w_var = lp.add_variable("w" + std::to_string(t), -kInf, kInf, 0.0);
    }
    out.trigger_vars.push_back(tv);
  }

  for (const XiRow& row : setup.xi.rows) {
    std::vector<LpTerm> terms;
    terms.reserve(row.terms.size());
    for (auto [coord, coef] : row.terms) {
      terms.push_back({out.xi_offset + coord, coef});
    }
    lp.add_row("xi/" + row.tag, RowSense::Equal, row.rhs, std::move(terms));
  }

  for (size_t t = 0; t < out.triggers.size(); ++t) {
    const Trigger& trigger = out.triggers[t];
    const IncentiveBlock& block = blocks[t];
    const EquilibriumLp::TriggerVars& tv = out.trigger_vars[t];
    const int player = trigger.player;

    // (a) u - v'f - w + b'xi >= 0, with f = e_1.
    {
      std::vector<LpTerm> terms;
      terms.push_back({out.u_var, 1.0});
      terms.push_back({tv.v_offset, -1.0});
      if (tv.w_var >= 0) terms.push_back({tv.w_var, -1.0});
      for (auto [coord, value] : block.b_terms) {
        terms.push_back({out.xi_offset + coord, value});
      }
      lp.add_row("ic" + std::to_string(t), RowSense::GreaterEqual, 0.0,
                 std::move(terms));
    }

    // (b) F'v + w e_norm - A'xi >= 0, one row per own sequence.
    const std::vector<SparseRow>& frows = index.constraints(player);
    std::vector<std::vector<LpTerm>> per_seq(index.num_sequences(player));
    for (int r = 0; r < static_cast<int>(frows.size()); ++r) {
      for (auto [seq, coef] : frows[r].terms) {
        per_seq[seq].push_back({tv.v_offset + r, coef});
      }
    }
    if (tv.w_var >= 0) per_seq[block.norm_seq].push_back({tv.w_var, 1.0});
    for (const auto& [coord, seq, value] : block.a_terms) {
      per_seq[seq].push_back({out.xi_offset + coord, -value});
    }
    for (int s = 0; s < index.num_sequences(player); ++s) {
      lp.add_row("dev" + std::to_string(t) + "_" + std::to_string(s),
                 RowSense::GreaterEqual, 0.0, std::move(per_seq[s]));
    }
  }
  return out;
}

void add_welfare_floor(EquilibriumLp& elp, const std::vector<double>& c,
                       double tau) {
  std::vector<LpTerm> terms;
  for (size_t k = 0; k < c.size(); ++k) {
    if (c[k] != 0.0) {
      terms.push_back({elp.xi_offset + static_cast<int>(k), c[k]});
    }
  }
  elp.lp.add_row("welfare_floor", RowSense::GreaterEqual, tau,
                 std::move(terms));
}

LinearProgram build_deviation_lp(const CompactSetup& setup,
                                 const std::vector<double>& xi_values,
                                 Concept kind) {
  const GameTree& game = setup.game;
  const SequenceFormIndex& index = setup.index;
  if (static_cast<int>(xi_values.size()) != setup.pairs.num_pairs()) {
    throw std::invalid_argument("xi has wrong dimension");
  }

  LinearProgram lp;
  lp.set_objective_sense(ObjectiveSense::Minimize);
  int u_var = lp.add_variable("u", -kInf, kInf, 1.0);

  std::vector<Trigger> triggers = triggers_for(game, index, kind);
  for (size_t t = 0; t < triggers.size(); ++t) {
    const Trigger& trigger = triggers[t];
    IncentiveBlock block =
        incentive_block(game, index, setup.subs, kind, trigger);
    const std::vector<SparseRow>& frows = index.constraints(trigger.player);
    int v_offset = lp.num_variables();
    for (int r = 0; r < static_cast<int>(frows.size()); ++r) {
      lp.add_variable("v" + std::to_string(t) + "_" + std::to_string(r), -kInf,
                      kInf, 0.0);
    }
    int w_var = kind != Concept::NFCCE
                    ? lp.add_variable("w" + std::to_string(t), -kInf, kInf, 0.0)
                    : -1;

    double followed = 0.0;
    for (auto [coord, value] : block.b_terms) followed += value * xi_values[coord];
    {
      std::vector<LpTerm> terms;
      terms.push_back({u_var, 1.0});
      terms.push_back({v_offset, -1.0});
      if (w_var >= 0) terms.push_back({w_var, -1.0});
      lp.add_row("ic" + std::to_string(t), RowSense::GreaterEqual, -followed,
                 std::move(terms));
    }

    std::vector<double> rhs(index.num_sequences(trigger.player), 0.0);
    for (const auto& [coord, seq, value] : block.a_terms) {
      rhs[seq] += value * xi_values[coord];
    }
    std::vector<std::vector<LpTerm>> per_seq(
        index.num_sequences(trigger.player));
    for (int r = 0; r < static_cast<int>(frows.size()); ++r) {
      for (auto [seq, coef] : frows[r].terms) {
        per_seq[seq].push_back({v_offset + r, coef});
      }
    }
    if (w_var >= 0) per_seq[block.norm_seq].push_back({w_var, 1.0});
    for (int s = 0; s < index.num_sequences(trigger.player); ++s) {
      lp.add_row("dev" + std::to_string(t) + "_" + std::to_string(s),
                 RowSense::GreaterEqual, rhs[s], std::move(per_seq[s]));
    }
  }
  return lp;
}

double trigger_deviation_optimum(const CompactSetup& setup,
                                 const std::vector<double>& xi_values,
                                 Concept kind, const Trigger& trigger,
                                 const LpOptions& options) {
  const SequenceFormIndex& index = setup.index;
  IncentiveBlock block =
      incentive_block(setup.game, index, setup.subs, kind, trigger);
  const std::vector<SparseRow>& frows = index.constraints(trigger.player);

  LinearProgram lp;
  lp.set_objective_sense(ObjectiveSense::Minimize);
  for (int r = 0; r < static_cast<int>(frows.size()); ++r) {
    lp.add_variable("v" + std::to_string(r), -kInf, kInf, r == 0 ? 1.0 : 0.0);
  }
  int w_var = kind != Concept::NFCCE
                  ? lp.add_variable("w", -kInf, kInf, 1.0)
                  : -1;

  std::vector<double> rhs(index.num_sequences(trigger.player), 0.0);
  for (const auto& [coord, seq, value] : block.a_terms) {
    rhs[seq] += value * xi_values[coord];
  }
  std::vector<std::vector<LpTerm>> per_seq(index.num_sequences(trigger.player));
  for (int r = 0; r < static_cast<int>(frows.size()); ++r) {
    for (auto [seq, coef] : frows[r].terms) {
      per_seq[seq].push_back({r, coef});
    }
  }
  if (w_var >= 0) per_seq[block.norm_seq].push_back({w_var, 1.0});
  for (int s = 0; s < index.num_sequences(trigger.player); ++s) {
    lp.add_row("dev_" + std::to_string(s), RowSense::GreaterEqual, rhs[s],
               std::move(per_seq[s]));
  }
  LpSolution sol = solve(lp, options);
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error("trigger deviation LP ended " +
                             to_string(sol.status));
  }
  return sol.objective;
}

}  // namespace corrsolve
