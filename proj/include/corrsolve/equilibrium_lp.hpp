#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "corrsolve/correlation.hpp"
#include "corrsolve/game.hpp"
#include "corrsolve/lp_core.hpp"
#include "corrsolve/sequence_form.hpp"

namespace corrsolve {

enum class Concept { NFCCE, EFCCE, EFCE };

std::string to_string(Concept kind);
Concept concept_from_string(const std::string& name);

/// Deviation trigger: a whole player (NFCCE), an infoset reached before
/// seeing its recommendation (EFCCE), or a recommended sequence (EFCE).
struct Trigger {
  int player = 0;
  int infoset = -1;  // set for EFCCE and EFCE
  int seq = -1;      // set for EFCE
};

std::vector<Trigger> triggers_for(const GameTree& game,
                                  const SequenceFormIndex& index,
                                  Concept kind);

/// One trigger's incentive inequality xi'A y - b'xi <= 0 in sparse form.
/// The deviation side A spans the leaves the trigger agent can still steer
/// (everything below the trigger infoset; the whole game for NFCCE), each
/// anchored at xi[anchor ~ z]; the followed side b spans the leaves the
/// recommendation actually reaches.
struct IncentiveBlock {
  Trigger trigger;
  int anchor_seq = 0;
  int norm_seq = 0;  // deviation strategies fix this sequence's mass to one
  std::vector<std::tuple<int, int, double>> a_terms;  // (xi coord, seq, value)
  std::vector<std::pair<int, double>> b_terms;        // (xi coord, value)
  std::vector<int> deviation_leaves;
  std::vector<int> followed_leaves;
};

IncentiveBlock incentive_block(const GameTree& game,
                               const SequenceFormIndex& index,
                               const LeafSubstitutionIndex& subs, Concept kind,
                               const Trigger& trigger);

/// The followed-side leaf scope and deviation normalization sequence of a
/// trigger: (Z, empty) for NFCCE, (Z_I, parent(I)) for EFCCE, and
/// (Z_sigma, parent(I)) for an EFCE trigger sequence at infoset I.
struct DeviationScope {
  std::vector<int> leaves;
  int norm_seq = 0;
};

DeviationScope deviation_block_scope(const GameTree& game,
                                     const SequenceFormIndex& index,
                                     Concept kind, const Trigger& trigger);

/// Bundles a game with every derived structure the compact LP path needs.
/// Construction fails on chance games and player counts other than two.
struct CompactSetup {
  GameTree game;
  SequenceFormIndex index;
  RelevantPairSet pairs;
  LeafSubstitutionIndex subs;
  XiConstraintSystem xi;

  explicit CompactSetup(GameTree g)
      : game(std::move(g)),
        index(game),
        pairs(game, index),
        subs(game, index, pairs),
        xi(build_xi_constraints(game, index, pairs)) {}
  CompactSetup(const CompactSetup&) = delete;
  CompactSetup& operator=(const CompactSetup&) = delete;
};

/// Social-welfare objective over xi coordinates: the summed payoffs of each
/// leaf land on the leaf's own pair coordinate.
std::vector<double> welfare_vector(const GameTree& game,
                                   const LeafSubstitutionIndex& subs,
                                   const RelevantPairSet& pairs);

/// Payoff-space direction objective dx * u1 + dy * u2.
std::vector<double> direction_vector(const GameTree& game,
                                     const LeafSubstitutionIndex& subs,
                                     const RelevantPairSet& pairs, double dx,
                                     double dy);

struct EquilibriumLp {
  LinearProgram lp;
  Concept kind = Concept::NFCCE;
  int xi_offset = 0;
  int xi_count = 0;
  int u_var = 0;
  struct TriggerVars {
    int v_offset = 0;
    int v_count = 0;
    int w_var = -1;
  };
  std::vector<Trigger> triggers;
  std::vector<TriggerVars> trigger_vars;

  std::vector<double> extract_xi(const LpSolution& sol) const;
};

/// Assembles the full equilibrium LP: the xi polytope rows, one dualized
/// incentive block per trigger, u <= 0, maximizing objective'xi.
EquilibriumLp build_lp(const CompactSetup& setup, Concept kind,
                       const std::vector<double>& objective);

/// Appends the social-welfare floor row c'xi >= tau.
void add_welfare_floor(EquilibriumLp& elp, const std::vector<double>& c,
                       double tau);

/// Deviation-benefit LP for a fixed xi: minimizes the epigraph of the best
/// trigger's deviation benefit; nonpositive optimum certifies equilibrium.
LinearProgram build_deviation_lp(const CompactSetup& setup,
                                 const std::vector<double>& xi_values,
                                 Concept kind);

/// Per-trigger deviation value max_y xi'A y via the dualized block; pairs
/// with the dynamic-programming evaluation in the verifier.
double trigger_deviation_optimum(const CompactSetup& setup,
                                 const std::vector<double>& xi_values,
                                 Concept kind, const Trigger& trigger,
                                 const LpOptions& options = {});

}  // namespace corrsolve
