#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrsolve/equilibrium_lp.hpp"
#include "corrsolve/plans.hpp"

namespace corrsolve {

/// Expected payoff of a player when everybody follows the recommendations
/// encoded by xi.
double followed_value(const GameTree& game, const LeafSubstitutionIndex& subs,
                      const std::vector<double>& xi_values, int player);

/// Exact best deviation value of one trigger by bottom-up maximization over
/// the player's infoset forest; no linear program involved.
double best_deviation_value(const GameTree& game,
                            const SequenceFormIndex& index,
                            const LeafSubstitutionIndex& subs,
                            const std::vector<double>& xi_values, Concept kind,
                            const Trigger& trigger);

struct TriggerReport {
  Trigger trigger;
  double followed = 0.0;
  double deviation = 0.0;
  double gap = 0.0;  // deviation - followed
};

struct VerificationReport {
  Concept kind = Concept::NFCCE;
  double tolerance = 1e-6;
  std::vector<TriggerReport> triggers;
  double max_gap = 0.0;
  double xi_residual = 0.0;
  std::string xi_residual_tag;
  bool pass = false;
};

VerificationReport certify(const CompactSetup& setup,
                           const std::vector<double>& xi_values, Concept kind,
                           double tol = 1e-6);

// --- brute-force normal-form oracle -----------------------------------

/// Per-leaf weights defining a linear objective for the oracle.
std::vector<double> welfare_leaf_weights(const GameTree& game);
std::vector<double> direction_leaf_weights(const GameTree& game, double dx,
                                           double dy);

struct OracleResult {
  LpStatus status = LpStatus::IterationLimit;
  double value = 0.0;
  std::vector<double> joint;      // flattened over plan tuples
  std::vector<int> plan_counts;   // per player
};

/// Maximizes the leaf-weight objective over correlated plan distributions
/// subject to one incentive constraint per trigger and pure deviation.
/// Works for any player count and with chance moves; desk scale only.
OracleResult oracle_optimum(const GameTree& game, Concept kind,
                            const std::vector<double>& leaf_weights,
                            long cap = 1'000'000,
                            const LpOptions& options = {});

// --- composition -------------------------------------------------------

struct EquilibriumSolution {
  Concept kind = Concept::NFCCE;
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> xi;
  std::vector<double> followed_utility;  // per player
  std::vector<TriggerReport> trigger_reports;
  double max_gap = 0.0;
  double xi_residual = 0.0;
  int lp_rows = 0;
  int lp_cols = 0;
  long lp_iterations = 0;
  double wall_ms = 0.0;
};

EquilibriumSolution solve_equilibrium(const CompactSetup& setup, Concept kind,
                                      const std::vector<double>& objective,
                                      std::optional<double> tau = std::nullopt,
                                      const LpOptions& options = {});

struct RegionSample {
  double dx = 0.0, dy = 0.0;
  double u1 = 0.0, u2 = 0.0;
  double objective = 0.0;
};

/// Optimizes over evenly spaced payoff-space directions (seeded phase) and
/// records the achieved payoff vector per direction.
std::vector<RegionSample> sample_payoff_region(const CompactSetup& setup,
                                               Concept kind, int directions,
                                               unsigned long long seed = 0,
                                               const LpOptions& options = {});

struct InclusionResult {
  double sw_nfcce = 0.0;
  double sw_efcce = 0.0;
  double sw_efce = 0.0;
  bool ordered = false;  // efce <= efcce <= nfcce within tolerance
};

InclusionResult inclusion_check(const CompactSetup& setup, double tol = 1e-6,
                                const LpOptions& options = {});

}  // namespace corrsolve
