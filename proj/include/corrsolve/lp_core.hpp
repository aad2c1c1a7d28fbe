#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace corrsolve {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus status);
std::string to_string(RowSense sense);

struct LpTerm {
  int var;
  double coef;
};

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double objective = 0.0;
};

struct LpRow {
  std::string name;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  std::vector<LpTerm> terms;  // sorted by var, duplicates merged
};

/// Sparse linear program over named bounded variables.
///
/// Rows are stored as sparse term lists; duplicate coefficients on the same
/// variable are merged additively when the row is added. Variable bounds may
/// be infinite on either side (free variables allowed).
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper,
                   double objective = 0.0);
  int add_row(std::string name, RowSense sense, double rhs,
              std::vector<LpTerm> terms);

  void set_objective_sense(ObjectiveSense sense) { sense_ = sense; }
  ObjectiveSense objective_sense() const { return sense_; }
  void set_objective(int var, double coef);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const LpVariable& variable(int v) const { return vars_[v]; }
  const LpRow& row(int r) const { return rows_[r]; }
  const std::vector<LpVariable>& variables() const { return vars_; }
  const std::vector<LpRow>& rows() const { return rows_; }

  /// Textual dump: one declaration per line, understood by parse().
  std::string dump() const;
  static LinearProgram parse(const std::string& text);

 private:
  ObjectiveSense sense_ = ObjectiveSense::Maximize;
  std::vector<LpVariable> vars_;
  std::vector<LpRow> rows_;
};

struct LpOptions {
  long iteration_limit = 2'000'000;
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-10;
  int refactor_interval = 120;
  std::string backend;  // empty: CORRSOLVE_LP_BACKEND env var, else "bundled"
};

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> primal;     // per variable
  std::vector<double> row_duals;  // per row, sign convention of a min problem
  double objective = 0.0;
  double feasibility_residual = 0.0;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

/// Solves with the backend chosen by options/environment (default: the
/// bundled simplex). Deterministic for fixed options.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

using LpBackend =
    std::function<LpSolution(const LinearProgram&, const LpOptions&)>;

void register_backend(const std::string& name, LpBackend backend);
std::vector<std::string> backend_names();

/// Feasibility residual of a candidate point: max over rows of the violation
/// and over variables of the bound violation.
double lp_residual(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace corrsolve
