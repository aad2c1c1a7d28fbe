#include "corrsolve/lp_core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace corrsolve {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

std::string to_string(RowSense sense) {
  switch (sense) {
    case RowSense::LessEqual: return "le";
    case RowSense::Equal: return "eq";
    case RowSense::GreaterEqual: return "ge";
  }
  return "?";
}

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                double objective) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw std::invalid_argument("variable '" + name + "' has invalid bounds");
  }
  vars_.push_back({std::move(name), lower, upper, objective});
  return static_cast<int>(vars_.size()) - 1;
}

void LinearProgram::set_objective(int var, double coef) {
  vars_.at(var).objective = coef;
}

int LinearProgram::add_row(std::string name, RowSense sense, double rhs,
                           std::vector<LpTerm> terms) {
  if (!std::isfinite(rhs)) {
    throw std::invalid_argument("row '" + name + "' has non-finite rhs");
  }
  for (const LpTerm& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw std::invalid_argument("row '" + name +
                                  "' references undeclared variable");
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const LpTerm& a, const LpTerm& b) { return a.var < b.var; });
  std::vector<LpTerm> merged;
  merged.reserve(terms.size());
  for (const LpTerm& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const LpTerm& t) { return t.coef == 0.0; });
  rows_.push_back({std::move(name), sense, rhs, std::move(merged)});
  return static_cast<int>(rows_.size()) - 1;
}

namespace {

void emit_number(std::ostream& os, double v) {
  if (v == kInf) {
    os << "inf";
  } else if (v == -kInf) {
    os << "-inf";
  } else {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  }
}

double parse_number(const std::string& tok) {
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  return std::stod(tok);
}

std::string sanitize(const std::string& name) {
  std::string out = name.empty() ? std::string("_") : name;
  for (char& c : out) {
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  }
  return out;
}

}  // namespace

std::string LinearProgram::dump() const {
  std::ostringstream os;
  os << "lp 1\n";
  os << "sense " << (sense_ == ObjectiveSense::Maximize ? "max" : "min")
     << "\n";
  os << "vars " << vars_.size() << "\n";
  for (const LpVariable& v : vars_) {
    os << "var " << sanitize(v.name) << " ";
    emit_number(os, v.lower);
    os << " ";
    emit_number(os, v.upper);
    os << " ";
    emit_number(os, v.objective);
    os << "\n";
  }
  os << "rows " << rows_.size() << "\n";
  for (const LpRow& r : rows_) {
    os << "row " << sanitize(r.name) << " " << to_string(r.sense) << " ";
    emit_number(os, r.rhs);
    os << " " << r.terms.size();
    for (const LpTerm& t : r.terms) {
      os << " " << t.var << " ";
      emit_number(os, t.coef);
    }
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

LinearProgram LinearProgram::parse(const std::string& text) {
  std::istringstream is(text);
  auto next = [&is]() {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("lp parse error: truncated");
    return tok;
  };
  auto expect = [&next](const std::string& kw) {
    std::string tok = next();
    if (tok != kw) {
      throw std::runtime_error("lp parse error: expected '" + kw + "', got '" +
                               tok + "'");
    }
  };

  LinearProgram lp;
  expect("lp");
  if (next() != "1") throw std::runtime_error("lp parse error: bad version");
  expect("sense");
  std::string sense = next();
  if (sense == "max") {
    lp.set_objective_sense(ObjectiveSense::Maximize);
  } else if (sense == "min") {
    lp.set_objective_sense(ObjectiveSense::Minimize);
  } else {
    throw std::runtime_error("lp parse error: bad sense '" + sense + "'");
  }
  expect("vars");
  int nvars = std::stoi(next());
  for (int i = 0; i < nvars; ++i) {
    expect("var");
    std::string name = next();
    double lo = parse_number(next());
    double up = parse_number(next());
    double obj = parse_number(next());
    lp.add_variable(std::move(name), lo, up, obj);
  }
  expect("rows");
  int nrows = std::stoi(next());
  for (int i = 0; i < nrows; ++i) {
    expect("row");
    std::string name = next();
    std::string sn = next();
    RowSense rs;
    if (sn == "le") {
      rs = RowSense::LessEqual;
    } else if (sn == "eq") {
      rs = RowSense::Equal;
    } else if (sn == "ge") {
      rs = RowSense::GreaterEqual;
    } else {
      throw std::runtime_error("lp parse error: bad row sense '" + sn + "'");
    }
    double rhs = parse_number(next());
    int nnz = std::stoi(next());
    std::vector<LpTerm> terms;
    terms.reserve(nnz);
    for (int k = 0; k < nnz; ++k) {
      int var = std::stoi(next());
      double coef = parse_number(next());
      terms.push_back({var, coef});
    }
    lp.add_row(std::move(name), rs, rhs, std::move(terms));
  }
  expect("end");
  return lp;
}

double lp_residual(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (int v = 0; v < lp.num_variables(); ++v) {
    const LpVariable& var = lp.variable(v);
    worst = std::max(worst, var.lower - x[v]);
    worst = std::max(worst, x[v] - var.upper);
  }
  for (const LpRow& row : lp.rows()) {
    double act = 0.0;
    for (const LpTerm& t : row.terms) act += t.coef * x[t.var];
    switch (row.sense) {
      case RowSense::LessEqual:
        worst = std::max(worst, act - row.rhs);
        break;
      case RowSense::Equal:
        worst = std::max(worst, std::abs(act - row.rhs));
        break;
      case RowSense::GreaterEqual:
        worst = std::max(worst, row.rhs - act);
        break;
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Bundled solver: bounded-variable revised simplex with a product-form
// inverse. Devex pricing with incrementally maintained reduced costs keeps
// the iteration count down on the highly degenerate game LPs this project
// produces; phase 1 minimizes total infeasibility with a long-step ratio test
// that walks through breakpoints while the slope stays negative. Reinversion
// orders basis columns greedily by remaining nonzeros (the matrices are
// near-triangular, so fill stays tiny). Cycling is broken by falling back to
// Bland's rule with short steps after a degenerate streak.
// ---------------------------------------------------------------------------

namespace {

enum class VStat : unsigned char { Basic, AtLower, AtUpper, FreeNb };

struct Eta {
  int pos;
  std::vector<std::pair<int, double>> terms;  // includes the pivot position
};

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    build();
  }

  LpSolution run() {
    reinvert();
    compute_basics();

    Outcome out = phase1();
    if (out == Outcome::IterLimit) return finish(LpStatus::IterationLimit);
    if (out == Outcome::Infeasible) return finish(LpStatus::Infeasible);

    out = phase2();
    if (out == Outcome::IterLimit) return finish(LpStatus::IterationLimit);
    if (out == Outcome::Unbounded) return finish(LpStatus::Unbounded);
    return finish(LpStatus::Optimal);
  }

 private:
  enum class Outcome { Progress, Done, Infeasible, Unbounded, IterLimit, NumericRetry };

  const LinearProgram& lp_;
  const LpOptions& opt_;

  int m_ = 0;      // rows
  int n_ = 0;      // structural columns
  int ncols_ = 0;  // n_ + m_
  double feps_ = 1e-9;

  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, up_, cost_, b_;
  std::vector<VStat> vstat_;
  std::vector<double> xn_;      // nonbasic values per column
  std::vector<int> basis_col_;  // basis position -> column
  std::vector<int> pos_of_;     // column -> basis position or -1
  std::vector<double> xb_;      // basic values per position
  std::vector<Eta> etas_;
  long iters_ = 0;
  int degen_streak_ = 0;
  bool bland_ = false;

  std::vector<double> d_;      // maintained phase-2 reduced costs
  std::vector<double> devex_;  // devex reference weights
  std::vector<char> banned_;   // columns sidelined after numeric hiccups
  std::vector<double> work_, dual_, rho_;

  void build() {
    m_ = lp_.num_rows();
    n_ = lp_.num_variables();
    ncols_ = n_ + m_;
    cols_.assign(ncols_, {});
    lo_.resize(ncols_);
    up_.resize(ncols_);
    cost_.assign(ncols_, 0.0);
    b_.resize(m_);

    const bool maximize = lp_.objective_sense() == ObjectiveSense::Maximize;
    for (int v = 0; v < n_; ++v) {
      const LpVariable& var = lp_.variable(v);
      lo_[v] = var.lower;
      up_[v] = var.upper;
      cost_[v] = maximize ? -var.objective : var.objective;
    }
    double bmax = 0.0;
    for (int r = 0; r < m_; ++r) {
      const LpRow& row = lp_.row(r);
      b_[r] = row.rhs;
      bmax = std::max(bmax, std::abs(row.rhs));
      for (const LpTerm& t : row.terms) cols_[t.var].push_back({r, t.coef});
      int s = n_ + r;
      cols_[s].push_back({r, 1.0});
      switch (row.sense) {
        case RowSense::LessEqual:
          lo_[s] = 0.0;
          up_[s] = kInf;
          break;
        case RowSense::Equal:
          lo_[s] = 0.0;
          up_[s] = 0.0;
          break;
        case RowSense::GreaterEqual:
          lo_[s] = -kInf;
          up_[s] = 0.0;
          break;
      }
    }
    feps_ = opt_.feas_tol * (1.0 + bmax);

    vstat_.assign(ncols_, VStat::AtLower);
    xn_.assign(ncols_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        vstat_[j] = VStat::AtLower;
        xn_[j] = lo_[j];
      } else if (std::isfinite(up_[j])) {
        vstat_[j] = VStat::AtUpper;
        xn_[j] = up_[j];
      } else {
        vstat_[j] = VStat::FreeNb;
        xn_[j] = 0.0;
      }
    }
    basis_col_.resize(m_);
    pos_of_.assign(ncols_, -1);
    for (int r = 0; r < m_; ++r) {
      basis_col_[r] = n_ + r;
      vstat_[n_ + r] = VStat::Basic;
      pos_of_[n_ + r] = r;
    }
    xb_.assign(m_, 0.0);
    d_.assign(ncols_, 0.0);
    devex_.assign(ncols_, 1.0);
    banned_.assign(ncols_, 0);
    work_.assign(m_, 0.0);
    dual_.assign(m_, 0.0);
    rho_.assign(m_, 0.0);
  }

  void ftran(std::vector<double>& v) const {
    for (const Eta& e : etas_) {
      double t = v[e.pos];
      if (t == 0.0) continue;
      for (const auto& [i, val] : e.terms) {
        if (i == e.pos) {
          v[i] = val * t;
        } else {
          v[i] += val * t;
        }
      }
    }
  }

  void btran(std::vector<double>& w) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double t = 0.0;
      for (const auto& [i, val] : it->terms) t += val * w[i];
      w[it->pos] = t;
    }
  }

  void append_eta(int pos, const std::vector<double>& alpha) {
    Eta e;
    e.pos = pos;
    double piv = alpha[pos];
    e.terms.reserve(16);
    for (int i = 0; i < m_; ++i) {
      if (i == pos) {
        e.terms.push_back({i, 1.0 / piv});
      } else if (alpha[i] != 0.0) {
        e.terms.push_back({i, -alpha[i] / piv});
      }
    }
    etas_.push_back(std::move(e));
  }

  VStat nearest_bound_status(int col) const {
    if (std::isfinite(lo_[col])) return VStat::AtLower;
    if (std::isfinite(up_[col])) return VStat::AtUpper;
    return VStat::FreeNb;
  }

  double nonbasic_value(int col) const {
    switch (vstat_[col]) {
      case VStat::AtLower: return lo_[col];
      case VStat::AtUpper: return up_[col];
      default: return 0.0;
    }
  }

  // Rebuilds the eta file for the current basis by Gauss-Jordan elimination,
  // processing columns in a fewest-remaining-nonzeros order via bucket
  // queues. Dependent basis columns are swapped for the slack of an
  // unpivoted row.
  void reinvert() {
    etas_.clear();
    std::vector<char> row_done(m_, 0);
    std::vector<char> slot_done(m_, 0);
    std::vector<int> remaining_nnz(m_, 0);
    std::vector<int> pivot_row_of_slot(m_, -1);
    std::vector<std::vector<int>> slots_touching_row(m_);
    int max_nnz = 1;
    for (int p = 0; p < m_; ++p) {
      remaining_nnz[p] = static_cast<int>(cols_[basis_col_[p]].size());
      max_nnz = std::max(max_nnz, remaining_nnz[p]);
      for (const auto& [r, v] : cols_[basis_col_[p]]) {
        slots_touching_row[r].push_back(p);
      }
    }
    std::vector<std::vector<int>> bucket(max_nnz + 1);
    for (int p = 0; p < m_; ++p) bucket[remaining_nnz[p]].push_back(p);

    std::vector<double> alpha(m_, 0.0);
    int lowest = 0;
    for (int step = 0; step < m_; ++step) {
      int slot = -1;
      while (slot < 0) {
        while (lowest <= max_nnz && bucket[lowest].empty()) ++lowest;
        if (lowest > max_nnz) {
          // Only stale entries remain; fall back to a scan.
          for (int p = 0; p < m_ && slot < 0; ++p) {
            if (!slot_done[p]) slot = p;
          }
          break;
        }
        int cand = bucket[lowest].back();
        bucket[lowest].pop_back();
        if (slot_done[cand]) continue;
        if (remaining_nnz[cand] != lowest) {
          bucket[remaining_nnz[cand]].push_back(cand);
          lowest = std::min(lowest, remaining_nnz[cand]);
          continue;
        }
        slot = cand;
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (const auto& [r, v] : cols_[basis_col_[slot]]) alpha[r] = v;
      ftran(alpha);
      int prow = -1;
      double pmag = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (row_done[r]) continue;
        double a = std::abs(alpha[r]);
        if (a > pmag) {
          pmag = a;
          prow = r;
        }
      }
      if (prow < 0 || pmag < 1e-11) {
        // Dependent column: swap in the slack of some unpivoted row.
        int old_col = basis_col_[slot];
        pos_of_[old_col] = -1;
        vstat_[old_col] = nearest_bound_status(old_col);
        xn_[old_col] = nonbasic_value(old_col);
        int srow = -1;
        for (int r = 0; r < m_; ++r) {
          if (!row_done[r] && pos_of_[n_ + r] == -1) {
            srow = r;
            break;
          }
        }
        if (srow < 0) throw std::runtime_error("simplex: basis repair failed");
        basis_col_[slot] = n_ + srow;
        pos_of_[n_ + srow] = slot;
        vstat_[n_ + srow] = VStat::Basic;
        std::fill(alpha.begin(), alpha.end(), 0.0);
        alpha[srow] = 1.0;
        ftran(alpha);
        prow = -1;
        pmag = 0.0;
        for (int r = 0; r < m_; ++r) {
          if (row_done[r]) continue;
          double a = std::abs(alpha[r]);
          if (a > pmag) {
            pmag = a;
            prow = r;
          }
        }
        if (prow < 0 || pmag < 1e-11) {
          throw std::runtime_error("simplex: basis repair failed");
        }
      }
      append_eta(prow, alpha);
      row_done[prow] = 1;
      slot_done[slot] = 1;
      pivot_row_of_slot[slot] = prow;
      for (int q : slots_touching_row[prow]) {
        if (!slot_done[q]) {
          bucket[--remaining_nnz[q]].push_back(q);
          lowest = std::min(lowest, remaining_nnz[q]);
        }
      }
    }
    std::vector<int> new_basis(m_, -1);
    for (int p = 0; p < m_; ++p) {
      new_basis[pivot_row_of_slot[p]] = basis_col_[p];
    }
    for (int r = 0; r < m_; ++r) {
      basis_col_[r] = new_basis[r];
      pos_of_[new_basis[r]] = r;
    }
  }

  void compute_basics() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < ncols_; ++j) {
      if (vstat_[j] == VStat::Basic) continue;
      double xv = nonbasic_value(j);
      xn_[j] = xv;
      if (xv == 0.0) continue;
      for (const auto& [r, v] : cols_[j]) rhs[r] -= v * xv;
    }
    ftran(rhs);
    xb_ = rhs;
  }

  bool basic_infeasible(int p) const {
    int col = basis_col_[p];
    return xb_[p] < lo_[col] - feps_ || xb_[p] > up_[col] + feps_;
  }

  // Entering eligibility for a nonbasic column given its reduced cost.
  double improvement(int j, double d) const {
    switch (vstat_[j]) {
      case VStat::AtLower:
        return d < -opt_.opt_tol ? -d : 0.0;
      case VStat::AtUpper:
        return d > opt_.opt_tol ? d : 0.0;
      case VStat::FreeNb:
        return std::abs(d) > opt_.opt_tol ? std::abs(d) : 0.0;
      default:
        return 0.0;
    }
  }

  int pick_entering_from(const std::vector<double>& d) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      if (vstat_[j] == VStat::Basic || lo_[j] == up_[j] || banned_[j]) continue;
      double gain = improvement(j, d[j]);
      if (gain == 0.0) continue;
      if (bland_) return j;
      double score = gain * gain / devex_[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void recompute_phase2_costs() {
    std::fill(dual_.begin(), dual_.end(), 0.0);
    for (int p = 0; p < m_; ++p) dual_[p] = cost_[basis_col_[p]];
    btran(dual_);
    for (int j = 0; j < ncols_; ++j) {
      if (vstat_[j] == VStat::Basic) {
        d_[j] = 0.0;
        continue;
      }
      double d = cost_[j];
      for (const auto& [r, v] : cols_[j]) d -= dual_[r] * v;
      d_[j] = d;
    }
  }

  // Phase 1: drive the total bound violation of the basis to zero.
  Outcome phase1() {
    std::fill(devex_.begin(), devex_.end(), 1.0);
    while (true) {
      bool any = false;
      for (int p = 0; p < m_; ++p) {
        if (basic_infeasible(p)) {
          any = true;
          break;
        }
      }
      if (!any) return Outcome::Done;
      if (iters_ >= opt_.iteration_limit) return Outcome::IterLimit;

      std::fill(dual_.begin(), dual_.end(), 0.0);
      for (int p = 0; p < m_; ++p) {
        int col = basis_col_[p];
        if (xb_[p] < lo_[col] - feps_) {
          dual_[p] = -1.0;
        } else if (xb_[p] > up_[col] + feps_) {
          dual_[p] = 1.0;
        }
      }
      btran(dual_);
      for (int j = 0; j < ncols_; ++j) {
        if (vstat_[j] == VStat::Basic) {
          d_[j] = 0.0;
          continue;
        }
        double d = 0.0;
        for (const auto& [r, v] : cols_[j]) d -= dual_[r] * v;
        d_[j] = d;
      }
      int enter = pick_entering_from(d_);
      if (enter < 0) return Outcome::Infeasible;
      Outcome st = phase1_step(enter);
      if (st == Outcome::NumericRetry) {
        if (static_cast<int>(etas_.size()) > m_) {
          reinvert();
          compute_basics();
        } else {
          banned_[enter] = 1;  // cleared on the next successful step
        }
        continue;
      }
      if (st != Outcome::Progress) return st;
    }
  }

  Outcome phase1_step(int enter) {
    const double d = d_[enter];
    const int dir = direction_of(enter, d);

    std::vector<double>& alpha = work_;
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (const auto& [r, v] : cols_[enter]) alpha[r] = v;
    ftran(alpha);

    const double t_flip = up_[enter] - lo_[enter];

    // Breakpoints where the infeasibility slope increases.
    struct Break {
      double t;
      double gain;
      int pos;
      bool at_upper;
    };
    std::vector<Break> breaks;
    for (int p = 0; p < m_; ++p) {
      double a = alpha[p];
      if (std::abs(a) < opt_.pivot_tol) continue;
      int col = basis_col_[p];
      double rate = -dir * a;
      double x = xb_[p];
      auto add = [&](double target, bool at_upper) {
        double t = (target - x) / rate;
        if (t >= -feps_ && std::isfinite(t)) {
          breaks.push_back({std::max(t, 0.0), std::abs(rate), p, at_upper});
        }
      };
      if (x < lo_[col] - feps_) {
        if (rate > 0.0) {
          add(lo_[col], false);
          if (std::isfinite(up_[col])) add(up_[col], true);
        }
      } else if (x > up_[col] + feps_) {
        if (rate < 0.0) {
          add(up_[col], true);
          if (std::isfinite(lo_[col])) add(lo_[col], false);
        }
      } else if (rate > 0.0) {
        if (std::isfinite(up_[col])) add(up_[col], true);
      } else {
        if (std::isfinite(lo_[col])) add(lo_[col], false);
      }
    }
    std::sort(breaks.begin(), breaks.end(), [&](const Break& a, const Break& b) {
      if (a.t != b.t) return a.t < b.t;
      if (bland_) return basis_col_[a.pos] < basis_col_[b.pos];
      int ca = basis_col_[a.pos], cb = basis_col_[b.pos];
      bool fa = lo_[ca] == up_[ca], fb = lo_[cb] == up_[cb];
      if (fa != fb) return fa;  // evict fixed slacks first
      return a.gain > b.gain;
    });

    double slope = -std::abs(d);
    int chosen = -1;
    if (bland_) {
      // Shortest step with least-index leaving while breaking a cycle.
      if (!breaks.empty() && breaks.front().t <= t_flip) chosen = 0;
    } else {
      for (size_t k = 0; k < breaks.size(); ++k) {
        if (breaks[k].t > t_flip) break;
        slope += breaks[k].gain;
        if (slope >= 0.0) {
          chosen = static_cast<int>(k);
          break;
        }
      }
    }

    ++iters_;
    if (chosen < 0) {
      // The slope accounting should always turn nonnegative at some
      // breakpoint; when numerics say otherwise, pivot at the farthest
      // blocking one, else flip, else ask for a refresh.
      int last_ok = -1;
      for (size_t k = 0; k < breaks.size(); ++k) {
        if (breaks[k].t <= t_flip) last_ok = static_cast<int>(k);
      }
      if (last_ok >= 0 && !bland_) {
        chosen = last_ok;
      } else if (std::isfinite(t_flip)) {
        apply_flip(enter, dir, t_flip, alpha);
        note_step(t_flip);
        return Outcome::Progress;
      } else if (last_ok >= 0) {
        chosen = last_ok;
      } else {
        return Outcome::NumericRetry;
      }
    }
    const Break& stop = breaks[chosen];
    int leave_col = basis_col_[stop.pos];
    apply_pivot(enter, dir, stop.t, stop.pos, stop.at_upper, alpha);
    note_step(stop.t, lo_[leave_col] == up_[leave_col]);
    return Outcome::Progress;
  }

  Outcome phase2() {
    std::fill(devex_.begin(), devex_.end(), 1.0);
    recompute_phase2_costs();
    while (true) {
      if (iters_ >= opt_.iteration_limit) return Outcome::IterLimit;
      if (bland_) recompute_phase2_costs();
      int enter = pick_entering_from(d_);
      if (enter < 0) {
        // Guard against drift in the maintained reduced costs.
        recompute_phase2_costs();
        enter = pick_entering_from(d_);
        if (enter < 0) return Outcome::Done;
      }
      Outcome st = phase2_step(enter);
      if (st == Outcome::NumericRetry) {
        if (static_cast<int>(etas_.size()) > m_) {
          reinvert();
          compute_basics();
          recompute_phase2_costs();
        } else {
          banned_[enter] = 1;
        }
        continue;
      }
      if (st != Outcome::Progress) return st;
    }
  }

  Outcome phase2_step(int enter) {
    const double d = d_[enter];
    const int dir = direction_of(enter, d);

    std::vector<double>& alpha = work_;
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (const auto& [r, v] : cols_[enter]) alpha[r] = v;
    ftran(alpha);

    const double t_flip = up_[enter] - lo_[enter];
    int leave_pos = -1;
    double t_basic = kInf;
    double leave_mag = 0.0;
    bool leave_upper = false;
    for (int p = 0; p < m_; ++p) {
      double a = alpha[p];
      if (std::abs(a) < opt_.pivot_tol) continue;
      int col = basis_col_[p];
      double rate = -dir * a;
      double t_here;
      bool at_upper;
      if (rate > 0.0) {
        if (!std::isfinite(up_[col])) continue;
        t_here = (up_[col] - xb_[p]) / rate;
        at_upper = true;
      } else {
        if (!std::isfinite(lo_[col])) continue;
        t_here = (lo_[col] - xb_[p]) / rate;
        at_upper = false;
      }
      t_here = std::max(t_here, 0.0);
      bool take;
      if (leave_pos < 0) {
        take = true;
      } else if (t_here < t_basic - 1e-15) {
        take = true;
      } else if (t_here <= t_basic + 1e-15) {
        if (bland_) {
          take = col < basis_col_[leave_pos];
        } else {
          int prev = basis_col_[leave_pos];
          bool fix_new = lo_[col] == up_[col];
          bool fix_old = lo_[prev] == up_[prev];
          if (fix_new != fix_old) {
            take = fix_new;  // evict fixed slacks first
          } else {
            take = std::abs(a) > leave_mag ||
                   (std::abs(a) == leave_mag && col < prev);
          }
        }
      } else {
        take = false;
      }
      if (take) {
        t_basic = t_here;
        leave_pos = p;
        leave_mag = std::abs(a);
        leave_upper = at_upper;
      }
    }

    if (!std::isfinite(t_basic) && !std::isfinite(t_flip)) {
      // Trust an unbounded ray only from a freshly factorized basis.
      if (static_cast<int>(etas_.size()) > m_ || banned_[enter]) {
        return Outcome::NumericRetry;
      }
      return Outcome::Unbounded;
    }

    ++iters_;
    if (t_flip <= t_basic) {
      apply_flip(enter, dir, t_flip, alpha);
      note_step(t_flip);
      return Outcome::Progress;
    }
    update_phase2_costs(enter, leave_pos, alpha);
    int leave_col = basis_col_[leave_pos];
    apply_pivot(enter, dir, t_basic, leave_pos, leave_upper, alpha);
    note_step(t_basic, lo_[leave_col] == up_[leave_col]);
    return Outcome::Progress;
  }

  int direction_of(int enter, double d) const {
    if (vstat_[enter] == VStat::AtLower) return 1;
    if (vstat_[enter] == VStat::AtUpper) return -1;
    return d < 0 ? 1 : -1;
  }

  void note_step(double t, bool structural_progress = false) {
    std::fill(banned_.begin(), banned_.end(), 0);
    if (t > 1e-12 || structural_progress) {
      degen_streak_ = 0;
      bland_ = false;
    } else if (++degen_streak_ > 500) {
      bland_ = true;
    }
  }

  void apply_flip(int enter, int dir, double t, const std::vector<double>& alpha) {
    for (int p = 0; p < m_; ++p) {
      if (alpha[p] != 0.0) xb_[p] -= dir * t * alpha[p];
    }
    vstat_[enter] =
        vstat_[enter] == VStat::AtLower ? VStat::AtUpper : VStat::AtLower;
    xn_[enter] = nonbasic_value(enter);
  }

  void apply_pivot(int enter, int dir, double t, int leave_pos, bool at_upper,
                   const std::vector<double>& alpha) {
    double enter_val = nonbasic_value(enter) + dir * t;
    for (int p = 0; p < m_; ++p) {
      if (alpha[p] != 0.0) xb_[p] -= dir * t * alpha[p];
    }
    int leave_col = basis_col_[leave_pos];
    vstat_[leave_col] = at_upper ? VStat::AtUpper : VStat::AtLower;
    if (!std::isfinite(nonbasic_value(leave_col))) {
      vstat_[leave_col] = nearest_bound_status(leave_col);
    }
    xn_[leave_col] = nonbasic_value(leave_col);
    pos_of_[leave_col] = -1;

    basis_col_[leave_pos] = enter;
    pos_of_[enter] = leave_pos;
    vstat_[enter] = VStat::Basic;
    xb_[leave_pos] = enter_val;

    append_eta(leave_pos, alpha);
    if (static_cast<int>(etas_.size()) > m_ + opt_.refactor_interval) {
      reinvert();
      compute_basics();
      recompute_phase2_costs();
    }
  }

  // Classic devex update plus incremental reduced costs along the pivot row.
  void update_phase2_costs(int enter, int leave_pos,
                           const std::vector<double>& alpha) {
    const double pivot = alpha[leave_pos];
    const double dq = d_[enter];
    const double wq = std::max(devex_[enter], 1.0);

    std::fill(rho_.begin(), rho_.end(), 0.0);
    rho_[leave_pos] = 1.0;
    btran(rho_);

    int leave_col = basis_col_[leave_pos];
    for (int j = 0; j < ncols_; ++j) {
      if (vstat_[j] == VStat::Basic || j == enter) continue;
      double rj = 0.0;
      for (const auto& [r, v] : cols_[j]) {
        if (rho_[r] != 0.0) rj += rho_[r] * v;
      }
      if (rj == 0.0) continue;
      d_[j] -= dq / pivot * rj;
      double candidate = (rj / pivot) * (rj / pivot) * wq;
      if (candidate > devex_[j]) devex_[j] = candidate;
    }
    d_[leave_col] = -dq / pivot;
    devex_[leave_col] = std::max(wq / (pivot * pivot), 1.0);
    d_[enter] = 0.0;
    devex_[enter] = 1.0;
    // Reference reset keeps the weights in a sane range.
    static constexpr double kWeightCap = 1e10;
    for (int j = 0; j < ncols_; ++j) {
      if (devex_[j] > kWeightCap) {
        std::fill(devex_.begin(), devex_.end(), 1.0);
        break;
      }
    }
  }

  LpSolution finish(LpStatus status) {
    if (status == LpStatus::Optimal) {
      reinvert();
      compute_basics();
    }
    LpSolution sol;
    sol.status = status;
    sol.iterations = iters_;
    sol.primal.assign(n_, 0.0);
    for (int v = 0; v < n_; ++v) {
      sol.primal[v] = vstat_[v] == VStat::Basic ? xb_[pos_of_[v]] : xn_[v];
    }
    double obj = 0.0;
    for (int v = 0; v < n_; ++v) {
      obj += lp_.variable(v).objective * sol.primal[v];
    }
    sol.objective = obj;
    sol.row_duals.assign(m_, 0.0);
    if (status == LpStatus::Optimal) {
      std::fill(dual_.begin(), dual_.end(), 0.0);
      for (int p = 0; p < m_; ++p) dual_[p] = cost_[basis_col_[p]];
      btran(dual_);
      sol.row_duals = dual_;
      sol.feasibility_residual = lp_residual(lp_, sol.primal);
    }
    return sol;
  }
};

LpSolution bundled_solve(const LinearProgram& lp, const LpOptions& opt) {
  Simplex simplex(lp, opt);
  return simplex.run();
}


std::map<std::string, LpBackend>& backend_registry() {
  static std::map<std::string, LpBackend> registry{{"bundled", bundled_solve}};
  return registry;
}

std::mutex& registry_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

void register_backend(const std::string& name, LpBackend backend) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  backend_registry()[name] = std::move(backend);
}

std::vector<std::string> backend_names() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, fn] : backend_registry()) names.push_back(name);
  return names;
}

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
  std::string name = options.backend;
  if (name.empty()) {
    const char* env = std::getenv("CORRSOLVE_LP_BACKEND");
    name = env ? env : "bundled";
  }
  LpBackend backend;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = backend_registry().find(name);
    if (it == backend_registry().end()) {
      throw std::runtime_error("unknown LP backend '" + name + "'");
    }
    backend = it->second;
  }
  return backend(lp, options);
}

}  // namespace corrsolve
