#include "scmd/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace scmd {

int LpModel::add_variable(double lo, double hi, double obj) {
  if (lo > hi) throw std::invalid_argument("variable lower bound above upper");
  lo_.push_back(lo);
  hi_.push_back(hi);
  obj_.push_back(obj);
  return num_vars() - 1;
}

int LpModel::add_constraint(std::vector<std::pair<int, double>> terms,
                            Sense sense, double rhs, int tag) {
  for (const auto& [v, coef] : terms) {
    if (v < 0 || v >= num_vars()) throw std::invalid_argument("constraint references unknown variable");
    if (!std::isfinite(coef)) throw std::invalid_argument("constraint coefficient not finite");
  }
  rows_.push_back(Row{std::move(terms), sense, rhs, tag});
  return num_rows() - 1;
}

void LpModel::add_term(int row, int var, double coef) {
  if (row < 0 || row >= num_rows()) throw std::invalid_argument("row out of range");
  if (var < 0 || var >= num_vars()) throw std::invalid_argument("variable out of range");
  rows_[static_cast<std::size_t>(row)].terms.emplace_back(var, coef);
}

void LpModel::remove_group(int tag) {
  rows_.erase(std::remove_if(rows_.begin(), rows_.end(),
                             [tag](const Row& r) { return r.tag == tag; }),
              rows_.end());
}

void LpModel::set_bounds(int var, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("variable lower bound above upper");
  lo_[static_cast<std::size_t>(var)] = lo;
  hi_[static_cast<std::size_t>(var)] = hi;
}

void LpModel::set_objective_coeff(int var, double c) {
  obj_[static_cast<std::size_t>(var)] = c;
}

std::string LpModel::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "min:";
  for (int j = 0; j < num_vars(); ++j) {
    if (obj_[static_cast<std::size_t>(j)] != 0.0) out << " + " << obj_[static_cast<std::size_t>(j)] << " x" << j;
  }
  out << ";\n";
  for (int i = 0; i < num_rows(); ++i) {
    const Row& r = rows_[static_cast<std::size_t>(i)];
    out << "r" << i << ":";
    for (const auto& [v, coef] : r.terms) out << " + " << coef << " x" << v;
    out << (r.sense == Sense::le ? " <= " : r.sense == Sense::ge ? " >= " : " = ");
    out << r.rhs << ";\n";
  }
  for (int j = 0; j < num_vars(); ++j) {
    out << "x" << j << " in [" << lo_[static_cast<std::size_t>(j)] << ", " << hi_[static_cast<std::size_t>(j)] << "];\n";
  }
  return out.str();
}

double primal_infeasibility(const LpModel& model, const Vector& x) {
  double worst = 0.0;
  for (int j = 0; j < model.num_vars(); ++j) {
    worst = std::max(worst, model.lower(j) - x(j));
    worst = std::max(worst, x(j) - model.upper(j));
  }
  for (int i = 0; i < model.num_rows(); ++i) {
    const auto& r = model.row(i);
    double lhs = 0.0;
    for (const auto& [v, coef] : r.terms) lhs += coef * x(v);
    if (r.sense == Sense::le) worst = std::max(worst, lhs - r.rhs);
    if (r.sense == Sense::ge) worst = std::max(worst, r.rhs - lhs);
    if (r.sense == Sense::eq) worst = std::max(worst, std::abs(lhs - r.rhs));
  }
  return worst;
}

double duality_gap(const LpModel& model, const LpSolution& sol) {
  double dual_obj = 0.0;
  for (int i = 0; i < model.num_rows(); ++i) dual_obj += sol.row_duals(i) * model.row(i).rhs;
  for (int j = 0; j < model.num_vars(); ++j) {
    switch (sol.basis.status[static_cast<std::size_t>(j)]) {
      case VarStatus::nonbasic_lower: dual_obj += sol.reduced_costs(j) * model.lower(j); break;
      case VarStatus::nonbasic_upper: dual_obj += sol.reduced_costs(j) * model.upper(j); break;
      default: break;
    }
  }
  return std::abs(sol.objective - dual_obj);
}

namespace {

constexpr double kDropEta = 1e-13;

// Computational form: structural columns 0..nv-1, then one slack per row
// (coefficient +1) so every row is an equality. Slack bounds encode the
// sense: le -> [0, inf), ge -> (-inf, 0], eq -> [0, 0].
class SimplexCore {
 public:
  SimplexCore(const LpModel& model, const SimplexOptions& opts)
      : opts_(opts), m_(model.num_rows()), nv_(model.num_vars()), ncols_(m_ + nv_) {
    lo_.resize(static_cast<std::size_t>(ncols_));
    hi_.resize(static_cast<std::size_t>(ncols_));
    cost_.assign(static_cast<std::size_t>(ncols_), 0.0);
    rhs_.resize(static_cast<std::size_t>(m_));

    std::vector<int> col_counts(static_cast<std::size_t>(ncols_), 0);
    long nnz = 0;
    for (int i = 0; i < m_; ++i) {
      for (const auto& term : model.row(i).terms) {
        ++col_counts[static_cast<std::size_t>(term.first)];
        ++nnz;
      }
    }
    for (int j = 0; j < nv_; ++j) {
      lo_[static_cast<std::size_t>(j)] = model.lower(j);
      hi_[static_cast<std::size_t>(j)] = model.upper(j);
      cost_[static_cast<std::size_t>(j)] = model.objective_coeff(j);
    }
    for (int i = 0; i < m_; ++i) {
      const auto& r = model.row(i);
      rhs_[static_cast<std::size_t>(i)] = r.rhs;
      const std::size_t sj = static_cast<std::size_t>(nv_ + i);
      col_counts[sj] = 1;
      ++nnz;
      switch (r.sense) {
        case Sense::le: lo_[sj] = 0.0; hi_[sj] = kInf; break;
        case Sense::ge: lo_[sj] = -kInf; hi_[sj] = 0.0; break;
        case Sense::eq: lo_[sj] = 0.0; hi_[sj] = 0.0; break;
      }
    }
    col_start_.assign(static_cast<std::size_t>(ncols_) + 1, 0);
    for (int j = 0; j < ncols_; ++j) {
      col_start_[static_cast<std::size_t>(j) + 1] = col_start_[static_cast<std::size_t>(j)] + col_counts[static_cast<std::size_t>(j)];
    }
    col_row_.resize(static_cast<std::size_t>(nnz));
    col_val_.resize(static_cast<std::size_t>(nnz));
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i) {
      for (const auto& term : model.row(i).terms) {
        const int p = fill[static_cast<std::size_t>(term.first)]++;
        col_row_[static_cast<std::size_t>(p)] = i;
        col_val_[static_cast<std::size_t>(p)] = term.second;
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int p = fill[static_cast<std::size_t>(nv_ + i)]++;
      col_row_[static_cast<std::size_t>(p)] = i;
      col_val_[static_cast<std::size_t>(p)] = 1.0;
    }

    stat_.assign(static_cast<std::size_t>(ncols_), VarStatus::nonbasic_lower);
    xval_.assign(static_cast<std::size_t>(ncols_), 0.0);
    pos_in_basis_.assign(static_cast<std::size_t>(ncols_), -1);
    basic_cols_.assign(static_cast<std::size_t>(m_), -1);
    y_.assign(static_cast<std::size_t>(m_), 0.0);
    work_.resize(m_);
    work2_.resize(m_);
    if (opts_.max_iterations <= 0) {
      opts_.max_iterations = 20L * (m_ + ncols_) + 10000;
    }
  }

  void set_slack_basis() {
    for (int j = 0; j < nv_; ++j) {
      set_nonbasic_at_default(j);
      pos_in_basis_[static_cast<std::size_t>(j)] = -1;
    }
    for (int i = 0; i < m_; ++i) {
      const int sj = nv_ + i;
      stat_[static_cast<std::size_t>(sj)] = VarStatus::basic;
      basic_cols_[static_cast<std::size_t>(i)] = sj;
      pos_in_basis_[static_cast<std::size_t>(sj)] = i;
    }
    if (!refactorize()) throw std::runtime_error("slack basis factorization failed");
    recompute_basic_values();
  }

  bool set_warm_basis(const LpBasis& warm) {
    if (static_cast<int>(warm.status.size()) != ncols_) return false;
    int basics = 0;
    for (VarStatus s : warm.status) basics += s == VarStatus::basic ? 1 : 0;
    if (basics != m_) return false;
    int p = 0;
    for (int j = 0; j < ncols_; ++j) {
      stat_[static_cast<std::size_t>(j)] = warm.status[static_cast<std::size_t>(j)];
      if (stat_[static_cast<std::size_t>(j)] == VarStatus::basic) {
        basic_cols_[static_cast<std::size_t>(p)] = j;
        pos_in_basis_[static_cast<std::size_t>(j)] = p;
        ++p;
      } else {
        pos_in_basis_[static_cast<std::size_t>(j)] = -1;
        place_nonbasic(j);
      }
    }
    if (!refactorize()) return false;
    recompute_basic_values();
    return true;
  }

  LpStatus run(bool warm_given) {
    if (!primal_feasible()) {
      if (warm_given && dual_feasible()) {
        const LpStatus st = dual_simplex();
        if (st == LpStatus::infeasible) return st;
        if (st == LpStatus::optimal) return finish();
        set_slack_basis();  // numerical trouble: cold restart
      }
      const LpStatus p1 = phase1();
      if (p1 != LpStatus::optimal) return p1;
    }
    const LpStatus p2 = phase2();
    if (p2 != LpStatus::optimal) return p2;
    return finish();
  }

  LpSolution extract(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.x = Vector::Zero(nv_);
    for (int j = 0; j < nv_; ++j) sol.x(j) = xval_[static_cast<std::size_t>(j)];
    sol.objective = 0.0;
    for (int j = 0; j < nv_; ++j) sol.objective += cost_[static_cast<std::size_t>(j)] * sol.x(j);
    sol.basis.status = stat_;
    sol.row_duals = Vector::Zero(m_);
    sol.reduced_costs = Vector::Zero(nv_);
    if (status == LpStatus::optimal) {
      compute_duals(cost_);
      for (int i = 0; i < m_; ++i) sol.row_duals(i) = y_[static_cast<std::size_t>(i)];
      for (int j = 0; j < nv_; ++j) sol.reduced_costs(j) = cost_[static_cast<std::size_t>(j)] - column_dot_y(j);
    }
    return sol;
  }

 private:
  SimplexOptions opts_;
  int m_, nv_, ncols_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lo_, hi_, cost_, rhs_;

  std::vector<VarStatus> stat_;
  std::vector<double> xval_;
  std::vector<int> pos_in_basis_, basic_cols_;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  struct Eta {
    int pos;
    double wp;
    std::vector<std::pair<int, double>> w;  // entries excluding pos
  };
  std::vector<Eta> etas_;
  Vector work_, work2_;
  std::vector<double> y_;
  long iterations_ = 0;
  bool bland_ = false;
  long stalled_ = 0;

  double lob(int j) const { return lo_[static_cast<std::size_t>(j)]; }
  double hib(int j) const { return hi_[static_cast<std::size_t>(j)]; }

  void set_nonbasic_at_default(int j) {
    if (std::isfinite(lob(j))) {
      stat_[static_cast<std::size_t>(j)] = VarStatus::nonbasic_lower;
      xval_[static_cast<std::size_t>(j)] = lob(j);
    } else if (std::isfinite(hib(j))) {
      stat_[static_cast<std::size_t>(j)] = VarStatus::nonbasic_upper;
      xval_[static_cast<std::size_t>(j)] = hib(j);
    } else {
      stat_[static_cast<std::size_t>(j)] = VarStatus::nonbasic_free;
      xval_[static_cast<std::size_t>(j)] = 0.0;
    }
  }

  void place_nonbasic(int j) {
    switch (stat_[static_cast<std::size_t>(j)]) {
      case VarStatus::nonbasic_lower:
        if (!std::isfinite(lob(j))) { set_nonbasic_at_default(j); return; }
        xval_[static_cast<std::size_t>(j)] = lob(j);
        break;
      case VarStatus::nonbasic_upper:
        if (!std::isfinite(hib(j))) { set_nonbasic_at_default(j); return; }
        xval_[static_cast<std::size_t>(j)] = hib(j);
        break;
      case VarStatus::nonbasic_free:
        xval_[static_cast<std::size_t>(j)] = 0.0;
        break;
      case VarStatus::basic:
        break;
    }
  }

  bool refactorize() {
    Eigen::SparseMatrix<double> B(m_, m_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) {
      const int j = basic_cols_[static_cast<std::size_t>(p)];
      for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
        trips.emplace_back(col_row_[static_cast<std::size_t>(k)], p, col_val_[static_cast<std::size_t>(k)]);
      }
    }
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  void ftran_column(int j, Vector& out) {
    work_.setZero();
    for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
      work_(col_row_[static_cast<std::size_t>(k)]) = col_val_[static_cast<std::size_t>(k)];
    }
    ftran(work_, out);
  }

  // out := B^{-1} a; etas apply chronologically after the LU solve.
  void ftran(const Vector& a, Vector& out) {
    out = lu_.solve(a);
    for (const Eta& e : etas_) {
      const double t = out(e.pos) / e.wp;
      out(e.pos) = t;
      if (t != 0.0) {
        for (const auto& iv : e.w) out(iv.first) -= iv.second * t;
      }
    }
  }

  // out := B^{-T} c; transposed etas apply in reverse order before the LU.
  void btran(const Vector& c, Vector& out) {
    work2_ = c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double dot = 0.0;
      for (const auto& iv : it->w) dot += iv.second * work2_(iv.first);
      work2_(it->pos) = (work2_(it->pos) - dot) / it->wp;
    }
    out = lu_.transpose().solve(work2_);
  }

  void compute_duals(const std::vector<double>& costs) {
    Vector cb(m_);
    for (int p = 0; p < m_; ++p) cb(p) = costs[static_cast<std::size_t>(basic_cols_[static_cast<std::size_t>(p)])];
    Vector y(m_);
    btran(cb, y);
    for (int i = 0; i < m_; ++i) y_[static_cast<std::size_t>(i)] = y(i);
  }

  double column_dot_y(int j) const {
    double s = 0.0;
    for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
      s += y_[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(k)])] * col_val_[static_cast<std::size_t>(k)];
    }
    return s;
  }

  void recompute_basic_values() {
    Vector r(m_);
    for (int i = 0; i < m_; ++i) r(i) = rhs_[static_cast<std::size_t>(i)];
    for (int j = 0; j < ncols_; ++j) {
      if (stat_[static_cast<std::size_t>(j)] == VarStatus::basic) continue;
      const double v = xval_[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
        r(col_row_[static_cast<std::size_t>(k)]) -= col_val_[static_cast<std::size_t>(k)] * v;
      }
    }
    Vector xb(m_);
    ftran(r, xb);
    for (int p = 0; p < m_; ++p) xval_[static_cast<std::size_t>(basic_cols_[static_cast<std::size_t>(p)])] = xb(p);
  }

  bool primal_feasible() const {
    for (int p = 0; p < m_; ++p) {
      const int j = basic_cols_[static_cast<std::size_t>(p)];
      if (xval_[static_cast<std::size_t>(j)] < lob(j) - opts_.feas_tol) return false;
      if (xval_[static_cast<std::size_t>(j)] > hib(j) + opts_.feas_tol) return false;
    }
    return true;
  }

  bool dual_feasible() {
    compute_duals(cost_);
    for (int j = 0; j < ncols_; ++j) {
      const double d = cost_[static_cast<std::size_t>(j)] - column_dot_y(j);
      switch (stat_[static_cast<std::size_t>(j)]) {
        case VarStatus::nonbasic_lower:
          if (d < -1e-7) return false;
          break;
        case VarStatus::nonbasic_upper:
          if (d > 1e-7) return false;
          break;
        case VarStatus::nonbasic_free:
          if (std::abs(d) > 1e-7) return false;
          break;
        case VarStatus::basic:
          break;
      }
    }
    return true;
  }

  void note_step(double t) {
    if (t <= opts_.feas_tol) {
      if (++stalled_ > 2L * m_ + 200) bland_ = true;
    } else {
      stalled_ = 0;
      bland_ = false;
    }
  }

  void apply_pivot(int j, double dj, double t, int p, VarStatus leave_to,
                   const Vector& w) {
    if (t != 0.0) {
      for (int q = 0; q < m_; ++q) {
        const double wq = w(q);
        if (wq != 0.0) xval_[static_cast<std::size_t>(basic_cols_[static_cast<std::size_t>(q)])] -= dj * t * wq;
      }
    }
    if (p < 0) {  // bound-to-bound flip
      xval_[static_cast<std::size_t>(j)] += dj * t;
      stat_[static_cast<std::size_t>(j)] = dj > 0 ? VarStatus::nonbasic_upper : VarStatus::nonbasic_lower;
      return;
    }
    const int leave = basic_cols_[static_cast<std::size_t>(p)];
    stat_[static_cast<std::size_t>(leave)] = leave_to;
    pos_in_basis_[static_cast<std::size_t>(leave)] = -1;
    xval_[static_cast<std::size_t>(leave)] = leave_to == VarStatus::nonbasic_lower ? lob(leave) : hib(leave);

    const double enter_val = xval_[static_cast<std::size_t>(j)] + dj * t;
    stat_[static_cast<std::size_t>(j)] = VarStatus::basic;
    pos_in_basis_[static_cast<std::size_t>(j)] = p;
    basic_cols_[static_cast<std::size_t>(p)] = j;
    xval_[static_cast<std::size_t>(j)] = enter_val;

    Eta e;
    e.pos = p;
    e.wp = w(p);
    for (int q = 0; q < m_; ++q) {
      if (q != p && std::abs(w(q)) > kDropEta) e.w.emplace_back(q, w(q));
    }
    etas_.push_back(std::move(e));
    if (static_cast<int>(etas_.size()) >= opts_.refactor_every) {
      if (!refactorize()) throw std::runtime_error("simplex basis refactorization failed");
      recompute_basic_values();
    }
  }

  struct Entering {
    int col = -1;
    double dir = 0.0;
  };

  // Most negative effective reduced cost; Bland mode takes the first
  // eligible index.
  Entering price(const std::vector<double>* phase1_grad) {
    Entering e;
    double best = -opts_.dual_tol;
    for (int j = 0; j < ncols_; ++j) {
      const VarStatus st = stat_[static_cast<std::size_t>(j)];
      if (st == VarStatus::basic) continue;
      const double cj = phase1_grad ? 0.0 : cost_[static_cast<std::size_t>(j)];
      const double d = cj - column_dot_y(j);
      double eff, dir;
      if (st == VarStatus::nonbasic_lower) { eff = d; dir = 1.0; }
      else if (st == VarStatus::nonbasic_upper) { eff = -d; dir = -1.0; }
      else { eff = -std::abs(d); dir = d > 0 ? -1.0 : 1.0; }
      if (eff < best) {
        e.col = j;
        e.dir = dir;
        if (bland_) break;
        best = eff;
      }
    }
    return e;
  }

  struct RatioResult {
    double t = kInf;
    int leave_pos = -1;            // -1: bound flip (if flip true) or unbounded
    bool flip = false;
    VarStatus leave_to = VarStatus::nonbasic_lower;
  };

  // Two-pass bounded ratio test. In phase 1, basics beyond a violated
  // bound block only when moving back onto it (they may not overshoot).
  RatioResult ratio_test(int enter, double dir, const Vector& w, bool phase1) {
    RatioResult res;
    const double span = hib(enter) - lob(enter);
    if (std::isfinite(span)) {
      res.t = span;
      res.flip = true;
    }
    // pass 1: minimal blocking step
    double t_min = res.t;
    for (int p = 0; p < m_; ++p) {
      const double wp = w(p);
      if (std::abs(wp) < 1e-11) continue;
      const int bj = basic_cols_[static_cast<std::size_t>(p)];
      const double v = xval_[static_cast<std::size_t>(bj)];
      const double delta = -dir * wp;  // basic moves by delta * t
      double limit = kInf;
      if (phase1 && v < lob(bj) - opts_.feas_tol) {
        if (delta > 0) limit = (lob(bj) - v) / delta;
      } else if (phase1 && v > hib(bj) + opts_.feas_tol) {
        if (delta < 0) limit = (hib(bj) - v) / delta;
      } else if (delta > 0 && std::isfinite(hib(bj))) {
        limit = (hib(bj) - v) / delta;
      } else if (delta < 0 && std::isfinite(lob(bj))) {
        limit = (lob(bj) - v) / delta;
      }
      if (limit < t_min) t_min = std::max(limit, 0.0);
    }
    if (!std::isfinite(t_min)) return res;  // unbounded direction (no flip)
    // pass 2: among blockers within tolerance of t_min pick the most
    // stable pivot (largest |w_p|); Bland mode picks the smallest index.
    const double window = t_min + 1e-9 * (1.0 + std::abs(t_min));
    double best_piv = 0.0;
    int best_idx = -1;
    for (int p = 0; p < m_; ++p) {
      const double wp = w(p);
      if (std::abs(wp) < opts_.pivot_tol) continue;
      const int bj = basic_cols_[static_cast<std::size_t>(p)];
      const double v = xval_[static_cast<std::size_t>(bj)];
      const double delta = -dir * wp;
      double limit = kInf;
      VarStatus to = VarStatus::nonbasic_lower;
      if (phase1 && v < lob(bj) - opts_.feas_tol) {
        if (delta > 0) { limit = (lob(bj) - v) / delta; to = VarStatus::nonbasic_lower; }
      } else if (phase1 && v > hib(bj) + opts_.feas_tol) {
        if (delta < 0) { limit = (hib(bj) - v) / delta; to = VarStatus::nonbasic_upper; }
      } else if (delta > 0 && std::isfinite(hib(bj))) {
        limit = (hib(bj) - v) / delta;
        to = VarStatus::nonbasic_upper;
      } else if (delta < 0 && std::isfinite(lob(bj))) {
        limit = (lob(bj) - v) / delta;
        to = VarStatus::nonbasic_lower;
      }
      if (limit > window) continue;
      const bool better = bland_ ? (best_idx < 0 || bj < basic_cols_[static_cast<std::size_t>(best_idx)])
                                 : std::abs(wp) > best_piv;
      if (better) {
        best_piv = std::abs(wp);
        best_idx = p;
        res.leave_pos = p;
        res.leave_to = to;
        res.t = std::max(limit, 0.0);
        res.flip = false;
      }
    }
    if (res.leave_pos < 0 && res.flip) {
      res.t = span;
    } else if (res.leave_pos < 0) {
      res.t = kInf;  // unbounded (or all pivots too small; caller refactors)
    }
    return res;
  }

  LpStatus phase1() {
    std::vector<double> g(static_cast<std::size_t>(ncols_), 0.0);
    int tiny_pivot_retries = 0;
    while (true) {
      if (iterations_++ > opts_.max_iterations) return LpStatus::iteration_limit;
      if (primal_feasible()) return LpStatus::optimal;
      std::fill(g.begin(), g.end(), 0.0);
      for (int p = 0; p < m_; ++p) {
        const int j = basic_cols_[static_cast<std::size_t>(p)];
        const double v = xval_[static_cast<std::size_t>(j)];
        if (v < lob(j) - opts_.feas_tol) g[static_cast<std::size_t>(j)] = -1.0;
        else if (v > hib(j) + opts_.feas_tol) g[static_cast<std::size_t>(j)] = 1.0;
      }
      compute_duals(g);
      const Entering e = price(&g);
      if (e.col < 0) return LpStatus::infeasible;
      Vector w(m_);
      ftran_column(e.col, w);
      const RatioResult r = ratio_test(e.col, e.dir, w, /*phase1=*/true);
      if (!std::isfinite(r.t)) {
        // No blocking event should exist while infeasibility decreases;
        // treat as numerical noise, refactor and retry.
        if (++tiny_pivot_retries > 3) return LpStatus::iteration_limit;
        if (!refactorize()) return LpStatus::iteration_limit;
        recompute_basic_values();
        continue;
      }
      tiny_pivot_retries = 0;
      apply_pivot(e.col, e.dir, r.t, r.flip ? -1 : r.leave_pos, r.leave_to, w);
      note_step(r.t);
    }
  }

  LpStatus phase2() {
    int tiny_pivot_retries = 0;
    while (true) {
      if (iterations_++ > opts_.max_iterations) return LpStatus::iteration_limit;
      compute_duals(cost_);
      const Entering e = price(nullptr);
      if (e.col < 0) return LpStatus::optimal;
      Vector w(m_);
      ftran_column(e.col, w);
      const RatioResult r = ratio_test(e.col, e.dir, w, /*phase1=*/false);
      if (!std::isfinite(r.t)) {
        if (!has_blocker(e.dir, w)) return LpStatus::unbounded;  // true ray
        // blockers exist but pivots were too small: numerical artifact
        if (++tiny_pivot_retries > 3) return LpStatus::iteration_limit;
        if (!refactorize()) return LpStatus::iteration_limit;
        recompute_basic_values();
        continue;
      }
      tiny_pivot_retries = 0;
      apply_pivot(e.col, e.dir, r.t, r.flip ? -1 : r.leave_pos, r.leave_to, w);
      note_step(r.t);
    }
  }

  // True when some basic would block the entering direction (used to
  // separate unboundedness from tiny-pivot numerics).
  bool has_blocker(double dir, const Vector& w) const {
    for (int p = 0; p < m_; ++p) {
      const double wp = w(p);
      if (std::abs(wp) < 1e-11) continue;
      const int bj = basic_cols_[static_cast<std::size_t>(p)];
      const double delta = -dir * wp;
      if (delta > 0 && std::isfinite(hib(bj))) return true;
      if (delta < 0 && std::isfinite(lob(bj))) return true;
    }
    return false;
  }

  LpStatus dual_simplex() {
    long dual_iters = 0;
    const long cap = 4L * m_ + 1000;
    while (true) {
      if (iterations_++ > opts_.max_iterations || ++dual_iters > cap) {
        return LpStatus::iteration_limit;
      }
      int leave_pos = -1;
      double worst = opts_.feas_tol;
      bool below = false;
      for (int p = 0; p < m_; ++p) {
        const int j = basic_cols_[static_cast<std::size_t>(p)];
        const double v = xval_[static_cast<std::size_t>(j)];
        if (lob(j) - v > worst) { worst = lob(j) - v; leave_pos = p; below = true; }
        if (v - hib(j) > worst) { worst = v - hib(j); leave_pos = p; below = false; }
      }
      if (leave_pos < 0) return LpStatus::optimal;

      Vector ep = Vector::Zero(m_);
      ep(leave_pos) = 1.0;
      Vector rho(m_);
      btran(ep, rho);
      compute_duals(cost_);

      int enter = -1;
      double best_ratio = kInf;
      double best_alpha = 0.0;
      for (int j = 0; j < ncols_; ++j) {
        const VarStatus st = stat_[static_cast<std::size_t>(j)];
        if (st == VarStatus::basic) continue;
        double alpha = 0.0;
        for (int k = col_start_[static_cast<std::size_t>(j)]; k < col_start_[static_cast<std::size_t>(j) + 1]; ++k) {
          alpha += rho(col_row_[static_cast<std::size_t>(k)]) * col_val_[static_cast<std::size_t>(k)];
        }
        if (std::abs(alpha) < opts_.pivot_tol) continue;
        bool eligible;
        if (below) {  // basic must increase: -alpha * dir_j > 0
          eligible = (st == VarStatus::nonbasic_lower && alpha < 0) ||
                     (st == VarStatus::nonbasic_upper && alpha > 0) ||
                     st == VarStatus::nonbasic_free;
        } else {
          eligible = (st == VarStatus::nonbasic_lower && alpha > 0) ||
                     (st == VarStatus::nonbasic_upper && alpha < 0) ||
                     st == VarStatus::nonbasic_free;
        }
        if (!eligible) continue;
        const double d = cost_[static_cast<std::size_t>(j)] - column_dot_y(j);
        const double ratio = std::abs(d) / std::abs(alpha);
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && std::abs(alpha) > std::abs(best_alpha))) {
          best_ratio = ratio;
          enter = j;
          best_alpha = alpha;
        }
      }
      if (enter < 0) return LpStatus::infeasible;

      const int leave = basic_cols_[static_cast<std::size_t>(leave_pos)];
      const VarStatus leave_to = below ? VarStatus::nonbasic_lower : VarStatus::nonbasic_upper;
      const double target = below ? lob(leave) : hib(leave);

      Vector w(m_);
      ftran_column(enter, w);
      if (std::abs(w(leave_pos)) < opts_.pivot_tol * 1e-2) {
        if (!refactorize()) return LpStatus::iteration_limit;
        recompute_basic_values();
        continue;
      }
      const double gap = xval_[static_cast<std::size_t>(leave)] - target;
      double dir;
      switch (stat_[static_cast<std::size_t>(enter)]) {
        case VarStatus::nonbasic_lower: dir = 1.0; break;
        case VarStatus::nonbasic_upper: dir = -1.0; break;
        default: dir = (gap / w(leave_pos)) > 0 ? 1.0 : -1.0; break;
      }
      const double t = gap / (dir * w(leave_pos));
      apply_pivot(enter, dir, t, leave_pos, leave_to, w);
    }
  }

  // Certify the optimum on a fresh factorization; resume pivoting if eta
  // drift left anything violated.
  LpStatus finish() {
    for (int round = 0; round < 3; ++round) {
      if (!refactorize()) return LpStatus::iteration_limit;
      recompute_basic_values();
      if (!primal_feasible()) {
        const LpStatus p1 = phase1();
        if (p1 != LpStatus::optimal) return p1;
        const LpStatus p2 = phase2();
        if (p2 != LpStatus::optimal) return p2;
        continue;
      }
      if (!dual_feasible()) {
        const LpStatus p2 = phase2();
        if (p2 != LpStatus::optimal) return p2;
        continue;
      }
      return LpStatus::optimal;
    }
    return LpStatus::iteration_limit;
  }
};

}  // namespace

LpSolution RevisedSimplex::solve(const LpModel& model, const LpBasis* warm) {
  SimplexCore core(model, opts_);
  bool warm_ok = false;
  if (warm != nullptr) {
    warm_ok = core.set_warm_basis(*warm);
  }
  if (!warm_ok) core.set_slack_basis();
  const LpStatus st = core.run(warm_ok);
  return core.extract(st);
}

}  // namespace scmd
