#include "scmd/benders.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scmd/tolerances.hpp"

namespace scmd {

CandidatePool::CandidatePool(const ObservedMatrix& data, double lambda)
    : data_(&data), lambda_(lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  dists_.resize(data.n(), 0);
  costs_.resize(data.n(), 0);
}

int CandidatePool::add_basis(SubspaceBasis basis) {
  if (basis.ambient_dim() != data_->d()) {
    throw std::invalid_argument("basis ambient dimension mismatch");
  }
  const int t = size();
  dists_.conservativeResize(Eigen::NoChange, t + 1);
  costs_.conservativeResize(Eigen::NoChange, t + 1);
  const double reg = lambda_ / data_->n() * basis.dim();
  for (int j = 0; j < data_->n(); ++j) {
    const double dist = column_residual_sq(*data_, basis, j);
    dists_(j, t) = dist;
    costs_(j, t) = dist + reg;
  }
  bases_.push_back(std::move(basis));
  sorted_valid_ = false;
  return t;
}

void CandidatePool::set_lambda(double lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  lambda_ = lambda;
  for (int t = 0; t < size(); ++t) {
    const double reg = lambda_ / data_->n() * rank(t);
    costs_.col(t) = dists_.col(t).array() + reg;
  }
  sorted_valid_ = false;
}

double CandidatePool::selection_cost(int t) const {
  const int r = rank(t);
  return lambda_ / data_->n() * r * (data_->d() - r);
}

const std::vector<int>& CandidatePool::sorted_by_cost(int j) const {
  if (!sorted_valid_) {
    sorted_.assign(static_cast<std::size_t>(n()), {});
    for (int q = 0; q < n(); ++q) {
      auto& order = sorted_[static_cast<std::size_t>(q)];
      order.resize(static_cast<std::size_t>(size()));
      for (int t = 0; t < size(); ++t) order[static_cast<std::size_t>(t)] = t;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ca = costs_(q, a), cb = costs_(q, b);
        return ca < cb || (ca == cb && a < b);
      });
    }
    sorted_valid_ = true;
  }
  return sorted_[static_cast<std::size_t>(j)];
}

PhiResult evaluate_phi(const CandidatePool& pool, int j, const Vector& z_hat) {
  return evaluate_phi_costs(pool.costs_row(j), pool.sorted_by_cost(j), z_hat);
}

bool BendersCut::same_as(const BendersCut& other) const {
  if (owner != other.owner) return false;
  if (std::abs(critical_cost - other.critical_cost) > tol::kCutDuplicate) return false;
  if (coeffs.size() != other.coeffs.size()) return false;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].first != other.coeffs[i].first) return false;
  }
  return true;
}

BendersCut build_cut(const CandidatePool& pool, int j, const Vector& z_hat) {
  return build_cut_costs(j, pool.costs_row(j), pool.sorted_by_cost(j), z_hat);
}

MasterState::MasterState(CandidatePool pool, std::optional<int> num_subspaces)
    : pool_(std::move(pool)), K_(num_subspaces) {
  const int n = pool_.n();
  for (int j = 0; j < n; ++j) {
    model_.add_variable(0.0, kInf, 1.0);  // w_j; costs are nonnegative
  }
  std::vector<std::pair<int, double>> card;
  for (int t = 0; t < pool_.size(); ++t) {
    model_.add_variable(0.0, 1.0, pool_.selection_cost(t));
    card.emplace_back(z_var(t), 1.0);
  }
  if (K_) {
    if (pool_.size() < *K_) throw std::invalid_argument("pool smaller than K");
    model_.add_constraint(std::move(card), Sense::eq, static_cast<double>(*K_));
  } else {
    // With K unknown the cardinality row relaxes to "select something";
    // otherwise early masters with no cuts would put no mass on z.
    model_.add_constraint(std::move(card), Sense::ge, 1.0);
  }
  cuts_.resize(static_cast<std::size_t>(n));
}

int MasterState::add_basis(SubspaceBasis basis) {
  const int t = pool_.add_basis(std::move(basis));
  model_.add_variable(0.0, 1.0, pool_.selection_cost(t));
  model_.add_term(0, z_var(t), 1.0);  // cardinality row is always row 0
  warm_valid_ = false;                // column count changed
  has_solution_ = false;
  return t;
}

void MasterState::remove_all_cuts() {
  model_.remove_group(1);
  for (auto& per_j : cuts_) per_j.clear();
  cut_rows_.clear();
  warm_valid_ = false;
  has_solution_ = false;
}

bool MasterState::add_cut(BendersCut cut) {
  auto& per_j = cuts_[static_cast<std::size_t>(cut.owner)];
  for (const BendersCut& existing : per_j) {
    if (existing.same_as(cut)) return false;
  }
  std::vector<std::pair<int, double>> terms;
  terms.reserve(cut.coeffs.size() + 1);
  terms.emplace_back(cut.owner, 1.0);
  for (const auto& [t, coef] : cut.coeffs) terms.emplace_back(z_var(t), coef);
  model_.add_constraint(std::move(terms), Sense::ge, cut.critical_cost, 1);
  cut_rows_.emplace_back(cut.owner, static_cast<int>(per_j.size()));
  per_j.push_back(std::move(cut));
  return true;
}

LpStatus MasterState::try_solve() {
  LpSolution sol = simplex_.solve(model_, warm_valid_ ? &last_.basis : nullptr);
  if (sol.status != LpStatus::optimal) {
    warm_valid_ = false;
    return sol.status;
  }
  last_ = std::move(sol);
  has_solution_ = true;
  warm_valid_ = true;
  return LpStatus::optimal;
}

const LpSolution& MasterState::solve_master() {
  const LpStatus st = try_solve();
  if (st == LpStatus::iteration_limit) {
    throw std::runtime_error("master LP hit the iteration limit");
  }
  if (st != LpStatus::optimal) {
    throw std::runtime_error(st == LpStatus::infeasible ? "master LP infeasible"
                                                        : "master LP unbounded");
  }
  return last_;
}

Vector MasterState::z_vector() const {
  Vector z(pool_.size());
  for (int t = 0; t < pool_.size(); ++t) z(t) = last_.x(z_var(t));
  return z;
}

const LpSolution& MasterState::cut_loop() {
  if (K_ && pool_.size() < *K_) {
    throw std::runtime_error("cut_loop needs at least K candidate subspaces");
  }
  while (true) {
    solve_master();
    const Vector z = z_vector();
    int added = 0;
    for (int j = 0; j < pool_.n(); ++j) {
      const PhiResult phi = evaluate_phi(pool_, j, z);
      if (phi.phi - w_value(j) > tol::kPhiViolation * (1.0 + std::abs(phi.phi))) {
        if (add_cut(build_cut(pool_, j, z))) ++added;
      }
    }
    if (added == 0) return last_;
  }
}

MasterDuals MasterState::extract_duals() const {
  if (!has_solution_) throw std::logic_error("no master solution available");
  MasterDuals duals;
  duals.beta = last_.row_duals(0);
  duals.cuts.reserve(cut_rows_.size());
  for (std::size_t i = 0; i < cut_rows_.size(); ++i) {
    const auto& [j, idx] = cut_rows_[i];
    CutDual cd;
    cd.owner = j;
    cd.alpha = last_.row_duals(1 + static_cast<int>(i));
    cd.critical_cost = cuts_[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx)].critical_cost;
    duals.cuts.push_back(cd);
  }
  duals.mu = Vector::Zero(pool_.size());
  for (int t = 0; t < pool_.size(); ++t) {
    if (last_.basis.status[static_cast<std::size_t>(z_var(t))] == VarStatus::nonbasic_upper) {
      duals.mu(t) = std::min(last_.reduced_costs(z_var(t)), 0.0);
    }
  }
  return duals;
}

double MasterState::objective_drift() const {
  double expect = 0.0;
  for (int j = 0; j < pool_.n(); ++j) expect += w_value(j);
  for (int t = 0; t < pool_.size(); ++t) {
    expect += pool_.selection_cost(t) * last_.x(z_var(t));
  }
  return std::abs(expect - last_.objective);
}

std::string MasterState::dump_cuts() const {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  bool first = true;
  for (int j = 0; j < pool_.n(); ++j) {
    for (const BendersCut& cut : cuts_[static_cast<std::size_t>(j)]) {
      if (!first) out << ",";
      first = false;
      out << "\n  {\"j\": " << j << ", \"critical_cost\": " << cut.critical_cost
          << ", \"support\": [";
      for (std::size_t k = 0; k < cut.coeffs.size(); ++k) {
        out << (k ? ", " : "") << cut.coeffs[k].first;
      }
      out << "]}";
    }
  }
  out << "\n]\n";
  return out.str();
}

LpModel build_direct_relaxation(const CandidatePool& pool, std::optional<int> K) {
  const int n = pool.n();
  const int T = pool.size();
  LpModel lp;
  // x_{jt} laid out j-major, then z_t.
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < T; ++t) {
      lp.add_variable(0.0, 1.0, pool.cost(j, t));
    }
  }
  const int z0 = n * T;
  for (int t = 0; t < T; ++t) lp.add_variable(0.0, 1.0, pool.selection_cost(t));

  std::vector<std::pair<int, double>> terms;
  for (int j = 0; j < n; ++j) {
    terms.clear();
    for (int t = 0; t < T; ++t) terms.emplace_back(j * T + t, 1.0);
    lp.add_constraint(terms, Sense::eq, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    for (int t = 0; t < T; ++t) {
      lp.add_constraint({{j * T + t, 1.0}, {z0 + t, -1.0}}, Sense::le, 0.0);
    }
  }
  terms.clear();
  for (int t = 0; t < T; ++t) terms.emplace_back(z0 + t, 1.0);
  lp.add_constraint(terms, K ? Sense::eq : Sense::ge, K ? static_cast<double>(*K) : 1.0);
  return lp;
}

}  // namespace scmd
