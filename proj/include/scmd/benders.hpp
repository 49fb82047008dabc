#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scmd/instances.hpp"
#include "scmd/linalg.hpp"
#include "scmd/lp.hpp"

namespace scmd {

// Candidate subspaces [T] with the assignment cost matrix
// c_jt = dist(j, t) + (lambda/n) r_t. The dist part is immutable per
// (column, basis); costs and the per-column cost orderings are rebuilt
// lazily when lambda changes or bases are added.
class CandidatePool {
 public:
  CandidatePool(const ObservedMatrix& data, double lambda);

  int add_basis(SubspaceBasis basis);  // returns t
  void set_lambda(double lambda);

  int size() const { return static_cast<int>(bases_.size()); }
  int n() const { return data_->n(); }
  int d() const { return data_->d(); }
  double lambda() const { return lambda_; }
  const ObservedMatrix& data() const { return *data_; }
  const SubspaceBasis& basis(int t) const { return bases_[static_cast<std::size_t>(t)]; }
  int rank(int t) const { return bases_[static_cast<std::size_t>(t)].dim(); }

  double cost(int j, int t) const { return costs_(j, t); }
  double dist(int j, int t) const { return dists_(j, t); }
  auto costs_row(int j) const { return costs_.row(j); }
  // Effective-dimension selection weight of subspace t: (lambda/n) r(d-r).
  double selection_cost(int t) const;

  // Column indices of [T] sorted by (cost(j, .), t) ascending.
  const std::vector<int>& sorted_by_cost(int j) const;

 private:
  const ObservedMatrix* data_;
  double lambda_;
  std::vector<SubspaceBasis> bases_;
  Matrix dists_;   // n x T, squared residuals on observed entries
  Matrix costs_;   // n x T
  mutable std::vector<std::vector<int>> sorted_;
  mutable bool sorted_valid_ = false;
};

struct PhiResult {
  double phi = 0.0;
  int critical = -1;  // subspace index receiving the last assignment mass
};

// Minimum fractional assignment cost of column j under capacities z_hat;
// throws when sum(z_hat) < 1 - 1e-9 ("infeasible assignment").
PhiResult evaluate_phi(const CandidatePool& pool, int j, const Vector& z_hat);

// Same greedy fill on an explicit cost row; `order` must sort the costs
// ascending (ties by index).
template <typename CostRow>
PhiResult evaluate_phi_costs(const CostRow& costs, const std::vector<int>& order,
                             const Vector& z_hat) {
  double mass = 0.0;
  double phi = 0.0;
  for (int t : order) {
    const double cap = z_hat(t) < 0.0 ? 0.0 : (z_hat(t) > 1.0 ? 1.0 : z_hat(t));
    if (cap <= 0.0) continue;
    const double take = cap < 1.0 - mass ? cap : 1.0 - mass;
    phi += costs(t) * take;
    mass += take;
    if (mass >= 1.0 - 1e-12) {
      return PhiResult{phi, t};
    }
  }
  if (mass < 1.0 - 1e-9) {
    throw std::runtime_error("infeasible assignment: sum(z) < 1");
  }
  // mass within rounding of 1: the last positive-capacity entry was critical
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (z_hat(*it) > 0.0) return PhiResult{phi, *it};
  }
  throw std::runtime_error("infeasible assignment: empty z");
}

struct BendersCut {
  int owner = -1;            // column j
  double critical_cost = 0;  // c*_{ji}
  std::vector<std::pair<int, double>> coeffs;  // (t, c* - c_jt) > 0, sorted by t

  bool same_as(const BendersCut& other) const;
};

// Cut generated at z_hat; tight there and a global underestimate of Phi_j.
BendersCut build_cut(const CandidatePool& pool, int j, const Vector& z_hat);

template <typename CostRow>
BendersCut build_cut_costs(int owner, const CostRow& costs,
                           const std::vector<int>& order, const Vector& z_hat) {
  const PhiResult phi = evaluate_phi_costs(costs, order, z_hat);
  BendersCut cut;
  cut.owner = owner;
  cut.critical_cost = costs(phi.critical);
  for (int t : order) {
    if (t == phi.critical) break;
    const double coef = cut.critical_cost - costs(t);
    if (coef > 0.0) cut.coeffs.emplace_back(t, coef);
  }
  std::sort(cut.coeffs.begin(), cut.coeffs.end());
  return cut;
}

struct CutDual {
  int owner = -1;
  double alpha = 0.0;
  double critical_cost = 0.0;
};

struct MasterDuals {
  std::vector<CutDual> cuts;  // every cut row, including alpha = 0 ones
  double beta = 0.0;          // cardinality row
  Vector mu;                  // per z_t upper bound
};

// Benders master LP over (w, z): min sum w_j + sum selection_cost(t) z_t
// with accumulated cuts; sum z = K when K is known, sum z >= 1 otherwise.
class MasterState {
 public:
  MasterState(CandidatePool pool, std::optional<int> num_subspaces);

  CandidatePool& pool() { return pool_; }
  const CandidatePool& pool() const { return pool_; }
  std::optional<int> num_subspaces() const { return K_; }

  // Appends a basis to the pool and a fresh z column to the LP.
  int add_basis(SubspaceBasis basis);

  // Drops every accumulated Benders cut (they are invalid once new z
  // variables exist).
  void remove_all_cuts();

  // True if appended (duplicates are discarded).
  bool add_cut(BendersCut cut);

  // Solves the current master LP (warm started when possible).
  const LpSolution& solve_master();

  // Same solve without throwing on a non-optimal status (branch-and-bound
  // nodes can be infeasible); the stored solution is only updated when
  // optimal.
  LpStatus try_solve();

  // Alternates master solves and cut generation to the fixed point
  // Phi_j(z) <= w_j + tol for all j; returns the final solution.
  const LpSolution& cut_loop();

  const LpSolution& last_solution() const { return last_; }
  bool has_solution() const { return has_solution_; }
  double w_value(int j) const { return last_.x(j); }
  double z_value(int t) const { return last_.x(pool_.n() + t); }
  Vector z_vector() const;

  MasterDuals extract_duals() const;

  int total_cuts() const { return static_cast<int>(cut_rows_.size()); }
  const std::vector<BendersCut>& cuts_for(int j) const { return cuts_[static_cast<std::size_t>(j)]; }

  // Objective consistency: LP objective equals sum(w) + sum(sel cost * z).
  double objective_drift() const;

  // Diagnostic dump of the cut pool as JSON.
  std::string dump_cuts() const;

  LpModel& model() { return model_; }
  const LpModel& model() const { return model_; }

 private:
  int z_var(int t) const { return pool_.n() + t; }

  CandidatePool pool_;
  std::optional<int> K_;
  LpModel model_;
  RevisedSimplex simplex_;
  std::vector<std::vector<BendersCut>> cuts_;     // per j
  std::vector<std::pair<int, int>> cut_rows_;     // row order -> (j, index in cuts_[j])
  LpSolution last_;
  bool has_solution_ = false;
  bool warm_valid_ = false;
};

// Full LP relaxation of the assignment formulation in (x, z) variables,
// solved without any decomposition; used by the benchmark and as the
// equivalence oracle for cut_loop.
LpModel build_direct_relaxation(const CandidatePool& pool, std::optional<int> K);

}  // namespace scmd
