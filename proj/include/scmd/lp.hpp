#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scmd/linalg.hpp"

namespace scmd {

enum class Sense : unsigned char { le, eq, ge };
enum class LpStatus : unsigned char { optimal, infeasible, unbounded, iteration_limit };

// Minimization LP with bounded variables and taggable constraint rows.
// Mutation is incremental: variables and rows can be appended and whole
// row groups removed (used to drop all Benders cuts at once).
class LpModel {
 public:
  struct Row {
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
    Sense sense = Sense::le;
    double rhs = 0.0;
    int tag = 0;
  };

  int add_variable(double lo, double hi, double obj);
  int add_constraint(std::vector<std::pair<int, double>> terms, Sense sense,
                     double rhs, int tag = 0);
  void add_term(int row, int var, double coef);
  void remove_group(int tag);

  void set_bounds(int var, double lo, double hi);
  void set_objective_coeff(int var, double c);

  int num_vars() const { return static_cast<int>(obj_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  double lower(int var) const { return lo_[static_cast<std::size_t>(var)]; }
  double upper(int var) const { return hi_[static_cast<std::size_t>(var)]; }
  double objective_coeff(int var) const { return obj_[static_cast<std::size_t>(var)]; }
  const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }

  // Human-readable inequality listing (see docs/lp_format.md).
  std::string to_text() const;

 private:
  std::vector<double> lo_, hi_, obj_;
  std::vector<Row> rows_;
};

enum class VarStatus : unsigned char {
  nonbasic_lower,
  nonbasic_upper,
  nonbasic_free,  // value 0
  basic,
};

// Column statuses for all structural variables followed by one slack per
// row. Valid when exactly num_rows entries are basic.
struct LpBasis {
  std::vector<VarStatus> status;
};

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  Vector x;              // structural variable values
  double objective = 0.0;
  Vector row_duals;      // y_i = d(objective)/d(rhs_i)
  Vector reduced_costs;  // per structural variable
  LpBasis basis;
  long iterations = 0;

  bool optimal() const { return status == LpStatus::optimal; }
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-8;
  long max_iterations = 0;  // 0: automatic from problem size
  int refactor_every = 100;
};

// Bounded-variable revised simplex over a sparse basis (SparseLU plus
// product-form eta updates). A warm basis from a previous solve of the
// same model shape is used when still valid: primal phase 2 if primal
// feasible, dual simplex if only dual feasible, phase 1 otherwise.
class RevisedSimplex {
 public:
  explicit RevisedSimplex(SimplexOptions opts = {}) : opts_(opts) {}

  LpSolution solve(const LpModel& model, const LpBasis* warm = nullptr);

 private:
  SimplexOptions opts_;
};

// Independent certificate checks used by the tests.
double primal_infeasibility(const LpModel& model, const Vector& x);
double duality_gap(const LpModel& model, const LpSolution& sol);

}  // namespace scmd
