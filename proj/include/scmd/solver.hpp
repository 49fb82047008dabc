#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scmd/benders.hpp"
#include "scmd/completion.hpp"
#include "scmd/instances.hpp"
#include "scmd/pricing.hpp"

namespace scmd {

struct SolverConfig {
  std::optional<int> K;                         // number of subspaces, when known
  std::optional<std::vector<int>> dims_known;   // allowed subspace dimensions, when known
  int r_max = 0;                                // required when dims unknown
  double lambda = 0.0;
  int initial_per_dim = 0;   // b; 0 splits 300 subspaces evenly across dims
  int i_max = 15;
  int eta_min = 5;
  int eta_max = 15;
  double time_limit_seconds = 5000.0;
  double mip_gap = 1e-6;
  std::uint64_t seed = 0;

  int pricing_max_iterations = 500;
  double pricing_grad_tolerance = 1e-3;
  double pricing_step_cap = 0.1;

  // Test affordances: seed the pool explicitly and/or skip column generation.
  std::vector<SubspaceBasis> forced_pool;
  bool enable_pricing = true;

  std::vector<int> pricing_dims(int d) const;
  void validate(int d, int n) const;
};

struct RootIterationLog {
  int root_iteration = 0;
  double lp_objective = 0.0;
  int columns_added = 0;
  int cuts_added = 0;
};

struct ClusteringSolution {
  std::vector<SubspaceBasis> selected;
  std::vector<int> labels;        // per column: index into `selected`
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  std::vector<double> residuals;  // squared residual to the assigned subspace
  double wall_clock_seconds = 0.0;
  std::vector<RootIterationLog> iterations;
  bool hit_time_limit = false;
};

// Raised when the time limit expires before any incumbent exists; carries
// the best lower bound proven so far.
struct TimeLimitNoIncumbent : std::runtime_error {
  explicit TimeLimitNoIncumbent(double bound_value)
      : std::runtime_error("time limit reached with no incumbent"), bound(bound_value) {}
  double bound;
};

// Full pipeline: random pool seeding, root-node alternation of Benders cut
// loops and multi-start pricing, then branch-and-cut on the z variables
// with lazy cuts at integer candidates.
ClusteringSolution solve(const ObservedMatrix& data, const SolverConfig& cfg);

struct BranchAndCutResult {
  Vector z;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  bool hit_time_limit = false;
};

// Branch and bound over fractional z_t (most-fractional branching,
// best-bound node order), verifying assignment costs with Benders cuts at
// every integer candidate. Requires a converged root cut_loop.
BranchAndCutResult branch_and_cut(MasterState& master, const SolverConfig& cfg,
                                  double deadline_seconds);

enum class Regime {
  k_known_r_known,
  k_known_r_unknown,
  k_unknown_r_known,
  k_unknown_r_unknown,
};

// Validates config/regime consistency (lambda > 0 whenever anything is
// unknown) and runs solve() with the matching constraint set.
ClusteringSolution solve_regime(const ObservedMatrix& data, Regime regime,
                                const SolverConfig& cfg);

// Assignment labels from selected bases: pointwise cheapest subspace.
std::vector<int> assign_columns(const CandidatePool& pool, const std::vector<int>& selected);

}  // namespace scmd
