#pragma once

#include <functional>
#include <vector>

#include "scmd/benders.hpp"
#include "scmd/completion.hpp"
#include "scmd/instances.hpp"
#include "scmd/rng.hpp"

namespace scmd {

// Master duals reshaped for the pricing objective: per column j, the list
// of (alpha, critical cost) pairs from its cuts.
struct PricingContext {
  const ObservedMatrix* data = nullptr;
  double lambda = 0.0;
  double beta = 0.0;
  struct Term {
    double alpha;
    double critical_cost;
  };
  std::vector<std::vector<Term>> terms;  // per column

  int d() const { return data->d(); }
  int n() const { return data->n(); }
};

// Builds the context from the last master solution. Verifies the dual
// identity sum_i alpha_ji = 1 for every j whose w_j is basic.
PricingContext make_pricing_context(const MasterState& master);

// Reduced cost of the column a rank-r basis would add:
// (lambda/n) r (d - r) - sum_j sum_i alpha_ji max(c*_ji - h_j(U), 0) - beta.
double reduced_cost(const PricingContext& ctx, const SubspaceBasis& basis);

// Gradient of the pricing objective at `basis` (zero subgradient at kinks;
// only observed rows receive mass).
Matrix pricing_gradient(const PricingContext& ctx, const SubspaceBasis& basis);

// Basis-independent lower bound on the pricing objective obtained by
// zeroing every h_j; feeds the Polyak step.
double polyak_surrogate(const PricingContext& ctx, int rank);

struct PricingRunConfig {
  int rank = 1;
  int max_iterations = 500;
  double grad_tolerance = 1e-3;
  double step_cap = 0.1;
  int reorthonormalize_every = 10;
  std::uint64_t seed = 0;
};

struct PricingResult {
  std::vector<SubspaceBasis> bases;        // negative reduced cost, deduplicated
  std::vector<double> reduced_costs;       // aligned with bases
  int iterations = 0;
  bool aborted = false;                    // NaN gradient cut the run short
};

struct PricingTraceRow {
  int iteration;
  double objective;
  double grad_norm;
  double step;
};
using PricingTrace = std::function<void(const PricingTraceRow&)>;

// Polyak-stepped gradient descent from u0, collecting every iterate with a
// negative reduced cost (deduplicated by principal angle).
PricingResult run_pricing(const PricingContext& ctx, const PricingRunConfig& cfg,
                          const SubspaceBasis& u0, const PricingTrace& trace = nullptr);

// Best-fit basis of 2r columns sampled from the min(5 r_max, n) columns
// with the largest w values; random orthonormal fallback.
SubspaceBasis initialize_u0(const Vector& w_values, const ObservedMatrix& data,
                            int rank, int r_max, Rng& rng);

}  // namespace scmd
