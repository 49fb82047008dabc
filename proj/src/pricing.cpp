#include "scmd/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "scmd/tolerances.hpp"

namespace scmd {

namespace {

constexpr double kAlphaDrop = 1e-12;

// h_j(U) = dist(j, U) + (lambda/n) r, with the fitted coefficients kept
// for the gradient.
struct ColumnFit {
  double h = 0.0;
  Vector coeffs;
  Vector residual_obs;  // over observed rows, x - U_obs v
  bool valid = false;
};

ColumnFit fit_column(const PricingContext& ctx, const SubspaceBasis& basis, int j) {
  ColumnFit fit;
  const auto& rows = ctx.data->observed_rows(j);
  const Matrix u_obs = restrict_rows(basis.basis, rows);
  const Vector x_obs = ctx.data->observed_values(j);
  const auto lsq = partial_least_squares(u_obs, x_obs);
  fit.h = lsq.residual_sq + ctx.lambda / ctx.n() * basis.dim();
  fit.coeffs = lsq.coeffs;
  fit.residual_obs = x_obs - u_obs * lsq.coeffs;
  fit.valid = true;
  return fit;
}

}  // namespace

PricingContext make_pricing_context(const MasterState& master) {
  PricingContext ctx;
  ctx.data = &master.pool().data();
  ctx.lambda = master.pool().lambda();
  const MasterDuals duals = master.extract_duals();
  ctx.beta = duals.beta;
  ctx.terms.resize(static_cast<std::size_t>(ctx.n()));
  std::vector<double> alpha_sum(static_cast<std::size_t>(ctx.n()), 0.0);
  for (const CutDual& cd : duals.cuts) {
    alpha_sum[static_cast<std::size_t>(cd.owner)] += cd.alpha;
    if (cd.alpha > kAlphaDrop) {
      ctx.terms[static_cast<std::size_t>(cd.owner)].push_back(
          PricingContext::Term{cd.alpha, cd.critical_cost});
    }
  }
  // Dual identity: the w_j column prices out to 1 - sum_i alpha_ji, so a
  // basic w_j forces the sum to one.
  const LpSolution& sol = master.last_solution();
  for (int j = 0; j < ctx.n(); ++j) {
    if (sol.basis.status[static_cast<std::size_t>(j)] == VarStatus::basic &&
        std::abs(alpha_sum[static_cast<std::size_t>(j)] - 1.0) > 1e-5) {
      throw std::logic_error("master duals violate sum(alpha_j) = 1 for basic w_j");
    }
  }
  return ctx;
}

double reduced_cost(const PricingContext& ctx, const SubspaceBasis& basis) {
  const int r = basis.dim();
  double value = ctx.lambda / ctx.n() * r * (ctx.d() - r) - ctx.beta;
  for (int j = 0; j < ctx.n(); ++j) {
    const auto& terms = ctx.terms[static_cast<std::size_t>(j)];
    if (terms.empty()) continue;
    const ColumnFit fit = fit_column(ctx, basis, j);
    for (const auto& term : terms) {
      const double gain = term.critical_cost - fit.h;
      if (gain > 0.0) value -= term.alpha * gain;
    }
  }
  return value;
}

Matrix pricing_gradient(const PricingContext& ctx, const SubspaceBasis& basis) {
  const int r = basis.dim();
  Matrix grad = Matrix::Zero(ctx.d(), r);
  for (int j = 0; j < ctx.n(); ++j) {
    const auto& terms = ctx.terms[static_cast<std::size_t>(j)];
    if (terms.empty()) continue;
    const ColumnFit fit = fit_column(ctx, basis, j);
    double active_alpha = 0.0;
    for (const auto& term : terms) {
      if (term.critical_cost - fit.h > 0.0) active_alpha += term.alpha;
    }
    if (active_alpha <= 0.0) continue;
    // d h_j / d U_ab = -2 (x_a - u_a^T v) v_b on observed rows a.
    const auto& rows = ctx.data->observed_rows(j);
    const double scale = -2.0 * active_alpha;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      grad.row(rows[k]) += scale * fit.residual_obs(static_cast<Eigen::Index>(k)) *
                           fit.coeffs.transpose();
    }
  }
  return grad;
}

double polyak_surrogate(const PricingContext& ctx, int rank) {
  double value = ctx.lambda / ctx.n() * rank * (ctx.d() - rank) - ctx.beta;
  for (const auto& terms : ctx.terms) {
    for (const auto& term : terms) {
      if (term.critical_cost > 0.0) value -= term.alpha * term.critical_cost;
    }
  }
  return value;
}

namespace {

bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.dim() != b.dim()) return false;
  return largest_principal_angle(a, b) < tol::kSameSubspaceAngle;
}

}  // namespace

PricingResult run_pricing(const PricingContext& ctx, const PricingRunConfig& cfg,
                          const SubspaceBasis& u0, const PricingTrace& trace) {
  if (u0.dim() != cfg.rank) throw std::invalid_argument("u0 rank mismatch");
  PricingResult result;
  SubspaceBasis u = u0;
  const double surrogate = polyak_surrogate(ctx, cfg.rank);

  // Stored bases must satisfy the orthonormality invariant even when the
  // iterate is mid-way between re-orthonormalizations; the span (and hence
  // the reduced cost) is unchanged by the cleanup.
  auto store = [&](const Matrix& raw, double value) {
    SubspaceBasis candidate;
    try {
      candidate = orthonormalize(raw);
    } catch (const std::invalid_argument&) {
      return;
    }
    for (std::size_t i = 0; i < result.bases.size(); ++i) {
      if (same_subspace(result.bases[i], candidate)) {
        if (value < result.reduced_costs[i]) {
          result.bases[i] = std::move(candidate);
          result.reduced_costs[i] = value;
        }
        return;
      }
    }
    result.bases.push_back(std::move(candidate));
    result.reduced_costs.push_back(value);
  };

  int it = 0;
  bool stepped_last = false;
  while (it < cfg.max_iterations) {
    const double g = reduced_cost(ctx, u);
    const Matrix grad = pricing_gradient(ctx, u);
    const double grad_sq = grad.squaredNorm();
    if (!std::isfinite(g) || !std::isfinite(grad_sq)) {
      result.aborted = true;
      break;
    }
    stepped_last = false;
    if (g < 0.0) store(u.basis, g);
    const double grad_norm = std::sqrt(grad_sq);
    if (grad_norm <= cfg.grad_tolerance) break;
    if (grad_sq < tol::kGradZero) break;  // Polyak step undefined

    const double step = std::min(cfg.step_cap, (g - surrogate) / grad_sq);
    if (trace) trace(PricingTraceRow{it, g, grad_norm, step});
    if (step <= 0.0) break;
    Matrix next = u.basis - step * grad;
    ++it;
    stepped_last = true;
    if (it % cfg.reorthonormalize_every == 0) {
      try {
        u = orthonormalize(next);
      } catch (const std::invalid_argument&) {
        result.aborted = true;  // degenerate iterate
        break;
      }
    } else {
      u.basis = std::move(next);
    }
  }
  if (!result.aborted && stepped_last) {
    // The loop exited right after a step; evaluate that final iterate too.
    const double g = reduced_cost(ctx, u);
    if (std::isfinite(g) && g < 0.0) store(u.basis, g);
  }
  result.iterations = it;
  return result;
}

SubspaceBasis initialize_u0(const Vector& w_values, const ObservedMatrix& data,
                            int rank, int r_max, Rng& rng) {
  const int n = data.n();
  const int want = 2 * rank;
  if (n < want) throw std::invalid_argument("initialize_u0 needs >= 2r columns");
  const int m = std::min(5 * r_max, n);

  // Top-m columns by w, ties broken by index.
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) idx[static_cast<std::size_t>(j)] = j;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return w_values(a) > w_values(b) || (w_values(a) == w_values(b) && a < b);
  });
  idx.resize(static_cast<std::size_t>(std::max(m, want)));

  const std::vector<int> picks = rng.sample_without_replacement(
      static_cast<int>(idx.size()), want);
  std::vector<int> cols;
  cols.reserve(picks.size());
  for (int p : picks) cols.push_back(idx[static_cast<std::size_t>(p)]);
  std::sort(cols.begin(), cols.end());

  CompletionConfig cfg;
  cfg.seed = rng.fork(0x9d).raw();
  try {
    return best_fit_subspace(select_columns(data, cols), rank, cfg);
  } catch (const std::exception&) {
    Matrix m0(data.d(), rank);
    for (int j = 0; j < rank; ++j) {
      for (int i = 0; i < data.d(); ++i) m0(i, j) = rng.normal();
    }
    return orthonormalize(m0);
  }
}

}  // namespace scmd
