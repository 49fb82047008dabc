#include "scmd/completion.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace scmd {

namespace {

SubspaceBasis random_orthonormal(int d, int r, Rng& rng) {
  Matrix m(d, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < d; ++i) m(i, j) = rng.normal();
  }
  return orthonormalize(m);
}

bool fully_observed(const ObservedMatrix& data) {
  return data.observed_count() == static_cast<long>(data.d()) * data.n();
}

}  // namespace

SubspaceBasis grouse_fit(const ObservedMatrix& data, int rank,
                         const CompletionConfig& cfg, const SubspaceBasis* init,
                         const std::function<void(const SubspaceBasis&)>& on_update) {
  const int d = data.d();
  const int n = data.n();
  if (rank >= d) throw std::invalid_argument("rank must be < d");
  if (n < rank) throw std::invalid_argument("need at least `rank` columns");

  Rng rng(cfg.seed);
  SubspaceBasis u = init != nullptr ? *init : random_orthonormal(d, rank, rng);

  double total_sq = 0.0;
  for (int j = 0; j < n; ++j) total_sq += data.observed_values(j).squaredNorm();

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  Vector residual_full = Vector::Zero(d);
  bool warned = false;
  for (int pass = 0; pass < cfg.max_passes; ++pass) {
    rng.shuffle(order);
    double pass_residual = 0.0;
    for (int j : order) {
      const auto& rows = data.observed_rows(j);
      if (rows.empty()) {
        if (!warned) {
          std::cerr << "grouse_fit: skipping column " << j
                    << " with no observations\n";
          warned = true;
        }
        continue;
      }
      const Matrix u_obs = restrict_rows(u.basis, rows);
      const Vector x_obs = data.observed_values(j);
      const auto fit = partial_least_squares(u_obs, x_obs);
      pass_residual += fit.residual_sq;

      const double res_norm = std::sqrt(std::max(fit.residual_sq, 0.0));
      const Vector p = u.basis * fit.coeffs;
      const double p_norm = p.norm();
      const double w_norm = fit.coeffs.norm();
      if (res_norm <= 1e-13 * (1.0 + x_obs.norm()) || p_norm <= 1e-13 ||
          w_norm <= 1e-13) {
        continue;
      }
      residual_full.setZero();
      const Vector pred_obs = u_obs * fit.coeffs;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        residual_full(rows[k]) = x_obs(static_cast<Eigen::Index>(k)) - pred_obs(static_cast<Eigen::Index>(k));
      }
      // Rotation in span{p, residual}; the greedy angle absorbs the whole
      // residual for this column.
      const double theta = cfg.step_scale * std::atan2(res_norm, p_norm);
      const Vector direction =
          (std::cos(theta) - 1.0) * (p / p_norm) + std::sin(theta) * (residual_full / res_norm);
      u.basis.noalias() += direction * (fit.coeffs / w_norm).transpose();
      if (on_update) on_update(u);
    }
    // Keep roundoff from accumulating across passes.
    u = orthonormalize(u.basis);
    if (pass_residual <= cfg.tolerance * std::max(total_sq, 1e-300)) break;
  }
  return u;
}

SubspaceBasis best_fit_subspace(const ObservedMatrix& data, int rank,
                                const CompletionConfig& cfg) {
  if (data.n() < rank) throw std::invalid_argument("need at least `rank` columns");
  if (fully_observed(data)) {
    const ThinSvd svd = thin_svd(data.raw_values());
    if (svd.U.cols() < rank) throw std::invalid_argument("rank exceeds column count");
    return SubspaceBasis{svd.U.leftCols(rank)};
  }
  CompletionConfig c = cfg;
  c.rank = rank;
  return grouse_fit(data, rank, c);
}

SvtResult svt_complete(const ObservedMatrix& data, const CompletionConfig& cfg) {
  const int d = data.d();
  const int n = data.n();
  SvtResult result;
  if (fully_observed(data)) {
    result.completed = data.raw_values();
    return result;
  }

  double abs_sum = 0.0;
  double norm_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const Vector v = data.observed_values(j);
    abs_sum += v.cwiseAbs().sum();
    norm_sq += v.squaredNorm();
  }
  const long obs = data.observed_count();
  const double tau = cfg.svt_tau_scale * std::sqrt(static_cast<double>(d) * n) *
                     (obs > 0 ? abs_sum / static_cast<double>(obs) : 0.0);
  const double obs_fraction = static_cast<double>(obs) / (static_cast<double>(d) * n);
  const double delta = cfg.svt_step > 0.0 ? cfg.svt_step : 1.2 / obs_fraction;

  Matrix y = Matrix::Zero(d, n);
  Matrix x = Matrix::Zero(d, n);
  Matrix best = x;
  double best_err = kInf;
  double prev_err = kInf;
  int worse_streak = 0;

  for (int it = 1; it <= cfg.svt_max_iterations; ++it) {
    result.iterations = it;
    ThinSvd svd = thin_svd(y);
    for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
      svd.s(i) = std::max(svd.s(i) - tau, 0.0);
    }
    x = svd.U * svd.s.asDiagonal() * svd.Vt;

    double err = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i : data.observed_rows(j)) {
        const double diff = data.value(i, j) - x(i, j);
        err += diff * diff;
        y(i, j) += delta * diff;
      }
    }
    if (err < best_err) {
      best_err = err;
      best = x;
    }
    if (err <= cfg.tolerance * std::max(norm_sq, 1e-300)) break;
    if (err > prev_err) {
      if (++worse_streak >= 10) {
        result.diverged = true;
        result.completed = std::move(best);
        return result;
      }
    } else {
      worse_streak = 0;
    }
    prev_err = err;
  }
  result.completed = std::move(best);
  return result;
}

GroupwiseResult groupwise_complete(const ObservedMatrix& data,
                                   const std::vector<int>& labels,
                                   const GroupwiseMode& mode,
                                   const CompletionConfig& cfg) {
  const int n = data.n();
  const int d = data.d();
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("labels must cover all columns");
  }
  int num_clusters = 0;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("labels must be nonnegative");
    num_clusters = std::max(num_clusters, l + 1);
  }
  const auto* known = std::get_if<RankKnown>(&mode);
  if (known && static_cast<int>(known->ranks.size()) != num_clusters) {
    throw std::invalid_argument("rank list must cover every cluster");
  }

  GroupwiseResult out;
  out.completed = Matrix::Zero(d, n);
  for (int j = 0; j < n; ++j) {
    for (int i : data.observed_rows(j)) out.completed(i, j) = data.value(i, j);
  }
  out.cluster_flagged.assign(static_cast<std::size_t>(num_clusters), false);

  for (int k = 0; k < num_clusters; ++k) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j) {
      if (labels[static_cast<std::size_t>(j)] == k) cols.push_back(j);
    }
    if (cols.empty()) continue;
    bool missing = false;
    for (int j : cols) {
      if (static_cast<int>(data.observed_rows(j).size()) < d) missing = true;
    }
    if (!missing) continue;  // nothing to fill for this cluster

    const ObservedMatrix sub = select_columns(data, cols);
    CompletionConfig sub_cfg = cfg;
    sub_cfg.seed = cfg.seed + static_cast<std::uint64_t>(k) + 1;

    if (cols.size() < 2) {
      // Rank-1 fallback: fill missing rows of the lone column with zero
      // outside its observed span.
      out.cluster_flagged[static_cast<std::size_t>(k)] = true;
      continue;
    }

    if (known != nullptr) {
      const int rank = std::min(known->ranks[static_cast<std::size_t>(k)],
                                static_cast<int>(cols.size()));
      SubspaceBasis basis;
      try {
        basis = best_fit_subspace(sub, rank, sub_cfg);
      } catch (const std::exception&) {
        out.cluster_flagged[static_cast<std::size_t>(k)] = true;
        continue;
      }
      for (int j : cols) {
        const auto& rows = data.observed_rows(j);
        if (static_cast<int>(rows.size()) == d) continue;
        const auto fit = partial_least_squares(restrict_rows(basis.basis, rows),
                                               data.observed_values(j));
        const Vector filled = basis.basis * fit.coeffs;
        for (int i = 0; i < d; ++i) {
          if (!data.is_observed(i, j)) out.completed(i, j) = filled(i);
        }
      }
    } else {
      const SvtResult svt = svt_complete(sub, sub_cfg);
      if (svt.diverged) out.cluster_flagged[static_cast<std::size_t>(k)] = true;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const int j = cols[c];
        for (int i = 0; i < d; ++i) {
          if (!data.is_observed(i, j)) {
            out.completed(i, j) = svt.completed(i, static_cast<Eigen::Index>(c));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace scmd
