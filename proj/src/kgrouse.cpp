#include "scmd/kgrouse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace scmd {

namespace {

SubspaceBasis random_basis(int d, int r, Rng& rng) {
  Matrix m(d, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < d; ++i) m(i, j) = rng.normal();
  }
  return orthonormalize(m);
}

SubspaceBasis fit_columns(const ObservedMatrix& data, const std::vector<int>& cols,
                          int r, const CompletionConfig& cfg, Rng& rng) {
  if (static_cast<int>(cols.size()) < std::max(r, 1)) {
    return random_basis(data.d(), r, rng);
  }
  CompletionConfig c = cfg;
  c.seed = rng.raw();
  try {
    return best_fit_subspace(select_columns(data, cols), r, c);
  } catch (const std::exception&) {
    return random_basis(data.d(), r, rng);
  }
}

// Best-fit seed from 2r columns drawn with probability proportional to the
// current minimum residual (far points more likely).
SubspaceBasis farthest_seed(const ObservedMatrix& data,
                            const std::vector<SubspaceBasis>& current, int r,
                            const CompletionConfig& cfg, Rng& rng) {
  const int n = data.n();
  std::vector<double> weight(static_cast<std::size_t>(n), 1.0);
  if (!current.empty()) {
    for (int j = 0; j < n; ++j) {
      double best = kInf;
      for (const SubspaceBasis& b : current) {
        best = std::min(best, column_residual_sq(data, b, j));
      }
      weight[static_cast<std::size_t>(j)] = best;
    }
  }
  std::vector<int> picks;
  const int want = std::min(n, 2 * r);
  std::vector<double> w = weight;
  for (int k = 0; k < want; ++k) {
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total <= 0.0) break;
    double target = rng.uniform() * total;
    int chosen = n - 1;
    for (int j = 0; j < n; ++j) {
      target -= w[static_cast<std::size_t>(j)];
      if (target <= 0.0) {
        chosen = j;
        break;
      }
    }
    picks.push_back(chosen);
    w[static_cast<std::size_t>(chosen)] = 0.0;
  }
  std::sort(picks.begin(), picks.end());
  return fit_columns(data, picks, r, cfg, rng);
}

}  // namespace

ClusteringSolution kgrouse(const ObservedMatrix& data, const KGrouseConfig& cfg,
                           const KGrouseTrace& trace) {
  const auto start = std::chrono::steady_clock::now();
  const int n = data.n();
  if (cfg.K < 1 || cfg.r < 1 || cfg.r >= data.d()) {
    throw std::invalid_argument("kgrouse needs K >= 1 and 1 <= r < d");
  }
  Rng rng(cfg.seed);

  std::vector<SubspaceBasis> bases;
  bases.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    Rng krng = rng.fork(static_cast<std::uint64_t>(k) + 1);
    if (cfg.init == KGrouseInit::random) {
      bases.push_back(random_basis(data.d(), cfg.r, krng));
    } else {
      bases.push_back(farthest_seed(data, bases, cfg.r, cfg.completion, krng));
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<double> residuals(static_cast<std::size_t>(n), 0.0);
  double objective = 0.0;

  for (int outer = 1; outer <= cfg.max_outer_iterations; ++outer) {
    // assignment step: closest subspace by observed residual, ties by index
    int moved = 0;
    objective = 0.0;
    for (int j = 0; j < n; ++j) {
      int best = 0;
      double best_res = kInf;
      for (int k = 0; k < cfg.K; ++k) {
        const double res = column_residual_sq(data, bases[static_cast<std::size_t>(k)], j);
        if (res < best_res) {
          best_res = res;
          best = k;
        }
      }
      if (labels[static_cast<std::size_t>(j)] != best) ++moved;
      labels[static_cast<std::size_t>(j)] = best;
      residuals[static_cast<std::size_t>(j)] = best_res;
      objective += best_res;
    }
    if (trace) trace(KGrouseIterationStats{outer, objective, moved});
    if (moved == 0) break;

    // refit step
    for (int k = 0; k < cfg.K; ++k) {
      std::vector<int> cols;
      for (int j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)] == k) cols.push_back(j);
      }
      Rng krng = rng.fork((static_cast<std::uint64_t>(outer) << 20) + static_cast<std::uint64_t>(k));
      if (cols.empty()) {
        // reseed from the columns the current model explains worst
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
          return residuals[static_cast<std::size_t>(a)] > residuals[static_cast<std::size_t>(b)];
        });
        idx.resize(static_cast<std::size_t>(std::min(n, 2 * cfg.r)));
        std::sort(idx.begin(), idx.end());
        bases[static_cast<std::size_t>(k)] = fit_columns(data, idx, cfg.r, cfg.completion, krng);
        continue;
      }
      CompletionConfig c = cfg.completion;
      c.seed = krng.raw();
      const ObservedMatrix sub = select_columns(data, cols);
      if (static_cast<int>(cols.size()) >= cfg.r) {
        try {
          const SubspaceBasis warm = bases[static_cast<std::size_t>(k)];
          bases[static_cast<std::size_t>(k)] =
              sub.observed_count() == static_cast<long>(sub.d()) * sub.n()
                  ? best_fit_subspace(sub, cfg.r, c)
                  : grouse_fit(sub, cfg.r, c, &warm);
        } catch (const std::exception&) {
          bases[static_cast<std::size_t>(k)] = fit_columns(data, cols, cfg.r, cfg.completion, krng);
        }
      }
    }
  }

  ClusteringSolution out;
  out.selected = bases;
  out.labels = labels;
  out.residuals = residuals;
  out.objective = objective;
  out.bound = 0.0;  // residual costs are nonnegative
  out.gap = objective / (1.0 + std::abs(objective));
  out.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace scmd
