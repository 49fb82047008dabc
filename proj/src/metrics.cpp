#include "scmd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scmd {

Partition Partition::from_labels(const std::vector<int>& labels) {
  Partition p;
  p.n = static_cast<int>(labels.size());
  int k_max = -1;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("labels must be nonnegative");
    k_max = std::max(k_max, l);
  }
  p.clusters.resize(static_cast<std::size_t>(k_max + 1));
  for (int j = 0; j < p.n; ++j) {
    p.clusters[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])].push_back(j);
  }
  return p;
}

void Partition::validate() const {
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (const auto& cluster : clusters) {
    for (int j : cluster) {
      if (j < 0 || j >= n) throw std::invalid_argument("partition index out of range");
      if (seen[static_cast<std::size_t>(j)]) throw std::invalid_argument("partition clusters overlap");
      seen[static_cast<std::size_t>(j)] = true;
    }
  }
}

MatchResult solve_matching(const Matrix& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const int s = std::max(rows, cols);

  // Hungarian with potentials on the zero-padded square matrix; padding
  // entries cost nothing, so unmatched real pairs contribute nothing.
  auto entry = [&](int r, int c) -> double {
    return (r < rows && c < cols) ? cost(r, c) : 0.0;
  };
  std::vector<double> u(static_cast<std::size_t>(s) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(s) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(s) + 1, 0);  // per column: matched row (1-based)
  std::vector<int> way(static_cast<std::size_t>(s) + 1, 0);

  for (int r = 1; r <= s; ++r) {
    match[0] = r;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(s) + 1, kInf);
    std::vector<bool> used(static_cast<std::size_t>(s) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= s; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = entry(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= s; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  MatchResult result;
  result.assignment.assign(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= s; ++j) {
    const int r = match[static_cast<std::size_t>(j)];
    if (r >= 1 && r <= rows && j <= cols) {
      result.assignment[static_cast<std::size_t>(r - 1)] = j - 1;
      result.total_cost += cost(r - 1, j - 1);
    }
  }
  return result;
}

double clustering_error(const Partition& truth, const Partition& predicted) {
  if (truth.n != predicted.n) {
    throw std::invalid_argument("partitions cover different n");
  }
  truth.validate();
  predicted.validate();
  const int n = truth.n;
  if (n == 0) return 0.0;

  std::vector<std::vector<int>> pred;
  for (const auto& c : predicted.clusters) {
    if (!c.empty()) pred.push_back(c);
  }
  std::vector<std::vector<int>> gt;
  for (const auto& c : truth.clusters) {
    if (!c.empty()) gt.push_back(c);
  }
  if (gt.empty()) return 0.0;
  if (pred.empty()) pred.push_back({});

  const int K = static_cast<int>(gt.size());
  const int Kp = static_cast<int>(pred.size());
  Matrix cost(K, Kp);
  std::vector<int> pred_of(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < Kp; ++k) {
    for (int j : pred[static_cast<std::size_t>(k)]) pred_of[static_cast<std::size_t>(j)] = k;
  }
  for (int a = 0; a < K; ++a) {
    std::vector<int> in_a(static_cast<std::size_t>(Kp), 0);
    for (int j : gt[static_cast<std::size_t>(a)]) {
      if (pred_of[static_cast<std::size_t>(j)] >= 0) ++in_a[static_cast<std::size_t>(pred_of[static_cast<std::size_t>(j)])];
    }
    for (int b = 0; b < Kp; ++b) {
      const double inter = in_a[static_cast<std::size_t>(b)];
      cost(a, b) = static_cast<double>(gt[static_cast<std::size_t>(a)].size()) +
                   static_cast<double>(pred[static_cast<std::size_t>(b)].size()) - 2.0 * inter;
    }
  }
  const MatchResult match = solve_matching(cost);
  return 100.0 * match.total_cost / (2.0 * n);
}

CompletionErrorResult completion_error(const Matrix& recovered, const Matrix& truth,
                                       const ObservedMatrix& mask_source) {
  if (recovered.rows() != truth.rows() || recovered.cols() != truth.cols() ||
      recovered.rows() != mask_source.d() || recovered.cols() != mask_source.n()) {
    throw std::invalid_argument("completion_error shape mismatch");
  }
  double num = 0.0, den = 0.0;
  bool any_hidden = false;
  for (int j = 0; j < mask_source.n(); ++j) {
    for (int i = 0; i < mask_source.d(); ++i) {
      if (mask_source.is_observed(i, j)) continue;
      any_hidden = true;
      const double diff = recovered(i, j) - truth(i, j);
      num += diff * diff;
      den += truth(i, j) * truth(i, j);
    }
  }
  if (!any_hidden) return CompletionErrorResult{0.0, true};
  if (den == 0.0) {
    return CompletionErrorResult{num == 0.0 ? 0.0 : kInf, false};
  }
  return CompletionErrorResult{std::sqrt(num / den), false};
}

}  // namespace scmd
