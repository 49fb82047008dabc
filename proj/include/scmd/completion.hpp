#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "scmd/instances.hpp"
#include "scmd/linalg.hpp"

namespace scmd {

struct CompletionConfig {
  int rank = 1;
  int max_passes = 50;       // column passes for the incremental fit
  double step_scale = 1.0;   // multiplier on the greedy rotation angle
  double tolerance = 1e-9;   // relative residual stop
  std::uint64_t seed = 0;
  int svt_max_iterations = 500;
  double svt_tau_scale = 5.0;  // tau = scale * sqrt(d*n) * mean|observed|
  double svt_step = 0.0;       // 0: auto, 1.2 / observed fraction
};

// Rank-r orthonormal basis fitted by rank-one Grassmannian updates over
// shuffled column passes; `on_update` (when set) observes the basis after
// every rank-one update. Columns without observations are skipped.
SubspaceBasis grouse_fit(
    const ObservedMatrix& data, int rank, const CompletionConfig& cfg,
    const SubspaceBasis* init = nullptr,
    const std::function<void(const SubspaceBasis&)>& on_update = nullptr);

// Top-r left singular vectors when fully observed, grouse_fit otherwise.
SubspaceBasis best_fit_subspace(const ObservedMatrix& data, int rank,
                                const CompletionConfig& cfg);

struct SvtResult {
  Matrix completed;
  bool diverged = false;
  int iterations = 0;
};

// Singular value thresholding completion; returns the best iterate with a
// flag if the observed-entry objective increases 10 times in a row.
SvtResult svt_complete(const ObservedMatrix& data, const CompletionConfig& cfg);

struct RankKnown {
  std::vector<int> ranks;  // r_k per cluster
};
struct RankUnknown {};
using GroupwiseMode = std::variant<RankKnown, RankUnknown>;

struct GroupwiseResult {
  Matrix completed;                  // d x n; observed entries untouched
  std::vector<bool> cluster_flagged; // per cluster: degenerate fit or divergence
};

// Per-cluster completion stitched into one matrix: rank-known fills via a
// fitted basis, rank-unknown via SVT. Clusters with < 2 columns fall back
// to a rank-1 fit and are flagged.
GroupwiseResult groupwise_complete(const ObservedMatrix& data,
                                   const std::vector<int>& labels,
                                   const GroupwiseMode& mode,
                                   const CompletionConfig& cfg);

}  // namespace scmd
