#pragma once

#include <functional>

#include "scmd/completion.hpp"
#include "scmd/instances.hpp"
#include "scmd/solver.hpp"

namespace scmd {

enum class KGrouseInit { random, farthest_insertion };

struct KGrouseConfig {
  int K = 1;
  int r = 1;
  int max_outer_iterations = 30;
  std::uint64_t seed = 0;
  KGrouseInit init = KGrouseInit::random;
  CompletionConfig completion;
};

struct KGrouseIterationStats {
  int iteration;
  double assignment_objective;  // sum of min residuals after the assign step
  int reassigned;
};
using KGrouseTrace = std::function<void(const KGrouseIterationStats&)>;

// Alternating baseline: assign each column to its closest subspace by
// observed residual, refit each cluster with the incremental completion
// fit, repeat until labels are stable or the iteration cap. Empty clusters
// are reseeded from the columns with the largest residuals.
ClusteringSolution kgrouse(const ObservedMatrix& data, const KGrouseConfig& cfg,
                           const KGrouseTrace& trace = nullptr);

}  // namespace scmd
