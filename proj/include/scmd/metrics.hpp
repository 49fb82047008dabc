#pragma once

#include <vector>

#include "scmd/instances.hpp"
#include "scmd/linalg.hpp"

namespace scmd {

struct Partition {
  int n = 0;
  std::vector<std::vector<int>> clusters;  // pairwise disjoint subsets of [n]

  static Partition from_labels(const std::vector<int>& labels);
  void validate() const;
};

struct MatchResult {
  std::vector<int> assignment;  // per row of the cost matrix: matched column or -1
  double total_cost = 0.0;
};

// Optimal assignment on a rectangular cost matrix (Hungarian method on a
// zero-padded square); rows and columns are each used at most once and
// every row (column) of the shorter side is matched.
MatchResult solve_matching(const Matrix& cost);

// 100 * c_hat / (2n): optimal-matching symmetric-difference disagreement
// between the partitions (empty predicted clusters are compacted first).
double clustering_error(const Partition& truth, const Partition& predicted);

struct CompletionErrorResult {
  double value = 0.0;
  bool no_hidden_entries = false;  // f = 0: error defined as 0
};

// Relative Frobenius error over unobserved entries only.
CompletionErrorResult completion_error(const Matrix& recovered, const Matrix& truth,
                                       const ObservedMatrix& mask_source);

}  // namespace scmd
