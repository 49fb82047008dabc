#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scmd/linalg.hpp"
#include "scmd/rng.hpp"

namespace scmd {

// Partially observed d x n matrix. `values` holds the ground-truth entry
// wherever one is known (generated instances keep the hidden truth for
// completion scoring); unobserved positions are only reachable through
// GroundTruth, never through this query API.
class ObservedMatrix {
 public:
  ObservedMatrix(Matrix values, std::vector<std::vector<bool>> mask_cols);

  int d() const { return d_; }
  int n() const { return n_; }

  bool is_observed(int i, int j) const { return mask_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]; }
  // Throws std::out_of_range when (i, j) is unobserved.
  double value(int i, int j) const;

  // Ascending observed row indices of column j (cached, immutable).
  const std::vector<int>& observed_rows(int j) const { return rows_[static_cast<std::size_t>(j)]; }
  Vector observed_values(int j) const;
  long observed_count() const { return observed_count_; }

  // Raw storage, for generators / file IO / scoring only.
  const Matrix& raw_values() const { return values_; }

 private:
  int d_, n_;
  Matrix values_;
  std::vector<std::vector<bool>> mask_;  // per column
  std::vector<std::vector<int>> rows_;
  long observed_count_ = 0;
};

struct GroundTruth {
  std::vector<int> labels;            // per-column subspace index in [K]
  std::vector<SubspaceBasis> bases;   // may be empty when read from file
  Matrix full_matrix;                 // complete X before masking
};

enum class Family { random_subspaces, disjoint2, disjoint3 };

struct GeneratorConfig {
  int d = 0;
  int n = 0;
  int K = 0;
  std::vector<int> dims;          // r_k per subspace
  double missing_fraction = 0.0;  // f in [0, 1)
  std::uint64_t seed = 0;
  Family family = Family::random_subspaces;
  double theta = 0.0;             // angle parameter for the disjoint families

  void validate() const;  // throws std::invalid_argument
};

struct Instance {
  ObservedMatrix data;
  GroundTruth truth;
};

// K Gaussian subspaces, Gaussian coefficients, uniform labels; then a
// fixed-count uniform mask drop of exactly floor(f*d*n) entries with every
// column keeping at least one observation.
Instance generate_random(const GeneratorConfig& cfg);

// Two or three disjoint subspaces at angle theta built in dimension 2r and
// lifted to R^d by a random orthonormal map.
Instance generate_disjoint(const GeneratorConfig& cfg);

Instance generate(const GeneratorConfig& cfg);

// Appends a fully observed all-ones row (affine data as a linear subspace
// one dimension up).
ObservedMatrix affine_lift(const ObservedMatrix& x);

// Restriction to a column subset (order preserved).
ObservedMatrix select_columns(const ObservedMatrix& x, const std::vector<int>& cols);

// Squared residual of column j's observed entries against a basis.
double column_residual_sq(const ObservedMatrix& data, const SubspaceBasis& basis, int j);

// Instance file round trip. JSON: {d, n, observed: [[i, j, value]...],
// ground_truth?: {labels, full_values}}; 0-based indices; values printed
// with 17 significant digits.
void write_instance(const std::string& path, const ObservedMatrix& data,
                    const GroundTruth* truth = nullptr);
struct ReadInstanceResult {
  ObservedMatrix data;
  std::optional<GroundTruth> truth;
};
ReadInstanceResult read_instance(const std::string& path);

}  // namespace scmd
