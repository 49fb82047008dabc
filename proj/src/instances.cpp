#include "scmd/instances.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scmd {

ObservedMatrix::ObservedMatrix(Matrix values,
                               std::vector<std::vector<bool>> mask_cols)
    : d_(static_cast<int>(values.rows())),
      n_(static_cast<int>(values.cols())),
      values_(std::move(values)),
      mask_(std::move(mask_cols)) {
  if (static_cast<int>(mask_.size()) != n_) {
    throw std::invalid_argument("mask column count mismatch");
  }
  rows_.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const auto& col = mask_[static_cast<std::size_t>(j)];
    if (static_cast<int>(col.size()) != d_) {
      throw std::invalid_argument("mask row count mismatch");
    }
    for (int i = 0; i < d_; ++i) {
      if (col[static_cast<std::size_t>(i)]) {
        if (!std::isfinite(values_(i, j))) {
          throw std::invalid_argument("observed value not finite");
        }
        rows_[static_cast<std::size_t>(j)].push_back(i);
      }
    }
    if (rows_[static_cast<std::size_t>(j)].empty()) {
      throw std::invalid_argument("column " + std::to_string(j) +
                                  " has no observed entries");
    }
    observed_count_ += static_cast<long>(rows_[static_cast<std::size_t>(j)].size());
  }
}

double ObservedMatrix::value(int i, int j) const {
  if (!is_observed(i, j)) {
    throw std::out_of_range("entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") is not observed");
  }
  return values_(i, j);
}

Vector ObservedMatrix::observed_values(int j) const {
  const auto& rows = observed_rows(j);
  Vector v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = values_(rows[k], j);
  }
  return v;
}

void GeneratorConfig::validate() const {
  if (d < 2 || n < 1 || K < 1) {
    throw std::invalid_argument("generator needs d >= 2, n >= 1, K >= 1");
  }
  if (static_cast<int>(dims.size()) != K) {
    throw std::invalid_argument("dims must list one rank per subspace");
  }
  for (int r : dims) {
    if (r < 1 || r >= d) {
      throw std::invalid_argument("subspace dims must satisfy 1 <= r < d");
    }
  }
  if (missing_fraction < 0.0 || missing_fraction >= 1.0) {
    throw std::invalid_argument("missing_fraction must lie in [0, 1)");
  }
  if (family != Family::random_subspaces) {
    const int want_k = family == Family::disjoint2 ? 2 : 3;
    if (K != want_k) {
      throw std::invalid_argument("disjoint family forces K to 2 or 3");
    }
    for (int r : dims) {
      if (r != dims[0]) {
        throw std::invalid_argument("disjoint family needs equal dims");
      }
    }
    if (d < 2 * dims[0]) {
      throw std::invalid_argument("disjoint family needs d >= 2r");
    }
    if (theta < 0.0 || theta > 1.5707963267948966) {
      throw std::invalid_argument("theta must lie in [0, pi/2]");
    }
  }
}

namespace {

Matrix random_gaussian(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = rng.normal();
    }
  }
  return m;
}

// Drop exactly floor(f*d*n) entries uniformly without replacement; if a
// column ends up fully hidden, move one of its drops to a column that can
// still spare an observation. Gives an exact drop count with every column
// keeping >= 1 entry, or throws after 100 repair rounds.
std::vector<std::vector<bool>> make_mask(int d, int n, double f, Rng& rng) {
  std::vector<std::vector<bool>> mask(
      static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(d), true));
  const long total = static_cast<long>(d) * n;
  const long drop = static_cast<long>(std::floor(f * static_cast<double>(total)));
  if (drop == 0) return mask;
  if (drop > total - n) {
    throw std::runtime_error("missing fraction leaves some column empty");
  }

  std::vector<long> positions(static_cast<std::size_t>(total));
  for (long p = 0; p < total; ++p) positions[static_cast<std::size_t>(p)] = p;
  rng.shuffle(positions);
  std::vector<int> observed_per_col(static_cast<std::size_t>(n), d);
  for (long k = 0; k < drop; ++k) {
    const long p = positions[static_cast<std::size_t>(k)];
    const int j = static_cast<int>(p / d);
    const int i = static_cast<int>(p % d);
    mask[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = false;
    --observed_per_col[static_cast<std::size_t>(j)];
  }

  for (int attempt = 0; attempt < 100; ++attempt) {
    int empty = -1;
    for (int j = 0; j < n; ++j) {
      if (observed_per_col[static_cast<std::size_t>(j)] == 0) {
        empty = j;
        break;
      }
    }
    if (empty < 0) return mask;
    // Restore one random entry of the empty column...
    const int restore = rng.uniform_int(0, d - 1);
    mask[static_cast<std::size_t>(empty)][static_cast<std::size_t>(restore)] = true;
    ++observed_per_col[static_cast<std::size_t>(empty)];
    // ...and drop one elsewhere to keep the count exact.
    for (int tries = 0; tries < 1000; ++tries) {
      const int j = rng.uniform_int(0, n - 1);
      if (observed_per_col[static_cast<std::size_t>(j)] < 2) continue;
      std::vector<int> obs;
      for (int i = 0; i < d; ++i) {
        if (mask[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) obs.push_back(i);
      }
      const int i = obs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(obs.size()) - 1))];
      mask[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = false;
      --observed_per_col[static_cast<std::size_t>(j)];
      break;
    }
  }
  throw std::runtime_error("mask repair failed after 100 attempts");
}

Instance assemble(Matrix full, std::vector<int> labels,
                  std::vector<SubspaceBasis> bases, const GeneratorConfig& cfg,
                  Rng& rng) {
  auto mask = make_mask(cfg.d, cfg.n, cfg.missing_fraction, rng);
  ObservedMatrix data(full, std::move(mask));
  GroundTruth truth{std::move(labels), std::move(bases), std::move(full)};
  return Instance{std::move(data), std::move(truth)};
}

}  // namespace

Instance generate_random(const GeneratorConfig& cfg) {
  cfg.validate();
  if (cfg.family != Family::random_subspaces) {
    throw std::invalid_argument("generate_random requires the random family");
  }
  Rng rng(cfg.seed);
  std::vector<SubspaceBasis> bases;
  bases.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    bases.push_back(orthonormalize(random_gaussian(cfg.d, cfg.dims[static_cast<std::size_t>(k)], rng)));
  }
  Matrix full(cfg.d, cfg.n);
  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (int j = 0; j < cfg.n; ++j) {
    const int k = rng.uniform_int(0, cfg.K - 1);
    labels[static_cast<std::size_t>(j)] = k;
    const Vector v = random_gaussian(cfg.dims[static_cast<std::size_t>(k)], 1, rng).col(0);
    full.col(j) = bases[static_cast<std::size_t>(k)].basis * v;
  }
  return assemble(std::move(full), std::move(labels), std::move(bases), cfg, rng);
}

Instance generate_disjoint(const GeneratorConfig& cfg) {
  cfg.validate();
  if (cfg.family == Family::random_subspaces) {
    throw std::invalid_argument("generate_disjoint requires a disjoint family");
  }
  Rng rng(cfg.seed);
  const int r = cfg.dims[0];
  const double c = std::cos(cfg.theta);
  const double s = std::sin(cfg.theta);

  // 2r x r block bases: U1 = [I; 0], U2 = [c I; s I], U3 = [-c I; -s I].
  std::vector<Matrix> blocks;
  Matrix u1 = Matrix::Zero(2 * r, r);
  u1.topRows(r) = Matrix::Identity(r, r);
  Matrix u2 = Matrix::Zero(2 * r, r);
  u2.topRows(r) = c * Matrix::Identity(r, r);
  u2.bottomRows(r) = s * Matrix::Identity(r, r);
  blocks.push_back(u1);
  blocks.push_back(u2);
  if (cfg.family == Family::disjoint3) {
    blocks.push_back(-u2);
  }

  // Random orthonormal lift P in R^{d x 2r}.
  const Matrix lift = orthonormalize(random_gaussian(cfg.d, 2 * r, rng)).basis;

  const int per = cfg.n / cfg.K;  // last cluster absorbs the remainder
  Matrix full(cfg.d, cfg.n);
  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  std::vector<SubspaceBasis> bases;
  int col = 0;
  for (int k = 0; k < cfg.K; ++k) {
    const int count = k + 1 < cfg.K ? per : cfg.n - col;
    const Matrix w = random_gaussian(r, count, rng);
    const Matrix block_pts = blocks[static_cast<std::size_t>(k)] * w;
    for (int t = 0; t < count; ++t, ++col) {
      full.col(col) = lift * block_pts.col(t);
      labels[static_cast<std::size_t>(col)] = k;
    }
    bases.push_back(SubspaceBasis{lift * blocks[static_cast<std::size_t>(k)]});
  }
  return assemble(std::move(full), std::move(labels), std::move(bases), cfg, rng);
}

Instance generate(const GeneratorConfig& cfg) {
  return cfg.family == Family::random_subspaces ? generate_random(cfg)
                                                : generate_disjoint(cfg);
}

ObservedMatrix select_columns(const ObservedMatrix& x, const std::vector<int>& cols) {
  Matrix values(x.d(), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::vector<bool>> mask(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const int j = cols[k];
    values.col(static_cast<Eigen::Index>(k)) = x.raw_values().col(j);
    auto& col = mask[k];
    col.resize(static_cast<std::size_t>(x.d()));
    for (int i = 0; i < x.d(); ++i) col[static_cast<std::size_t>(i)] = x.is_observed(i, j);
  }
  return ObservedMatrix(std::move(values), std::move(mask));
}

double column_residual_sq(const ObservedMatrix& data, const SubspaceBasis& basis, int j) {
  const auto& rows = data.observed_rows(j);
  const Matrix restricted = restrict_rows(basis.basis, rows);
  return partial_least_squares(restricted, data.observed_values(j)).residual_sq;
}

ObservedMatrix affine_lift(const ObservedMatrix& x) {
  Matrix values(x.d() + 1, x.n());
  values.topRows(x.d()) = x.raw_values();
  values.row(x.d()).setOnes();
  std::vector<std::vector<bool>> mask(static_cast<std::size_t>(x.n()));
  for (int j = 0; j < x.n(); ++j) {
    auto& col = mask[static_cast<std::size_t>(j)];
    col.resize(static_cast<std::size_t>(x.d() + 1), false);
    for (int i = 0; i < x.d(); ++i) {
      col[static_cast<std::size_t>(i)] = x.is_observed(i, j);
    }
    col[static_cast<std::size_t>(x.d())] = true;
  }
  return ObservedMatrix(std::move(values), std::move(mask));
}

}  // namespace scmd
