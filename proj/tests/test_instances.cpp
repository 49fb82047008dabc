#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "scmd/instances.hpp"

using namespace scmd;

namespace {

GeneratorConfig random_cfg(int d, int n, int K, int r, double f, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.d = d;
  cfg.n = n;
  cfg.K = K;
  cfg.dims.assign(static_cast<std::size_t>(K), r);
  cfg.missing_fraction = f;
  cfg.seed = seed;
  return cfg;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/scmd_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("generate_random at the benchmark shape") {
  const Instance inst = generate_random(random_cfg(30, 200, 6, 3, 0.0, 42));
  CHECK(inst.data.d() == 30);
  CHECK(inst.data.n() == 200);
  CHECK(inst.data.observed_count() == 30l * 200);
  for (int label : inst.truth.labels) {
    CHECK(label >= 0);
    CHECK(label < 6);
  }
}

TEST_CASE("fully observed columns have zero residual on their own basis") {
  const Instance inst = generate_random(random_cfg(12, 40, 3, 2, 0.0, 7));
  for (int j = 0; j < inst.data.n(); ++j) {
    const int k = inst.truth.labels[static_cast<std::size_t>(j)];
    const double res = column_residual_sq(inst.data, inst.truth.bases[static_cast<std::size_t>(k)], j);
    CHECK(res < 1e-8);
    // and the minimum over bases is attained at the label
    for (int other = 0; other < 3; ++other) {
      CHECK(column_residual_sq(inst.data, inst.truth.bases[static_cast<std::size_t>(other)], j) >= res - 1e-9);
    }
  }
}

TEST_CASE("mask drops exactly floor(f*d*n) entries") {
  const double f = 0.4;
  const Instance inst = generate_random(random_cfg(10, 50, 2, 2, f, 99));
  const long total = 10l * 50;
  const long expect_dropped = static_cast<long>(std::floor(f * total));
  CHECK(inst.data.observed_count() == total - expect_dropped);
  // within the binomial +-2% band around 0.6*d*n, trivially, since exact
  CHECK(std::abs(static_cast<double>(inst.data.observed_count()) - 0.6 * total) <=
        0.02 * total + 1.0);
  for (int j = 0; j < inst.data.n(); ++j) {
    CHECK(!inst.data.observed_rows(j).empty());
  }
}

TEST_CASE("infeasible missing fraction errors out") {
  CHECK_THROWS_AS(generate_random(random_cfg(2, 30, 2, 1, 0.99, 1)), std::runtime_error);
}

TEST_CASE("disjoint2 at theta = pi/2 gives mutually orthogonal spans") {
  GeneratorConfig cfg = random_cfg(12, 40, 2, 2, 0.0, 5);
  cfg.family = Family::disjoint2;
  cfg.theta = 1.5707963267948966;
  const Instance inst = generate_disjoint(cfg);
  const Matrix cross = inst.truth.bases[0].basis.transpose() * inst.truth.bases[1].basis;
  CHECK(cross.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("disjoint2 at theta = 0 gives identical spans") {
  GeneratorConfig cfg = random_cfg(12, 40, 2, 2, 0.0, 5);
  cfg.family = Family::disjoint2;
  cfg.theta = 0.0;
  const Instance inst = generate_disjoint(cfg);
  CHECK(largest_principal_angle(inst.truth.bases[0], inst.truth.bases[1]) < 1e-7);
}

TEST_CASE("disjoint2 principal angles all equal theta") {
  GeneratorConfig cfg = random_cfg(20, 200, 2, 2, 0.0, 12);
  cfg.family = Family::disjoint2;
  cfg.theta = 1.0;
  const Instance inst = generate_disjoint(cfg);
  const Matrix cross = inst.truth.bases[0].basis.transpose() * inst.truth.bases[1].basis;
  const ThinSvd svd = thin_svd(cross);
  for (int i = 0; i < svd.s.size(); ++i) {
    CHECK(std::acos(std::clamp(svd.s(i), 0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-6));
  }
  // disjointness: the concatenated spans have rank 2r
  Matrix cat(20, 4);
  cat.leftCols(2) = inst.truth.bases[0].basis;
  cat.rightCols(2) = inst.truth.bases[1].basis;
  const ThinSvd cat_svd = thin_svd(cat);
  CHECK(cat_svd.s(3) > 1e-8);
}

TEST_CASE("disjoint3 block structure matches the stated construction") {
  GeneratorConfig cfg = random_cfg(12, 42, 3, 2, 0.0, 3);
  cfg.family = Family::disjoint3;
  cfg.theta = 0.7;
  const Instance inst = generate_disjoint(cfg);
  CHECK(inst.truth.bases.size() == 3);
  // third basis is the negated second block lifted by the same map
  CHECK((inst.truth.bases[2].basis + inst.truth.bases[1].basis).cwiseAbs().maxCoeff() < 1e-12);
  // labels: remainder goes to the last cluster
  int counts[3] = {0, 0, 0};
  for (int l : inst.truth.labels) ++counts[l];
  CHECK(counts[0] == 14);
  CHECK(counts[1] == 14);
  CHECK(counts[2] == 14);
}

TEST_CASE("uneven n puts the remainder in the last cluster") {
  GeneratorConfig cfg = random_cfg(12, 41, 3, 2, 0.0, 3);
  cfg.family = Family::disjoint3;
  cfg.theta = 0.7;
  const Instance inst = generate_disjoint(cfg);
  int counts[3] = {0, 0, 0};
  for (int l : inst.truth.labels) ++counts[l];
  CHECK(counts[0] == 13);
  CHECK(counts[1] == 13);
  CHECK(counts[2] == 15);
}

TEST_CASE("affine_lift appends an all-ones observed row") {
  const Instance inst = generate_random(random_cfg(2, 3, 1, 1, 0.3, 8));
  const ObservedMatrix lifted = affine_lift(inst.data);
  CHECK(lifted.d() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(lifted.is_observed(2, j));
    CHECK(lifted.value(2, j) == 1.0);
    for (int i = 0; i < 2; ++i) {
      CHECK(lifted.is_observed(i, j) == inst.data.is_observed(i, j));
    }
  }
}

TEST_CASE("affine line lifts into a rank-2 linear subspace") {
  // points on x2 = x1 + 1
  Matrix values(2, 6);
  for (int j = 0; j < 6; ++j) {
    values(0, j) = j - 2.5;
    values(1, j) = values(0, j) + 1.0;
  }
  std::vector<std::vector<bool>> mask(6, std::vector<bool>(2, true));
  const ObservedMatrix lifted = affine_lift(ObservedMatrix(values, mask));
  // best-fit rank-2 basis via SVD of the lifted matrix
  const ThinSvd svd = thin_svd(lifted.raw_values());
  const Matrix basis = svd.U.leftCols(2);
  for (int j = 0; j < 6; ++j) {
    const Vector x = lifted.raw_values().col(j);
    const Vector proj = basis * (basis.transpose() * x);
    CHECK((x - proj).norm() < 1e-8);
  }
}

TEST_CASE("instance files round trip bit-identically") {
  const Instance inst = generate_random(random_cfg(8, 20, 2, 2, 0.35, 77));
  TempFile file("roundtrip.json");
  write_instance(file.path, inst.data, &inst.truth);
  const ReadInstanceResult back = read_instance(file.path);
  CHECK(back.data.d() == inst.data.d());
  CHECK(back.data.n() == inst.data.n());
  REQUIRE(back.truth.has_value());
  CHECK(back.truth->labels == inst.truth.labels);
  for (int j = 0; j < inst.data.n(); ++j) {
    REQUIRE(back.data.observed_rows(j) == inst.data.observed_rows(j));
    for (int i : inst.data.observed_rows(j)) {
      CHECK(back.data.value(i, j) == inst.data.value(i, j));  // bit-identical
    }
  }
  CHECK((back.truth->full_matrix - inst.truth.full_matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a file with an all-missing column is rejected") {
  TempFile file("empty_column.json");
  std::ofstream out(file.path);
  out << R"({"d": 2, "n": 2, "observed": [[0, 0, 1.5], [1, 0, 2.5]]})";
  out.close();
  CHECK_THROWS_AS(read_instance(file.path), std::invalid_argument);
}

TEST_CASE("hand-written instance file parses to the expected matrix") {
  TempFile file("hand.json");
  std::ofstream out(file.path);
  out << R"({"d": 2, "n": 2, "observed": [[0, 0, 1.5], [1, 1, -2.25], [0, 1, 0.125]]})";
  out.close();
  const ReadInstanceResult r = read_instance(file.path);
  CHECK(r.data.value(0, 0) == 1.5);
  CHECK(r.data.value(0, 1) == 0.125);
  CHECK(r.data.value(1, 1) == -2.25);
  CHECK_FALSE(r.data.is_observed(1, 0));
  CHECK_FALSE(r.truth.has_value());
}

TEST_CASE("malformed files carry parse context") {
  TempFile file("broken.json");
  std::ofstream out(file.path);
  out << "{\"d\": 2, \"n\": }";
  out.close();
  CHECK_THROWS_AS(read_instance(file.path), std::runtime_error);
}

TEST_CASE("unobserved entries are unreadable") {
  const Instance inst = generate_random(random_cfg(6, 10, 2, 2, 0.5, 4));
  for (int j = 0; j < 10 && j < inst.data.n(); ++j) {
    for (int i = 0; i < 6; ++i) {
      if (!inst.data.is_observed(i, j)) {
        CHECK_THROWS_AS(inst.data.value(i, j), std::out_of_range);
        return;
      }
    }
  }
}

TEST_CASE("generators are pure given the config") {
  const GeneratorConfig cfg = random_cfg(10, 30, 3, 2, 0.25, 123);
  const Instance a = generate_random(cfg);
  const Instance b = generate_random(cfg);
  CHECK((a.truth.full_matrix - b.truth.full_matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.truth.labels == b.truth.labels);
  CHECK(a.data.observed_count() == b.data.observed_count());
  for (int j = 0; j < a.data.n(); ++j) {
    CHECK(a.data.observed_rows(j) == b.data.observed_rows(j));
  }
}
