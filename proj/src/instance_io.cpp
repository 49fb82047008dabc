#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "scmd/instances.hpp"

#include <json.hpp>

namespace scmd {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_instance(const std::string& path, const ObservedMatrix& data,
                    const GroundTruth* truth) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path + " for writing");
  }
  out << "{\n  \"d\": " << data.d() << ",\n  \"n\": " << data.n()
      << ",\n  \"observed\": [";
  bool first = true;
  for (int j = 0; j < data.n(); ++j) {
    for (int i : data.observed_rows(j)) {
      if (!first) out << ",";
      first = false;
      out << "\n    [" << i << ", " << j << ", " << fmt_double(data.value(i, j))
          << "]";
    }
  }
  out << "\n  ]";
  if (truth != nullptr) {
    out << ",\n  \"ground_truth\": {\n    \"labels\": [";
    for (std::size_t j = 0; j < truth->labels.size(); ++j) {
      out << (j ? ", " : "") << truth->labels[j];
    }
    out << "],\n    \"full_values\": [";
    for (int j = 0; j < data.n(); ++j) {
      out << (j ? "," : "") << "\n      [";
      for (int i = 0; i < data.d(); ++i) {
        out << (i ? ", " : "") << fmt_double(truth->full_matrix(i, j));
      }
      out << "]";
    }
    out << "\n    ]\n  }";
  }
  out << "\n}\n";
  if (!out) {
    throw std::runtime_error("write to " + path + " failed");
  }
}

ReadInstanceResult read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  try {
    const int d = doc.at("d").get<int>();
    const int n = doc.at("n").get<int>();
    if (d < 1 || n < 1) {
      throw std::runtime_error("d and n must be positive");
    }
    Matrix values = Matrix::Zero(d, n);
    std::vector<std::vector<bool>> mask(
        static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(d), false));
    for (const auto& entry : doc.at("observed")) {
      if (!entry.is_array() || entry.size() != 3) {
        throw std::runtime_error("observed entries must be [i, j, value]");
      }
      const int i = entry[0].get<int>();
      const int j = entry[1].get<int>();
      if (i < 0 || i >= d || j < 0 || j >= n) {
        throw std::runtime_error("observed index out of range: [" +
                                 std::to_string(i) + ", " + std::to_string(j) + "]");
      }
      values(i, j) = entry[2].get<double>();
      mask[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = true;
    }
    std::optional<GroundTruth> truth;
    if (doc.contains("ground_truth")) {
      const auto& gt = doc.at("ground_truth");
      GroundTruth t;
      t.labels = gt.at("labels").get<std::vector<int>>();
      if (static_cast<int>(t.labels.size()) != n) {
        throw std::runtime_error("ground_truth.labels length != n");
      }
      const auto& fv = gt.at("full_values");
      if (static_cast<int>(fv.size()) != n) {
        throw std::runtime_error("ground_truth.full_values must have n columns");
      }
      t.full_matrix.resize(d, n);
      for (int j = 0; j < n; ++j) {
        const auto& col = fv[static_cast<std::size_t>(j)];
        if (static_cast<int>(col.size()) != d) {
          throw std::runtime_error("ground_truth column " + std::to_string(j) +
                                   " has wrong length");
        }
        for (int i = 0; i < d; ++i) {
          t.full_matrix(i, j) = col[static_cast<std::size_t>(i)].get<double>();
        }
      }
      truth = std::move(t);
    }
    // ObservedMatrix enforces the no-empty-column invariant.
    return ReadInstanceResult{ObservedMatrix(std::move(values), std::move(mask)),
                              std::move(truth)};
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace scmd
