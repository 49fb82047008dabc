#include "scmd/solution_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scmd {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_solution(const std::string& path, const ClusteringSolution& sol) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "{\n  \"selected\": [";
  for (std::size_t s = 0; s < sol.selected.size(); ++s) {
    const SubspaceBasis& b = sol.selected[s];
    out << (s ? "," : "") << "\n    {\"dim\": " << b.dim() << ", \"basis\": [";
    bool first = true;
    for (int c = 0; c < b.dim(); ++c) {
      for (int r = 0; r < b.ambient_dim(); ++r) {
        out << (first ? "" : ", ") << fmt_double(b.basis(r, c));
        first = false;
      }
    }
    out << "]}";
  }
  out << "\n  ],\n  \"labels\": [";
  for (std::size_t j = 0; j < sol.labels.size(); ++j) {
    out << (j ? ", " : "") << sol.labels[j];
  }
  out << "],\n  \"objective\": " << fmt_double(sol.objective)
      << ",\n  \"bound\": " << fmt_double(sol.bound)
      << ",\n  \"gap\": " << fmt_double(sol.gap) << ",\n  \"iterations\": [";
  for (std::size_t i = 0; i < sol.iterations.size(); ++i) {
    const RootIterationLog& log = sol.iterations[i];
    out << (i ? "," : "") << "\n    {\"root_it\": " << log.root_iteration
        << ", \"lp_obj\": " << fmt_double(log.lp_objective)
        << ", \"columns_added\": " << log.columns_added
        << ", \"cuts_added\": " << log.cuts_added << "}";
  }
  out << "\n  ]\n}\n";
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

ClusteringSolution read_solution(const std::string& path, int ambient_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  try {
    ClusteringSolution sol;
    for (const auto& sel : doc.at("selected")) {
      const int dim = sel.at("dim").get<int>();
      const auto& values = sel.at("basis");
      if (static_cast<int>(values.size()) != ambient_dim * dim) {
        throw std::runtime_error("basis value count mismatch in " + path);
      }
      Matrix m(ambient_dim, dim);
      std::size_t idx = 0;
      for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < ambient_dim; ++r) {
          m(r, c) = values[idx++].get<double>();
        }
      }
      sol.selected.push_back(SubspaceBasis::from_orthonormal(std::move(m)));
    }
    sol.labels = doc.at("labels").get<std::vector<int>>();
    sol.objective = doc.at("objective").get<double>();
    sol.bound = doc.at("bound").get<double>();
    sol.gap = doc.at("gap").get<double>();
    if (doc.contains("iterations")) {
      for (const auto& entry : doc.at("iterations")) {
        RootIterationLog log;
        log.root_iteration = entry.at("root_it").get<int>();
        log.lp_objective = entry.at("lp_obj").get<double>();
        log.columns_added = entry.at("columns_added").get<int>();
        log.cuts_added = entry.at("cuts_added").get<int>();
        sol.iterations.push_back(log);
      }
    }
    return sol;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string metrics_header() {
  return "instance,method,f,param,clustering_error,completion_error,wall_clock_s";
}

std::string metrics_line(const MetricsRow& row) {
  std::ostringstream out;
  out << row.instance_id << ',' << row.method << ',' << fmt_double(row.missing_fraction)
      << ',' << fmt_double(row.sweep_param) << ',';
  if (row.clustering_error >= 0) out << fmt_double(row.clustering_error);
  out << ',';
  if (row.completion_error >= 0) out << fmt_double(row.completion_error);
  out << ',' << fmt_double(row.wall_clock_seconds);
  return out.str();
}

}  // namespace scmd
