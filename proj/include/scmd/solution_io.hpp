#pragma once

#include <string>

#include "scmd/solver.hpp"

namespace scmd {

// Solution JSON: {selected: [{dim, basis (column-major)}], labels,
// objective, bound, gap, iterations: [{root_it, lp_obj, columns_added,
// cuts_added}]}.
void write_solution(const std::string& path, const ClusteringSolution& sol);
ClusteringSolution read_solution(const std::string& path, int ambient_dim);

struct MetricsRow {
  std::string instance_id;
  std::string method;
  double missing_fraction = 0.0;
  double sweep_param = 0.0;       // theta, lambda, or d/(K r) depending on the sweep
  double clustering_error = -1.0; // negative: not available
  double completion_error = -1.0;
  double wall_clock_seconds = 0.0;
};

std::string metrics_header();
std::string metrics_line(const MetricsRow& row);

}  // namespace scmd
