#include "scmd/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "scmd/tolerances.hpp"

namespace scmd {

namespace {

constexpr double kIntTol = 1e-6;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

Matrix uniform_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

bool basis_in(const SubspaceBasis& candidate, const std::vector<SubspaceBasis>& set) {
  for (const SubspaceBasis& b : set) {
    if (b.dim() == candidate.dim() &&
        largest_principal_angle(b, candidate) < tol::kSameSubspaceAngle) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<int> SolverConfig::pricing_dims(int d) const {
  std::vector<int> dims;
  if (dims_known) {
    dims = *dims_known;
    std::sort(dims.begin(), dims.end());
    dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  } else {
    for (int r = 1; r <= r_max; ++r) dims.push_back(r);
  }
  for (int r : dims) {
    if (r < 1 || r >= d) throw std::invalid_argument("subspace dimension outside [1, d)");
  }
  if (dims.empty()) throw std::invalid_argument("no candidate dimensions");
  return dims;
}

void SolverConfig::validate(int d, int n) const {
  if (K && *K < 1) throw std::invalid_argument("K must be >= 1");
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  if (!dims_known) {
    if (r_max < 1 || r_max >= d) throw std::invalid_argument("r_max must satisfy 1 <= r_max < d");
    if (!K && lambda <= 0) {
      throw std::invalid_argument("with dims unknown, set K or a positive lambda");
    }
  }
  if (i_max < 1 || eta_min < 0 || eta_max < 1 || eta_min > eta_max) {
    throw std::invalid_argument("invalid iteration limits");
  }
  if (time_limit_seconds <= 0 || mip_gap < 0) {
    throw std::invalid_argument("invalid termination parameters");
  }
  (void)pricing_dims(d);
  if (n < 1) throw std::invalid_argument("empty instance");
}

std::vector<int> assign_columns(const CandidatePool& pool, const std::vector<int>& selected) {
  if (selected.empty()) throw std::invalid_argument("no selected subspaces");
  std::vector<int> labels(static_cast<std::size_t>(pool.n()));
  for (int j = 0; j < pool.n(); ++j) {
    int best = 0;
    for (std::size_t s = 1; s < selected.size(); ++s) {
      if (pool.cost(j, selected[s]) < pool.cost(j, selected[static_cast<std::size_t>(best)])) {
        best = static_cast<int>(s);
      }
    }
    labels[static_cast<std::size_t>(j)] = best;
  }
  return labels;
}

BranchAndCutResult branch_and_cut(MasterState& master, const SolverConfig& cfg,
                                  double deadline_seconds) {
  CandidatePool& pool = master.pool();
  const int T = pool.size();
  LpModel& model = master.model();
  const int z0 = pool.n();

  struct Node {
    double bound;
    long id;
    std::vector<std::pair<int, int>> fixes;  // (t, 0/1)
  };
  struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
      return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
    }
  };
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

  if (!master.has_solution()) master.solve_master();
  const double root_bound = master.last_solution().objective;
  open.push(Node{root_bound, 0, {}});
  long next_id = 1;

  BranchAndCutResult result;
  result.bound = root_bound;
  double incumbent = kInf;
  Vector z_inc;
  double prune_floor = kInf;

  auto apply_fixes = [&](const Node& node) {
    for (int t = 0; t < T; ++t) model.set_bounds(z0 + t, 0.0, 1.0);
    for (const auto& [t, v] : node.fixes) {
      model.set_bounds(z0 + t, static_cast<double>(v), static_cast<double>(v));
    }
  };
  auto incumbent_eps = [&]() {
    return incumbent == kInf ? kInf : incumbent - cfg.mip_gap * (1.0 + std::abs(incumbent));
  };

  while (!open.empty()) {
    if (now_seconds() > deadline_seconds) {
      result.hit_time_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent_eps()) {
      prune_floor = std::min(prune_floor, node.bound);
      continue;
    }
    apply_fixes(node);
    const LpStatus st = master.try_solve();
    if (st == LpStatus::infeasible) continue;
    if (st != LpStatus::optimal) {
      throw std::runtime_error("node LP failed during branch and cut");
    }
    double node_bound = std::max(node.bound, master.last_solution().objective);
    ++result.nodes;

    bool node_done = false;
    while (!node_done) {
      if (node_bound >= incumbent_eps()) {
        prune_floor = std::min(prune_floor, node_bound);
        node_done = true;
        break;
      }
      const Vector z = master.z_vector();
      int branch_t = -1;
      double most_frac = kIntTol;
      for (int t = 0; t < T; ++t) {
        const double frac = std::min(z(t) - std::floor(z(t)), std::ceil(z(t)) - z(t));
        if (frac > most_frac) {
          most_frac = frac;
          branch_t = t;
        }
      }
      if (branch_t >= 0) {
        Node down{node_bound, next_id++, node.fixes};
        down.fixes.emplace_back(branch_t, 0);
        Node up{node_bound, next_id++, node.fixes};
        up.fixes.emplace_back(branch_t, 1);
        open.push(std::move(down));
        open.push(std::move(up));
        node_done = true;
        break;
      }
      // Integer candidate: verify assignment costs, adding lazy cuts for
      // any column whose w understates Phi.
      int added = 0;
      for (int j = 0; j < pool.n(); ++j) {
        const PhiResult phi = evaluate_phi(pool, j, z);
        if (phi.phi - master.w_value(j) > tol::kPhiViolation * (1.0 + std::abs(phi.phi))) {
          if (master.add_cut(build_cut(pool, j, z))) ++added;
        }
      }
      if (added > 0) {
        const LpStatus rs = master.try_solve();
        if (rs == LpStatus::infeasible) { node_done = true; break; }
        if (rs != LpStatus::optimal) {
          throw std::runtime_error("node LP failed after lazy cuts");
        }
        node_bound = std::max(node_bound, master.last_solution().objective);
        continue;
      }
      // Exact integer objective (w values carry LP tolerance).
      double true_obj = 0.0;
      for (int j = 0; j < pool.n(); ++j) true_obj += evaluate_phi(pool, j, z).phi;
      for (int t = 0; t < T; ++t) {
        if (z(t) > 0.5) true_obj += pool.selection_cost(t);
      }
      if (true_obj < incumbent - 1e-12) {
        incumbent = true_obj;
        z_inc = z;
        for (int t = 0; t < T; ++t) z_inc(t) = z(t) > 0.5 ? 1.0 : 0.0;
      }
      node_done = true;
    }
  }

  for (int t = 0; t < T; ++t) model.set_bounds(z0 + t, 0.0, 1.0);

  double lower = prune_floor;
  while (!open.empty()) {
    lower = std::min(lower, open.top().bound);
    open.pop();
  }
  if (incumbent == kInf) {
    if (result.hit_time_limit) throw TimeLimitNoIncumbent(std::min(lower, root_bound));
    throw std::runtime_error("branch and cut found no feasible selection");
  }
  result.objective = incumbent;
  result.z = z_inc;
  result.bound = std::min(incumbent, lower);
  result.gap = std::max(0.0, (incumbent - result.bound) / (1.0 + std::abs(incumbent)));
  return result;
}

ClusteringSolution solve(const ObservedMatrix& data, const SolverConfig& cfg) {
  const double start = now_seconds();
  const double deadline = start + cfg.time_limit_seconds;
  cfg.validate(data.d(), data.n());
  Rng root_rng(cfg.seed);

  const std::vector<int> dims = cfg.pricing_dims(data.d());
  const int r_max_eff = cfg.dims_known ? *std::max_element(dims.begin(), dims.end())
                                       : cfg.r_max;

  // Initial pool: b random subspaces per dimension, entries uniform on
  // [-1, 1] then orthonormalized.
  CandidatePool pool(data, cfg.lambda);
  if (!cfg.forced_pool.empty()) {
    for (const SubspaceBasis& b : cfg.forced_pool) pool.add_basis(b);
  } else {
    const int D = static_cast<int>(dims.size());
    std::vector<int> counts(static_cast<std::size_t>(D), cfg.initial_per_dim);
    if (cfg.initial_per_dim <= 0) {
      const int total = 300;
      for (int i = 0; i < D; ++i) counts[static_cast<std::size_t>(i)] = total / D + (i < total % D ? 1 : 0);
    }
    for (int i = 0; i < D; ++i) {
      Rng dim_rng = root_rng.fork(0x100 + static_cast<std::uint64_t>(dims[static_cast<std::size_t>(i)]));
      for (int c = 0; c < counts[static_cast<std::size_t>(i)]; ++c) {
        pool.add_basis(orthonormalize(uniform_matrix(data.d(), dims[static_cast<std::size_t>(i)], dim_rng)));
      }
    }
  }
  if (cfg.K && pool.size() < *cfg.K) {
    throw std::invalid_argument("initial pool smaller than K");
  }

  MasterState master(std::move(pool), cfg.K);
  ClusteringSolution out;

  PricingRunConfig prun;
  prun.max_iterations = cfg.pricing_max_iterations;
  prun.grad_tolerance = cfg.pricing_grad_tolerance;
  prun.step_cap = cfg.pricing_step_cap;

  bool root_continue = true;
  int it = 0;
  while (root_continue && it < cfg.i_max) {
    root_continue = false;
    ++it;
    const int cuts_before = master.total_cuts();
    const LpSolution& sol = master.cut_loop();
    RootIterationLog log;
    log.root_iteration = it;
    log.lp_objective = sol.objective;
    log.cuts_added = master.total_cuts() - cuts_before;

    if (!cfg.enable_pricing || now_seconds() > deadline) {
      out.iterations.push_back(log);
      break;
    }

    const PricingContext ctx = make_pricing_context(master);
    const Vector w = sol.x.head(data.n());
    std::vector<SubspaceBasis> pending;

    for (std::size_t di = 0; di < dims.size() && now_seconds() <= deadline; ++di) {
      const int r = dims[di];
      prun.rank = r;
      for (int eta = 1; eta <= cfg.eta_max; ++eta) {
        Rng start_rng = root_rng.fork(
            (static_cast<std::uint64_t>(it) << 32) ^
            (static_cast<std::uint64_t>(r) << 16) ^ static_cast<std::uint64_t>(eta));
        const SubspaceBasis u0 = initialize_u0(w, data, r, r_max_eff, start_rng);
        const PricingResult res = run_pricing(ctx, prun, u0);
        bool found = false;
        for (const SubspaceBasis& b : res.bases) {
          if (!basis_in(b, pending)) {
            pending.push_back(b);
            found = true;
          }
        }
        if (found && eta > cfg.eta_min) break;  // enough starts and new columns
        if (now_seconds() > deadline) break;
      }
    }

    if (!pending.empty()) {
      int added = 0;
      for (SubspaceBasis& b : pending) {
        // negative-reduced-cost columns are never pool duplicates at the
        // optimum, but pricing can revisit the same local minimum twice
        bool dup = false;
        for (int t = 0; t < master.pool().size(); ++t) {
          if (master.pool().rank(t) == b.dim() &&
              largest_principal_angle(master.pool().basis(t), b) < tol::kSameSubspaceAngle) {
            dup = true;
            break;
          }
        }
        if (!dup) {
          master.add_basis(std::move(b));
          ++added;
        }
      }
      log.columns_added = added;
      if (added > 0) {
        // New z variables invalidate every accumulated cut.
        master.remove_all_cuts();
        root_continue = true;
      }
    }
    out.iterations.push_back(log);
  }

  // The loop can exit right after a column round purged the cuts; bring the
  // master back to a fixed point before the integer phase.
  master.cut_loop();

  const BranchAndCutResult bnc = branch_and_cut(master, cfg, deadline);
  out.hit_time_limit = bnc.hit_time_limit;
  out.bound = bnc.bound;
  out.gap = bnc.gap;

  std::vector<int> selected_t;
  for (int t = 0; t < master.pool().size(); ++t) {
    if (bnc.z(t) > 0.5) selected_t.push_back(t);
  }
  const std::vector<int> labels = assign_columns(master.pool(), selected_t);

  out.labels = labels;
  out.selected.reserve(selected_t.size());
  for (int t : selected_t) out.selected.push_back(master.pool().basis(t));
  out.residuals.resize(static_cast<std::size_t>(data.n()));
  double objective = 0.0;
  for (int j = 0; j < data.n(); ++j) {
    const int t = selected_t[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
    out.residuals[static_cast<std::size_t>(j)] = master.pool().dist(j, t);
    objective += master.pool().cost(j, t);
  }
  for (int t : selected_t) objective += master.pool().selection_cost(t);
  out.objective = objective;
  out.wall_clock_seconds = now_seconds() - start;
  return out;
}

ClusteringSolution solve_regime(const ObservedMatrix& data, Regime regime,
                                const SolverConfig& cfg) {
  const bool k_known = cfg.K.has_value();
  const bool r_known = cfg.dims_known.has_value();
  auto mismatch = [](const char* msg) { throw std::invalid_argument(msg); };
  switch (regime) {
    case Regime::k_known_r_known:
      if (!k_known || !r_known) mismatch("regime needs K and dims in the config");
      break;
    case Regime::k_known_r_unknown:
      if (!k_known || r_known) mismatch("regime needs K set and dims unset");
      if (cfg.lambda <= 0) mismatch("regime needs lambda > 0 with dims unknown");
      break;
    case Regime::k_unknown_r_known:
      if (k_known || !r_known) mismatch("regime needs dims set and K unset");
      if (cfg.lambda <= 0) mismatch("regime needs lambda > 0 with K unknown");
      break;
    case Regime::k_unknown_r_unknown:
      if (k_known || r_known) mismatch("regime needs both K and dims unset");
      if (cfg.lambda <= 0) mismatch("regime needs lambda > 0");
      break;
  }
  return solve(data, cfg);
}

}  // namespace scmd
