#include "geoshoot/shooting.hpp"

#include <chrono>
#include <optional>

#include "geoshoot/parallel.hpp"

namespace geoshoot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool all_finite(const std::vector<Vec3>& v) {
  for (const Vec3& x : v)
    if (!is_finite(x)) return false;
  return true;
}

int resolve_threads(int threads) {
  return threads > 0 ? threads : default_thread_count();
}

// Per-step kernel gradients through the configured backend. BH traversals
// run one query per point, parallelizable because each output element is
// written by exactly one task.
HamiltonianGradients step_gradients(const PointSet& q, const MomentumSet& p,
                                    const ShootingConfig& cfg,
                                    const Octree* tree, int threads,
                                    EvalStats* stats) {
  const std::size_t n = q.size();
  if (cfg.backend == Backend::Exact) {
    if (stats) {
      stats->traversal.direct_interactions += n * n;
      stats->traversal_queries += n;
    }
    return hamiltonian_gradients(q, p, cfg.sigma);
  }
  HamiltonianGradients out;
  out.dH_dp.assign(n, Vec3{});
  out.dH_dq.assign(n, Vec3{});
  const double threshold = cfg.opening_threshold();
  std::vector<TraversalStats> per_point(stats ? n : 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const BhPointGradients gi =
        bh_point_gradients(*tree, q[i], p[i], cfg.sigma, threshold,
                           stats ? &per_point[i] : nullptr);
    out.dH_dp[i] = gi.dH_dp;
    out.dH_dq[i] = gi.dH_dq;
  });
  if (stats) {
    for (const TraversalStats& ts : per_point) stats->traversal.merge(ts);
    stats->traversal_queries += n;
  }
  return out;
}

struct ForwardPass {
  GeodesicTrajectory trajectory;
  std::vector<Octree> trees;  // BH: tree per step k = 0..T-1
  double energy = 0.0;        // H(q0, p0) under the configured backend
};

ForwardPass run_forward(const PointSet& q0, const MomentumSet& p0,
                        const ShootingConfig& cfg, bool keep_trees,
                        int threads, EvalStats* stats) {
  validate_config(cfg);
  require_aligned(q0.size(), p0.size(), "shoot_forward");
  const std::size_t n = q0.size();
  const int t_steps = cfg.timesteps;
  const double dt = 1.0 / t_steps;
  const bool bh = cfg.backend == Backend::BarnesHut;

  ForwardPass pass;
  pass.trajectory.states.reserve(static_cast<std::size_t>(t_steps) + 1);
  pass.trajectory.states.push_back({q0, p0});
  if (keep_trees && bh) pass.trees.reserve(static_cast<std::size_t>(t_steps));

  const auto t_fwd = Clock::now();
  double tree_ms = 0.0;
  for (int k = 0; k < t_steps; ++k) {
    const auto& state = pass.trajectory.states.back();

    std::optional<Octree> local_tree;
    const Octree* tree = nullptr;
    if (bh) {
      const auto t_build = Clock::now();
      if (keep_trees) {
        pass.trees.push_back(Octree::build(state.q, state.p));
        tree = &pass.trees.back();
      } else {
        local_tree.emplace(Octree::build(state.q, state.p));
        tree = &*local_tree;
      }
      tree_ms += ms_since(t_build);
    }

    HamiltonianGradients g = step_gradients(state.q, state.p, cfg, tree,
                                            threads, stats);
    if (k == 0) {
      double h = 0.0;
      for (std::size_t i = 0; i < n; ++i) h += dot(p0[i], g.dH_dp[i]);
      pass.energy = 0.5 * h;  // H = (1/2) <p, dH/dp>
    }

    std::vector<Vec3> q_next(n), p_next(n);
    for (std::size_t i = 0; i < n; ++i) {
      q_next[i] = state.q[i] + dt * g.dH_dp[i];
      p_next[i] = state.p[i] - dt * g.dH_dq[i];
    }
    if (!all_finite(q_next) || !all_finite(p_next)) throw NonFiniteState(k + 1);
    pass.trajectory.states.push_back(
        {PointSet(std::move(q_next)), MomentumSet(std::move(p_next))});
  }
  if (stats) {
    stats->tree_build_ms += tree_ms;
    stats->forward_ms += ms_since(t_fwd) - tree_ms;
  }
  return pass;
}

ObjectiveReport make_report(const ForwardPass& pass, const PointSet& target,
                            const ShootingConfig& cfg) {
  const PointSet& q1 = pass.trajectory.final_state().q;
  require_aligned(q1.size(), target.size(), "objective(target)");
  double sse = 0.0;
  for (std::size_t i = 0; i < q1.size(); ++i) sse += norm2(q1[i] - target[i]);
  ObjectiveReport r;
  r.energy = pass.energy;
  r.residual_sse = sse;
  r.attachment = cfg.lambda * sse;
  r.total = r.energy + r.attachment;
  return r;
}

// Transpose of the forward Euler recursion. `trees`, when given, must hold
// the forward-pass trees (one per step); they are re-annotated in place with
// the adjoints of each step. Without them the geometry is rebuilt per step.
std::vector<Vec3> run_backward(const GeodesicTrajectory& traj,
                               const PointSet& target,
                               const ShootingConfig& cfg,
                               std::vector<Octree>* trees, int threads,
                               EvalStats* stats) {
  validate_config(cfg);
  const int t_steps = cfg.timesteps;
  if (traj.states.size() != static_cast<std::size_t>(t_steps) + 1)
    throw ConfigMismatch("backward_gradient: trajectory length != timesteps + 1");
  const std::size_t n = traj.point_count();
  require_aligned(n, target.size(), "backward_gradient(target)");
  const double dt = 1.0 / t_steps;
  const bool bh = cfg.backend == Backend::BarnesHut;
  const double threshold = cfg.opening_threshold();

  const auto t_bwd = Clock::now();
  double tree_ms = 0.0;

  AdjointState adj;
  adj.alpha.resize(n);
  adj.beta.assign(n, Vec3{});
  const PointSet& q1 = traj.final_state().q;
  for (std::size_t i = 0; i < n; ++i)
    adj.alpha[i] = (2.0 * cfg.lambda) * (q1[i] - target[i]);

  std::optional<Octree> local_tree;
  for (int k = t_steps - 1; k >= 0; --k) {
    const auto& state = traj.states[static_cast<std::size_t>(k)];

    HessianProducts hp;
    if (bh) {
      Octree* tree;
      if (trees) {
        tree = &(*trees)[static_cast<std::size_t>(k)];
      } else {
        const auto t_build = Clock::now();
        local_tree.emplace(Octree::build(state.q, state.p));
        tree_ms += ms_since(t_build);
        tree = &*local_tree;
      }
      tree->accumulate_adjoints(adj.alpha, adj.beta);
      hp.pq_alpha.assign(n, Vec3{});
      hp.pp_alpha.assign(n, Vec3{});
      hp.qq_beta.assign(n, Vec3{});
      hp.qp_beta.assign(n, Vec3{});
      std::vector<TraversalStats> per_point(stats ? n : 0);
      const Octree& tr = *tree;
      parallel_for(n, threads, [&](std::size_t i) {
        const BhPointHessianProducts hi = bh_point_hessian_products(
            tr, state.q[i], state.p[i], adj.alpha[i], adj.beta[i], adj.alpha,
            adj.beta, cfg.sigma, threshold, stats ? &per_point[i] : nullptr);
        hp.pq_alpha[i] = hi.pq_alpha;
        hp.pp_alpha[i] = hi.pp_alpha;
        hp.qq_beta[i] = hi.qq_beta;
        hp.qp_beta[i] = hi.qp_beta;
      });
      if (stats) {
        for (const TraversalStats& ts : per_point) stats->traversal.merge(ts);
        stats->traversal_queries += n;
      }
    } else {
      hp = hessian_products(state.q, state.p, adj.alpha, adj.beta, cfg.sigma);
      if (stats) {
        stats->traversal.direct_interactions += n * n;
        stats->traversal_queries += n;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      adj.alpha[i] += dt * (hp.pq_alpha[i] - hp.qq_beta[i]);
      adj.beta[i] += dt * (hp.pp_alpha[i] - hp.qp_beta[i]);
    }
  }

  // Direct contribution of the H(q0, p0) energy term.
  const auto& s0 = traj.initial();
  HamiltonianGradients g0;
  if (bh) {
    Octree* tree0 = trees ? &(*trees)[0] : &*local_tree;
    g0 = bh_hamiltonian_gradients(*tree0, s0.q, s0.p, cfg.sigma, threshold,
                                  stats ? &stats->traversal : nullptr);
    if (stats) stats->traversal_queries += n;
  } else {
    g0 = hamiltonian_gradients(s0.q, s0.p, cfg.sigma);
    if (stats) {
      stats->traversal.direct_interactions += n * n;
      stats->traversal_queries += n;
    }
  }

  std::vector<Vec3> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = adj.beta[i] + g0.dH_dp[i];
  if (stats) {
    stats->tree_build_ms += tree_ms;
    stats->backward_ms += ms_since(t_bwd) - tree_ms;
  }
  return grad;
}

}  // namespace

GeodesicTrajectory shoot_forward(const PointSet& q0, const MomentumSet& p0,
                                 const ShootingConfig& config) {
  return run_forward(q0, p0, config, /*keep_trees=*/false,
                     resolve_threads(0), nullptr)
      .trajectory;
}

ObjectiveReport objective(const PointSet& q0, const MomentumSet& p0,
                          const PointSet& target,
                          const ShootingConfig& config) {
  ForwardPass pass = run_forward(q0, p0, config, /*keep_trees=*/false,
                                 resolve_threads(0), nullptr);
  return make_report(pass, target, config);
}

std::vector<Vec3> backward_gradient(const GeodesicTrajectory& trajectory,
                                    const PointSet& target,
                                    const ShootingConfig& config) {
  return run_backward(trajectory, target, config, nullptr,
                      resolve_threads(0), nullptr);
}

PointSet warp_points(const GeodesicTrajectory& trajectory, const PointSet& x,
                     const ShootingConfig& config) {
  validate_config(config);
  const int t_steps = config.timesteps;
  if (trajectory.states.size() != static_cast<std::size_t>(t_steps) + 1)
    throw ConfigMismatch("warp_points: trajectory length != timesteps + 1");
  const double dt = 1.0 / t_steps;
  const int threads = resolve_threads(0);
  const bool bh = config.backend == Backend::BarnesHut;
  const double threshold = config.opening_threshold();

  std::vector<Vec3> y(x.begin(), x.end());
  for (int k = 0; k < t_steps; ++k) {
    const auto& state = trajectory.states[static_cast<std::size_t>(k)];
    std::vector<Vec3> v(y.size());
    if (bh) {
      const Octree tree = Octree::build(state.q, state.p);
      parallel_for(y.size(), threads, [&](std::size_t e) {
        v[e] = flow_velocity_factor *
               bh_velocity(tree, y[e], config.sigma, threshold).velocity;
      });
    } else {
      const double inv_two_s = 1.0 / (2.0 * config.sigma * config.sigma);
      parallel_for(y.size(), threads, [&](std::size_t e) {
        Vec3 sum{};
        for (std::size_t i = 0; i < state.q.size(); ++i)
          sum += std::exp(-norm2(y[e] - state.q[i]) * inv_two_s) * state.p[i];
        v[e] = flow_velocity_factor * sum;
      });
    }
    for (std::size_t e = 0; e < y.size(); ++e) y[e] += dt * v[e];
    if (!all_finite(y)) throw NonFiniteState(k + 1);
  }
  return PointSet(std::move(y));
}

Evaluation evaluate(const PointSet& q0, const MomentumSet& p0,
                    const PointSet& target, const ShootingConfig& config,
                    int threads) {
  const int nthreads = resolve_threads(threads);
  Evaluation ev;
  ForwardPass pass = run_forward(q0, p0, config, /*keep_trees=*/true, nthreads,
                                 &ev.stats);
  ev.report = make_report(pass, target, config);
  ev.gradient = run_backward(pass.trajectory, target, config,
                             pass.trees.empty() ? nullptr : &pass.trees,
                             nthreads, &ev.stats);
  return ev;
}

}  // namespace geoshoot
