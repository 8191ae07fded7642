#pragma once

#include <vector>

#include "geoshoot/bh_kernel.hpp"
#include "geoshoot/core.hpp"
#include "geoshoot/kernel_exact.hpp"

namespace geoshoot {

// Time discretization of the Hamiltonian system, the registration objective
// E = H(q0, p0) + lambda * |q(1) - target|^2, the gradient of E with respect
// to the initial momentum, and dense warping of extra points through the
// computed flow.
//
// The integrator is explicit Euler on a uniform grid over [0, 1]:
//   q_{k+1} = q_k + dt * dH/dp(q_k, p_k)
//   p_{k+1} = p_k - dt * dH/dq(q_k, p_k)
// and the backward pass is the exact transpose of that recursion
// (discretize-then-differentiate), so the computed gradient matches finite
// differences of the discrete objective to near machine precision. Under the
// Barnes-Hut backend, each step's kernel sums run over an octree rebuilt for
// that step's point positions; the backward stage re-annotates the forward
// trees with the current adjoints instead of rebuilding geometry.

/// Adjoints of the objective with respect to intermediate positions (alpha)
/// and momenta (beta), index-aligned with the trajectory's points.
struct AdjointState {
  std::vector<Vec3> alpha;
  std::vector<Vec3> beta;
};

struct ObjectiveReport {
  double energy = 0.0;        // H(q0, p0)
  double attachment = 0.0;    // lambda * residual_sse
  double total = 0.0;         // energy + attachment
  double residual_sse = 0.0;  // |q(1) - target|^2, unweighted
};

/// Per-evaluation instrumentation for the benchmark harness.
struct EvalStats {
  double tree_build_ms = 0.0;
  double forward_ms = 0.0;
  double backward_ms = 0.0;
  TraversalStats traversal;
  std::uint64_t traversal_queries = 0;

  void merge(const EvalStats& o) {
    tree_build_ms += o.tree_build_ms;
    forward_ms += o.forward_ms;
    backward_ms += o.backward_ms;
    traversal.merge(o.traversal);
    traversal_queries += o.traversal_queries;
  }
};

GeodesicTrajectory shoot_forward(const PointSet& q0, const MomentumSet& p0,
                                 const ShootingConfig& config);

ObjectiveReport objective(const PointSet& q0, const MomentumSet& p0,
                          const PointSet& target, const ShootingConfig& config);

/// Gradient of the discretized objective with respect to p0. The trajectory
/// must come from shoot_forward under the same config.
std::vector<Vec3> backward_gradient(const GeodesicTrajectory& trajectory,
                                    const PointSet& target,
                                    const ShootingConfig& config);

/// Advects arbitrary points through the flow defined by the trajectory, on
/// the same Euler grid and through the same backend. Carrier points passed
/// back in reproduce the trajectory's endpoints.
PointSet warp_points(const GeodesicTrajectory& trajectory, const PointSet& x,
                     const ShootingConfig& config);

/// One fused objective + gradient evaluation, sharing the forward pass (and,
/// under Barnes-Hut, the per-step trees) between the two. This is what the
/// optimizer calls in its hot loop. threads = 0 picks the process default.
struct Evaluation {
  ObjectiveReport report;
  std::vector<Vec3> gradient;
  EvalStats stats;
};

Evaluation evaluate(const PointSet& q0, const MomentumSet& p0,
                    const PointSet& target, const ShootingConfig& config,
                    int threads = 0);

}  // namespace geoshoot
