#pragma once

#include <cstdint>

#include "geoshoot/kernel_exact.hpp"
#include "geoshoot/octree.hpp"

namespace geoshoot {

// Barnes-Hut approximation of every kernel sum used by the forward flow and
// the backward gradient. A query traverses the tree; each node falls into one
// of three scenarios: (1) a leaf contributes its point(s) exactly, (2) a
// multi-point node whose tight box lies entirely beyond the opening threshold
// (normally 3 sigma) contributes one term evaluated at its centroid with its
// aggregate momentum/adjoints, (3) anything else is descended. Because
// min_distance is a lower bound on the distance to any contained point, the
// gate in (2) is conservative. A query point that is itself in the tree is
// always resolved down to its own leaf (its containing nodes have
// min_distance 0), so the self term is exact without special-casing.
//
// Compiled with GEOSHOOT_BH_LITERAL_MEAN_DOT, the dot-product substitution in
// approximated terms divides by the node's point count (one reading of the
// momentum-averaging rule); the default treats the aggregate momentum as a
// plain sum, which makes an approximated node stand for the sum of its
// pairwise terms. Only approximated terms differ, so both readings agree
// whenever the threshold prevents approximation.

struct TraversalStats {
  std::uint64_t direct_interactions = 0;
  std::uint64_t approximated_interactions = 0;
  std::uint64_t nodes_visited = 0;

  void merge(const TraversalStats& o) {
    direct_interactions += o.direct_interactions;
    approximated_interactions += o.approximated_interactions;
    nodes_visited += o.nodes_visited;
  }
};

// --- Per-query primitives (one traversal each) ------------------------------

struct BhVelocity {
  Vec3 velocity;
  TraversalStats stats;
};

/// v(x) = sum over traversal units of G * (point or aggregate momentum).
BhVelocity bh_velocity(const Octree& tree, const Vec3& x, double sigma,
                       double threshold);

struct BhPointGradients {
  Vec3 dH_dp;
  Vec3 dH_dq;
};

/// Both first partials of H at one query point (position x, momentum px),
/// accumulated in a single traversal.
BhPointGradients bh_point_gradients(const Octree& tree, const Vec3& x,
                                    const Vec3& px, double sigma,
                                    double threshold,
                                    TraversalStats* stats = nullptr);

struct BhPointHessianProducts {
  Vec3 pq_alpha;
  Vec3 pp_alpha;
  Vec3 qq_beta;
  Vec3 qp_beta;
};

/// All four second-order products for query point i in a single traversal.
/// Direct terms read the per-point adjoints from alpha/beta (indexed by the
/// source point id); approximated terms read the node sums written by
/// accumulate_adjoints, which must correspond to the same alpha/beta.
BhPointHessianProducts bh_point_hessian_products(
    const Octree& tree, const Vec3& qi, const Vec3& pi, const Vec3& alpha_i,
    const Vec3& beta_i, const std::vector<Vec3>& alpha,
    const std::vector<Vec3>& beta, double sigma, double threshold,
    TraversalStats* stats = nullptr);

// --- Whole-set operations ----------------------------------------------------

double bh_hamiltonian(const Octree& tree, const PointSet& q,
                      const MomentumSet& p, double sigma, double threshold,
                      TraversalStats* stats = nullptr);

HamiltonianGradients bh_hamiltonian_gradients(const Octree& tree,
                                              const PointSet& q,
                                              const MomentumSet& p,
                                              double sigma, double threshold,
                                              TraversalStats* stats = nullptr);

/// Tree-approximated counterpart of hessian_products; the tree must have been
/// annotated with exactly these alpha/beta.
HessianProducts bh_hessian_products(const Octree& tree, const PointSet& q,
                                    const MomentumSet& p,
                                    const std::vector<Vec3>& alpha,
                                    const std::vector<Vec3>& beta, double sigma,
                                    double threshold,
                                    TraversalStats* stats = nullptr);

}  // namespace geoshoot
