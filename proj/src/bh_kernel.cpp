#include "geoshoot/bh_kernel.hpp"

#include <array>
#include <cassert>

namespace geoshoot {

namespace {

// Depth <= 32 and at most 7 extra pushes per level keeps the stack well
// under this bound.
constexpr int stack_capacity = 8 * (Octree::max_depth + 1);

inline void require_tree(const Octree& tree) {
  if (tree.point_count() == 0)
    throw EmptyTree("Barnes-Hut query on an empty tree");
}

inline double aggregate_dot_scale(const Octree::Node& n) {
#ifdef GEOSHOOT_BH_LITERAL_MEAN_DOT
  return 1.0 / n.count;
#else
  (void)n;
  return 1.0;
#endif
}

// Shared traversal skeleton. Direct(point_index) handles scenario 1,
// Approx(node) scenario 2.
template <typename Direct, typename Approx>
void traverse(const Octree& tree, const Vec3& x, double threshold,
              TraversalStats& stats, Direct&& direct, Approx&& approx) {
  const auto& next = tree.next_point();
  std::array<std::int32_t, stack_capacity> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Octree::Node& nd = tree.node(static_cast<std::size_t>(stack[--top]));
    ++stats.nodes_visited;
    if (nd.leaf) {
      for (std::int32_t i = nd.first_point; i >= 0;
           i = next[static_cast<std::size_t>(i)]) {
        direct(static_cast<std::size_t>(i));
        ++stats.direct_interactions;
      }
    } else if (Octree::min_distance(nd, x) > threshold) {
      approx(nd);
      ++stats.approximated_interactions;
    } else {
      for (int c = 0; c < 8; ++c) {
        if (nd.children[c] != Octree::no_child) {
          assert(top < stack_capacity);
          stack[top++] = nd.children[c];
        }
      }
    }
  }
}

}  // namespace

BhVelocity bh_velocity(const Octree& tree, const Vec3& x, double sigma,
                       double threshold) {
  require_tree(tree);
  const double inv_two_s = 1.0 / (2.0 * sigma * sigma);
  const auto& qs = tree.points();
  const auto& ps = tree.momenta();
  BhVelocity out;
  traverse(
      tree, x, threshold, out.stats,
      [&](std::size_t i) {
        out.velocity += std::exp(-norm2(x - qs[i]) * inv_two_s) * ps[i];
      },
      [&](const Octree::Node& nd) {
        out.velocity +=
            std::exp(-norm2(x - nd.centroid()) * inv_two_s) * nd.momentum_sum;
      });
  return out;
}

BhPointGradients bh_point_gradients(const Octree& tree, const Vec3& x,
                                    const Vec3& px, double sigma,
                                    double threshold, TraversalStats* stats) {
  require_tree(tree);
  const double s = sigma * sigma;
  const double inv_two_s = 0.5 / s;
  const double two_over_s = 2.0 / s;
  const auto& qs = tree.points();
  const auto& ps = tree.momenta();

  BhPointGradients out;
  TraversalStats local;
  traverse(
      tree, x, threshold, local,
      [&](std::size_t j) {
        const Vec3 d = x - qs[j];
        const double g = std::exp(-norm2(d) * inv_two_s);
        out.dH_dp += (2.0 * g) * ps[j];
        out.dH_dq -= (two_over_s * dot(px, ps[j]) * g) * d;
      },
      [&](const Octree::Node& nd) {
        const Vec3 d = x - nd.centroid();
        const double g = std::exp(-norm2(d) * inv_two_s);
        out.dH_dp += (2.0 * g) * nd.momentum_sum;
        out.dH_dq -=
            (two_over_s * (dot(px, nd.momentum_sum) * aggregate_dot_scale(nd)) *
             g) *
            d;
      });
  if (stats) stats->merge(local);
  return out;
}

BhPointHessianProducts bh_point_hessian_products(
    const Octree& tree, const Vec3& qi, const Vec3& pi, const Vec3& alpha_i,
    const Vec3& beta_i, const std::vector<Vec3>& alpha,
    const std::vector<Vec3>& beta, double sigma, double threshold,
    TraversalStats* stats) {
  require_tree(tree);
  const double s = sigma * sigma;
  const double inv_s = 1.0 / s;
  const double inv_two_s = 0.5 * inv_s;
  const double two_over_s = 2.0 * inv_s;
  const auto& qs = tree.points();
  const auto& ps = tree.momenta();

  BhPointHessianProducts out;
  TraversalStats local;
  traverse(
      tree, qi, threshold, local,
      [&](std::size_t j) {
        const Vec3 d = qi - qs[j];
        const double g = std::exp(-norm2(d) * inv_two_s);
        const Vec3 db = beta_i - beta[j];
        const double d_db = dot(d, db);
        out.pq_alpha -=
            (two_over_s * g * (dot(ps[j], alpha_i) + dot(pi, alpha[j]))) * d;
        out.pp_alpha += (2.0 * g) * alpha[j];
        out.qq_beta +=
            (two_over_s * g * dot(pi, ps[j])) * ((d_db * inv_s) * d - db);
        out.qp_beta -= (two_over_s * g * d_db) * ps[j];
      },
      [&](const Octree::Node& nd) {
        const Vec3 d = qi - nd.centroid();
        const double g = std::exp(-norm2(d) * inv_two_s);
        const Vec3 db = beta_i - (1.0 / nd.count) * nd.beta_sum;
        const double d_db = dot(d, db);
        out.pq_alpha -=
            (two_over_s * g *
             (dot(nd.momentum_sum, alpha_i) + dot(pi, nd.alpha_sum))) *
            d;
        out.pp_alpha += (2.0 * g) * nd.alpha_sum;
        out.qq_beta += (two_over_s * g *
                        (dot(pi, nd.momentum_sum) * aggregate_dot_scale(nd))) *
                       ((d_db * inv_s) * d - db);
        out.qp_beta -= (two_over_s * g * d_db) * nd.momentum_sum;
      });
  if (stats) stats->merge(local);
  return out;
}

double bh_hamiltonian(const Octree& tree, const PointSet& q,
                      const MomentumSet& p, double sigma, double threshold,
                      TraversalStats* stats) {
  require_tree(tree);
  require_aligned(q.size(), p.size(), "bh_hamiltonian");
  require_aligned(q.size(), tree.point_count(), "bh_hamiltonian(tree)");
  const double inv_two_s = 1.0 / (2.0 * sigma * sigma);
  const auto& qs = tree.points();
  const auto& ps = tree.momenta();

  double h = 0.0;
  TraversalStats local;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const Vec3 qj = q[j];
    const Vec3 pj = p[j];
    double hj = 0.0;
    traverse(
        tree, qj, threshold, local,
        [&](std::size_t i) {
          hj += dot(pj, ps[i]) * std::exp(-norm2(qj - qs[i]) * inv_two_s);
        },
        [&](const Octree::Node& nd) {
          hj += dot(pj, nd.momentum_sum) * aggregate_dot_scale(nd) *
                std::exp(-norm2(qj - nd.centroid()) * inv_two_s);
        });
    h += hj;
  }
  if (stats) stats->merge(local);
  return h;
}

HamiltonianGradients bh_hamiltonian_gradients(const Octree& tree,
                                              const PointSet& q,
                                              const MomentumSet& p,
                                              double sigma, double threshold,
                                              TraversalStats* stats) {
  require_aligned(q.size(), p.size(), "bh_hamiltonian_gradients");
  require_aligned(q.size(), tree.point_count(), "bh_hamiltonian_gradients(tree)");
  HamiltonianGradients out;
  out.dH_dp.resize(q.size());
  out.dH_dq.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const BhPointGradients gi =
        bh_point_gradients(tree, q[i], p[i], sigma, threshold, stats);
    out.dH_dp[i] = gi.dH_dp;
    out.dH_dq[i] = gi.dH_dq;
  }
  return out;
}

HessianProducts bh_hessian_products(const Octree& tree, const PointSet& q,
                                    const MomentumSet& p,
                                    const std::vector<Vec3>& alpha,
                                    const std::vector<Vec3>& beta, double sigma,
                                    double threshold, TraversalStats* stats) {
  require_aligned(q.size(), p.size(), "bh_hessian_products");
  require_aligned(q.size(), alpha.size(), "bh_hessian_products(alpha)");
  require_aligned(q.size(), beta.size(), "bh_hessian_products(beta)");
  require_aligned(q.size(), tree.point_count(), "bh_hessian_products(tree)");
  HessianProducts out;
  out.pq_alpha.resize(q.size());
  out.pp_alpha.resize(q.size());
  out.qq_beta.resize(q.size());
  out.qp_beta.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const BhPointHessianProducts hi = bh_point_hessian_products(
        tree, q[i], p[i], alpha[i], beta[i], alpha, beta, sigma, threshold,
        stats);
    out.pq_alpha[i] = hi.pq_alpha;
    out.pp_alpha[i] = hi.pp_alpha;
    out.qq_beta[i] = hi.qq_beta;
    out.qp_beta[i] = hi.qp_beta;
  }
  return out;
}

}  // namespace geoshoot
