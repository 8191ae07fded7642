#pragma once

#include <cstdint>
#include <vector>

#include "geoshoot/core.hpp"

namespace geoshoot {

// Oct-tree over a point set, rebuilt from scratch whenever the points move.
// Every node keeps incremental summary statistics (count, position sum,
// momentum sum, tight bounds of the points actually inserted) plus a pair of
// adjoint accumulators filled in by accumulate_adjoints during the backward
// stage. Leaves hold a single point; only coincident (or pathologically
// close) points that subdivision cannot separate share a leaf, as a chained
// bucket at the depth cap.
class Octree {
 public:
  static constexpr int max_depth = 32;
  static constexpr std::int32_t no_child = -1;

  struct Node {
    Vec3 cell_min, cell_max;      // assigned cell (octant of the parent)
    Vec3 actual_min, actual_max;  // tight bounds of inserted points
    Vec3 position_sum;            // sum of inserted positions
    Vec3 momentum_sum;            // sum of inserted momenta (p_kc)
    Vec3 alpha_sum;               // sum of position adjoints
    Vec3 beta_sum;                // sum of momentum adjoints
    std::uint32_t count = 0;
    std::int32_t children[8] = {no_child, no_child, no_child, no_child,
                                no_child, no_child, no_child, no_child};
    std::int32_t first_point = -1;  // leaf payload: chain head into next_point()
    bool leaf = true;

    Vec3 centroid() const { return position_sum * (1.0 / count); }
  };

  /// Tree over an explicit root cell; points must fall inside it.
  Octree(const Vec3& cell_min, const Vec3& cell_max);

  /// Root cell = global bounding box of q, expanded by a relative epsilon so
  /// boundary points fall strictly inside; then every point is inserted in
  /// index order.
  static Octree build(const PointSet& q, const MomentumSet& p);

  /// Inserts one point. Points must arrive in index order (index == size()).
  /// Recursion policy: non-leaf nodes route the point to its octant; an empty
  /// leaf stores it; an occupied leaf is subdivided, with the previous
  /// occupant pushed into its own octant first. Statistics on every node
  /// along the path are updated on arrival.
  void insert(std::uint32_t index, const Vec3& position, const Vec3& momentum);

  /// Re-annotates the tree with per-point adjoints: after the call, every
  /// node's alpha_sum/beta_sum equal the sums of alpha/beta over the points
  /// it contains. Geometry statistics are untouched; calling again with new
  /// adjoints overwrites the previous annotation.
  void accumulate_adjoints(const std::vector<Vec3>& alpha,
                           const std::vector<Vec3>& beta);

  /// Euclidean distance from x to the node's tight bounding box (0 inside).
  /// A lower bound on the distance from x to any point in the node, which is
  /// what makes the opening criterion conservative.
  static double min_distance(const Node& node, const Vec3& x);

  std::size_t point_count() const { return points_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const Node& root() const { return nodes_.front(); }

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<Vec3>& momenta() const { return momenta_; }
  /// Bucket chains: next point index in the same leaf, -1 at the end.
  const std::vector<std::int32_t>& next_point() const { return next_point_; }

  /// Octant of x relative to the node's cell center. Bit 0 = x-high,
  /// bit 1 = y-high, bit 2 = z-high; points on a splitting plane go high.
  static int octant_of(const Node& node, const Vec3& x);

 private:
  void add_stats(Node& n, const Vec3& q, const Vec3& p);
  std::int32_t make_child(std::int32_t parent, int octant);

  std::vector<Node> nodes_;
  std::vector<Vec3> points_;
  std::vector<Vec3> momenta_;
  std::vector<std::int32_t> next_point_;
};

}  // namespace geoshoot
