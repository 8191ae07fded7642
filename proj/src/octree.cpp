#include "geoshoot/octree.hpp"

#include <cassert>

namespace geoshoot {

namespace {

constexpr double root_padding = 1e-9;  // relative to the box extent per axis

inline bool inside(const Vec3& lo, const Vec3& hi, const Vec3& x) {
  return x.x >= lo.x && x.x <= hi.x && x.y >= lo.y && x.y <= hi.y &&
         x.z >= lo.z && x.z <= hi.z;
}

}  // namespace

Octree::Octree(const Vec3& cell_min, const Vec3& cell_max) {
  Node root;
  root.cell_min = cell_min;
  root.cell_max = cell_max;
  nodes_.push_back(root);
}

Octree Octree::build(const PointSet& q, const MomentumSet& p) {
  require_aligned(q.size(), p.size(), "Octree::build");
  Vec3 lo = q[0], hi = q[0];
  for (const Vec3& x : q) {
    lo = cwise_min(lo, x);
    hi = cwise_max(hi, x);
  }
  const Vec3 pad = root_padding * (hi - lo);
  Octree tree(lo - pad, hi + pad);
  tree.points_.reserve(q.size());
  tree.momenta_.reserve(q.size());
  tree.next_point_.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    tree.insert(static_cast<std::uint32_t>(i), q[i], p[i]);
  return tree;
}

int Octree::octant_of(const Node& node, const Vec3& x) {
  const Vec3 c = 0.5 * (node.cell_min + node.cell_max);
  return (x.x >= c.x ? 1 : 0) | (x.y >= c.y ? 2 : 0) | (x.z >= c.z ? 4 : 0);
}

void Octree::add_stats(Node& n, const Vec3& q, const Vec3& p) {
  if (n.count == 0) {
    n.actual_min = n.actual_max = q;
  } else {
    n.actual_min = cwise_min(n.actual_min, q);
    n.actual_max = cwise_max(n.actual_max, q);
  }
  n.position_sum += q;
  n.momentum_sum += p;
  ++n.count;
}

std::int32_t Octree::make_child(std::int32_t parent, int octant) {
  const Vec3 lo = nodes_[parent].cell_min;
  const Vec3 hi = nodes_[parent].cell_max;
  const Vec3 c = 0.5 * (lo + hi);
  Node child;
  child.cell_min = {octant & 1 ? c.x : lo.x, octant & 2 ? c.y : lo.y,
                    octant & 4 ? c.z : lo.z};
  child.cell_max = {octant & 1 ? hi.x : c.x, octant & 2 ? hi.y : c.y,
                    octant & 4 ? hi.z : c.z};
  const auto idx = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(child);  // may reallocate; callers re-index afterwards
  nodes_[parent].children[octant] = idx;
  return idx;
}

void Octree::insert(std::uint32_t index, const Vec3& position,
                    const Vec3& momentum) {
  if (!inside(nodes_[0].cell_min, nodes_[0].cell_max, position))
    throw OutOfBounds("Octree::insert: point outside the root cell");
  if (index != points_.size())
    throw std::invalid_argument("Octree::insert: points must arrive in index order");
  points_.push_back(position);
  momenta_.push_back(momentum);
  next_point_.push_back(-1);

  std::int32_t cur = 0;
  int depth = 0;
  add_stats(nodes_[0], position, momentum);
  for (;;) {
    if (nodes_[cur].leaf) {
      if (nodes_[cur].count == 1) {  // was empty before this arrival
        nodes_[cur].first_point = static_cast<std::int32_t>(index);
        return;
      }
      if (depth == max_depth) {  // bucket: subdivision cannot separate these
        next_point_[index] = nodes_[cur].first_point;
        nodes_[cur].first_point = static_cast<std::int32_t>(index);
        return;
      }
      // Occupied leaf: subdivide and push the occupant into its octant. Its
      // statistics already cover every node from the root down to here, so
      // only the new child is initialized from it.
      const std::int32_t occupant = nodes_[cur].first_point;
      nodes_[cur].first_point = -1;
      nodes_[cur].leaf = false;
      const Vec3 occ_q = points_[static_cast<std::size_t>(occupant)];
      const Vec3 occ_p = momenta_[static_cast<std::size_t>(occupant)];
      const std::int32_t child = make_child(cur, octant_of(nodes_[cur], occ_q));
      add_stats(nodes_[child], occ_q, occ_p);
      nodes_[child].first_point = occupant;
    }
    const int octant = octant_of(nodes_[cur], position);
    std::int32_t child = nodes_[cur].children[octant];
    if (child == no_child) child = make_child(cur, octant);
    cur = child;
    ++depth;
    add_stats(nodes_[cur], position, momentum);
  }
}

void Octree::accumulate_adjoints(const std::vector<Vec3>& alpha,
                                 const std::vector<Vec3>& beta) {
  require_aligned(points_.size(), alpha.size(), "accumulate_adjoints(alpha)");
  require_aligned(points_.size(), beta.size(), "accumulate_adjoints(beta)");
  for (Node& n : nodes_) {
    n.alpha_sum = Vec3{};
    n.beta_sum = Vec3{};
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    std::int32_t cur = 0;
    for (;;) {
      nodes_[cur].alpha_sum += alpha[i];
      nodes_[cur].beta_sum += beta[i];
      if (nodes_[cur].leaf) break;
      const std::int32_t child =
          nodes_[cur].children[octant_of(nodes_[cur], points_[i])];
      assert(child != no_child);
      cur = child;
    }
  }
}

double Octree::min_distance(const Node& node, const Vec3& x) {
  const double dx =
      std::max({node.actual_min.x - x.x, 0.0, x.x - node.actual_max.x});
  const double dy =
      std::max({node.actual_min.y - x.y, 0.0, x.y - node.actual_max.y});
  const double dz =
      std::max({node.actual_min.z - x.z, 0.0, x.z - node.actual_max.z});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace geoshoot
