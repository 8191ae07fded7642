#pragma once

#include <cstdint>

#include "geoshoot/core.hpp"

namespace geoshoot {

// Deterministic generators for the synthetic experiment shapes and generic
// test fixtures. Paired specs (same kind family, same n_points) produce
// index-corresponding point sets: point i of the moving shape matches point i
// of the fixed one. 2-D shapes are embedded at z = 0.

enum class ShapeKind {
  Circle,
  TwoCircles,
  FlatRectangle,
  BentRectangle,
  UniformBox,
  ClusteredPairs,
};

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Circle;
  int n_points = 100;

  // Circle / TwoCircles
  double radius = 1.0;
  double radius2 = 2.0;     // second circle of TwoCircles
  Vec3 center{};
  Vec3 center_offset{};     // second circle center = center + center_offset

  // FlatRectangle / BentRectangle. The defaults put the flat instance in the
  // sparse-neighborhood regime at sigma = 2 (b/N well below 0.25), which is
  // where the tree approximation pays off.
  double length = 100.0;
  double width = 4.0;
  double bend_angle = 0.0;  // radians of circular-arc bend; 0 = flat

  // UniformBox / ClusteredPairs
  double extent = 10.0;
  double cluster_spread = 0.05;  // distance between the two points of a pair

  std::uint64_t rng_seed = 0;

  static ShapeSpec circle(int n, double r, Vec3 c = {}) {
    ShapeSpec s;
    s.kind = ShapeKind::Circle;
    s.n_points = n;
    s.radius = r;
    s.center = c;
    return s;
  }
  static ShapeSpec flat_rectangle(int n, double length = 100.0,
                                  double width = 4.0) {
    ShapeSpec s;
    s.kind = ShapeKind::FlatRectangle;
    s.n_points = n;
    s.length = length;
    s.width = width;
    return s;
  }
  static ShapeSpec bent_rectangle(int n, double angle, double length = 100.0,
                                  double width = 4.0) {
    ShapeSpec s = flat_rectangle(n, length, width);
    s.kind = ShapeKind::BentRectangle;
    s.bend_angle = angle;
    return s;
  }
  static ShapeSpec uniform_box(int n, double extent, std::uint64_t seed) {
    ShapeSpec s;
    s.kind = ShapeKind::UniformBox;
    s.n_points = n;
    s.extent = extent;
    s.rng_seed = seed;
    return s;
  }
  static ShapeSpec clustered_pairs(int n, double extent, double spread,
                                   std::uint64_t seed) {
    ShapeSpec s;
    s.kind = ShapeKind::ClusteredPairs;
    s.n_points = n;
    s.extent = extent;
    s.cluster_spread = spread;
    s.rng_seed = seed;
    return s;
  }
};

PointSet generate(const ShapeSpec& spec);

struct PairwiseStats {
  double mean_neighbors = 0.0;  // b: mean count of other points within 3 sigma
  double diameter = 0.0;        // max pairwise distance
};

/// Brute-force neighborhood census. b predicts whether the tree approximation
/// helps (b << N) or hurts (b close to N). The point itself is not counted.
PairwiseStats pairwise_stats(const PointSet& q, double sigma);

}  // namespace geoshoot
