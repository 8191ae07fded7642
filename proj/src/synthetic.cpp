#include "geoshoot/synthetic.hpp"

#include <cmath>
#include <random>

namespace geoshoot {

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

// 53-bit uniform in [0, 1). Derived from the raw engine output so the stream
// does not depend on the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check(bool ok, const char* what) {
  if (!ok) throw InvalidSpec(what);
}

void append_circle(std::vector<Vec3>& out, int n, double r, const Vec3& c) {
  for (int k = 0; k < n; ++k) {
    const double a = two_pi * k / n;
    out.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a), c.z});
  }
}

// Row-major grid enumeration over the rectangle [0, L] x [-W/2, W/2], cut to
// exactly n points; the bent variant maps every grid node through the same
// enumeration, preserving index correspondence.
template <typename MapFn>
std::vector<Vec3> rectangle_grid(int n, double length, double width,
                                 MapFn&& map) {
  const int ny = std::max(
      1, static_cast<int>(std::lround(std::sqrt(n * width / length))));
  const int nx = (n + ny - 1) / ny;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int ix = 0; ix < nx && static_cast<int>(out.size()) < n; ++ix) {
    const double x = nx > 1 ? length * ix / (nx - 1) : 0.0;
    for (int iy = 0; iy < ny && static_cast<int>(out.size()) < n; ++iy) {
      const double y = ny > 1 ? -0.5 * width + width * iy / (ny - 1) : 0.0;
      out.push_back(map(x, y));
    }
  }
  return out;
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
  const double z = 2.0 * uniform01(rng) - 1.0;
  const double t = two_pi * uniform01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(t), r * std::sin(t), z};
}

}  // namespace

PointSet generate(const ShapeSpec& spec) {
  check(spec.n_points >= 1, "n_points must be >= 1");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(spec.n_points));

  switch (spec.kind) {
    case ShapeKind::Circle: {
      check(spec.radius > 0.0, "radius must be positive");
      append_circle(pts, spec.n_points, spec.radius, spec.center);
      break;
    }
    case ShapeKind::TwoCircles: {
      check(spec.radius > 0.0 && spec.radius2 > 0.0,
            "radii must be positive");
      const int n1 = spec.n_points / 2;
      const int n2 = spec.n_points - n1;
      if (n1 > 0) append_circle(pts, n1, spec.radius, spec.center);
      append_circle(pts, n2, spec.radius2, spec.center + spec.center_offset);
      break;
    }
    case ShapeKind::FlatRectangle: {
      check(spec.length > 0.0 && spec.width > 0.0,
            "rectangle dimensions must be positive");
      pts = rectangle_grid(spec.n_points, spec.length, spec.width,
                           [](double x, double y) { return Vec3{x, y, 0.0}; });
      break;
    }
    case ShapeKind::BentRectangle: {
      check(spec.length > 0.0 && spec.width > 0.0,
            "rectangle dimensions must be positive");
      check(spec.bend_angle >= 0.0, "bend angle must be nonnegative");
      if (spec.bend_angle == 0.0) {
        pts = rectangle_grid(spec.n_points, spec.length, spec.width,
                             [](double x, double y) { return Vec3{x, y, 0.0}; });
      } else {
        // Circular-arc bend: the long axis becomes an arc of radius
        // R = L / angle, the short axis stays radial. Converges to the flat
        // grid as the angle goes to 0.
        const double arc_radius = spec.length / spec.bend_angle;
        pts = rectangle_grid(
            spec.n_points, spec.length, spec.width,
            [arc_radius](double x, double y) {
              const double phi = x / arc_radius;
              return Vec3{(arc_radius - y) * std::sin(phi),
                          arc_radius - (arc_radius - y) * std::cos(phi), 0.0};
            });
      }
      break;
    }
    case ShapeKind::UniformBox: {
      check(spec.extent > 0.0, "extent must be positive");
      std::mt19937_64 rng(spec.rng_seed);
      for (int i = 0; i < spec.n_points; ++i)
        pts.push_back({spec.extent * uniform01(rng),
                       spec.extent * uniform01(rng),
                       spec.extent * uniform01(rng)});
      break;
    }
    case ShapeKind::ClusteredPairs: {
      check(spec.extent > 0.0, "extent must be positive");
      check(spec.cluster_spread >= 0.0, "cluster spread must be nonnegative");
      std::mt19937_64 rng(spec.rng_seed);
      const int pairs = spec.n_points / 2;
      for (int i = 0; i < pairs; ++i) {
        const Vec3 c{spec.extent * uniform01(rng), spec.extent * uniform01(rng),
                     spec.extent * uniform01(rng)};
        const Vec3 dir = random_unit_vector(rng);
        pts.push_back(c + (0.5 * spec.cluster_spread) * dir);
        pts.push_back(c - (0.5 * spec.cluster_spread) * dir);
      }
      if (spec.n_points % 2 == 1)
        pts.push_back({spec.extent * uniform01(rng),
                       spec.extent * uniform01(rng),
                       spec.extent * uniform01(rng)});
      break;
    }
  }
  return PointSet(std::move(pts));
}

PairwiseStats pairwise_stats(const PointSet& q, double sigma) {
  const double threshold2 = 9.0 * sigma * sigma;  // (3 sigma)^2
  const std::size_t n = q.size();
  PairwiseStats out;
  double diameter2 = 0.0;
  std::uint64_t neighbors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = norm2(q[i] - q[j]);
      if (d2 <= threshold2) neighbors += 2;  // counts for both endpoints
      diameter2 = std::max(diameter2, d2);
    }
  }
  out.mean_neighbors = n > 0 ? static_cast<double>(neighbors) / n : 0.0;
  out.diameter = std::sqrt(diameter2);
  return out;
}

}  // namespace geoshoot
