#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace geoshoot {

// ---------------------------------------------------------------------------
// Small 3-D vector used for positions, momenta and adjoints alike.
// ---------------------------------------------------------------------------

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z; return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z; return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s; y *= s; z *= s; return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

  friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr double norm2(const Vec3& a) { return dot(a, a); }

inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

constexpr Vec3 cwise_min(const Vec3& a, const Vec3& b) {
  return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}

constexpr Vec3 cwise_max(const Vec3& a, const Vec3& b) {
  return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct OutOfBounds : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyTree : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised when an integration step produces NaN/Inf; carries the timestep
/// at which the state first became non-finite.
struct NonFiniteState : std::runtime_error {
  int timestep;
  explicit NonFiniteState(int step)
      : std::runtime_error("non-finite state at timestep " +
                           std::to_string(step)),
        timestep(step) {}
};

struct ConfigMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_, const std::string& what_)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what_),
        line(line_) {}
};

struct UnsupportedFormat : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSpec : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NonFiniteObjectiveAtStart : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Point and momentum sets
// ---------------------------------------------------------------------------

/// Ordered list of N 3-D positions (mm). Points are identified by index;
/// index i keeps its identity across every operation in the library.
class PointSet {
 public:
  explicit PointSet(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty())
      throw std::invalid_argument("PointSet: must contain at least one point");
    for (const Vec3& p : points_)
      if (!is_finite(p))
        throw std::invalid_argument("PointSet: non-finite coordinate");
  }

  std::size_t size() const { return points_.size(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Vec3>& data() const { return points_; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<Vec3> points_;
};

/// Ordered list of N 3-D momentum vectors, index-aligned with a PointSet.
class MomentumSet {
 public:
  explicit MomentumSet(std::vector<Vec3> momenta) : momenta_(std::move(momenta)) {
    if (momenta_.empty())
      throw std::invalid_argument("MomentumSet: must contain at least one vector");
    for (const Vec3& p : momenta_)
      if (!is_finite(p))
        throw std::invalid_argument("MomentumSet: non-finite entry");
  }

  /// N zero momenta -- the identity transform.
  static MomentumSet zeros(std::size_t n) {
    return MomentumSet(std::vector<Vec3>(n, Vec3{}));
  }

  std::size_t size() const { return momenta_.size(); }
  const Vec3& operator[](std::size_t i) const { return momenta_[i]; }
  const std::vector<Vec3>& data() const { return momenta_; }

  auto begin() const { return momenta_.begin(); }
  auto end() const { return momenta_.end(); }

 private:
  std::vector<Vec3> momenta_;
};

inline void require_aligned(std::size_t n_points, std::size_t n_momenta,
                            const char* where) {
  if (n_points != n_momenta)
    throw DimensionMismatch(std::string(where) + ": point/momentum counts differ (" +
                            std::to_string(n_points) + " vs " +
                            std::to_string(n_momenta) + ")");
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class Backend { Exact, BarnesHut };

inline const char* to_string(Backend b) {
  return b == Backend::Exact ? "exact" : "bh";
}

struct LineSearchConfig {
  double sufficient_decrease = 1e-4;  // Wolfe c1
  double curvature = 0.9;            // Wolfe c2 (strong)
  int max_trials = 20;
};

struct OptimizerConfig {
  int max_iterations = 200;
  int memory = 10;                       // history pairs for the quasi-Newton update
  double gradient_tolerance = 1e-6;      // stop when grad inf-norm falls below
  double relative_objective_tolerance = 1e-9;
  LineSearchConfig line_search;
};

struct ShootingConfig {
  double sigma = 2.0;        // Gaussian kernel width (mm)
  double lambda = 1.0;       // data-attachment weight
  int timesteps = 40;        // uniform steps over t in [0,1]
  Backend backend = Backend::Exact;
  double threshold_multiplier = 3.0;  // opening threshold = multiplier * sigma
  OptimizerConfig optimizer;

  double opening_threshold() const { return threshold_multiplier * sigma; }
};

enum class ConfigViolation {
  NonPositiveSigma,
  NonPositiveLambda,
  ZeroTimesteps,
  NonPositiveThreshold,
};

inline const char* to_string(ConfigViolation v) {
  switch (v) {
    case ConfigViolation::NonPositiveSigma: return "NonPositiveSigma";
    case ConfigViolation::NonPositiveLambda: return "NonPositiveLambda";
    case ConfigViolation::ZeroTimesteps: return "ZeroTimesteps";
    case ConfigViolation::NonPositiveThreshold: return "NonPositiveThreshold";
  }
  return "?";
}

/// Carries every violated bound, not just the first.
struct ConfigError : std::invalid_argument {
  std::vector<ConfigViolation> violations;
  explicit ConfigError(std::vector<ConfigViolation> v)
      : std::invalid_argument(describe(v)), violations(std::move(v)) {}

 private:
  static std::string describe(const std::vector<ConfigViolation>& v) {
    std::string s = "invalid shooting config:";
    for (ConfigViolation c : v) {
      s += ' ';
      s += to_string(c);
    }
    return s;
  }
};

/// A ShootingConfig whose bounds have been checked.
struct ValidatedConfig {
  ShootingConfig config;
};

/// Checks every bound and reports all violations at once.
ValidatedConfig validate_config(const ShootingConfig& config);

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Per-timestep snapshots of (q, p) at t_k = k/T, k = 0..T.
struct GeodesicTrajectory {
  struct State {
    PointSet q;
    MomentumSet p;
  };

  std::vector<State> states;

  std::size_t timesteps() const { return states.size() - 1; }
  std::size_t point_count() const { return states.front().q.size(); }
  const State& initial() const { return states.front(); }
  const State& final_state() const { return states.back(); }
};

}  // namespace geoshoot
