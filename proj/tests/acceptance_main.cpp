// Full acceptance suite: one pass/fail line per criterion, nonzero exit if
// anything fails. Timed comparisons run single-threaded.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "geoshoot/bh_kernel.hpp"
#include "geoshoot/optimizer.hpp"
#include "geoshoot/pipeline.hpp"
#include "geoshoot/shooting.hpp"
#include "geoshoot/synthetic.hpp"
#include "test_support.hpp"

using namespace geoshoot;
using namespace geoshoot::testing;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr int kThreads = 1;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& on_fail) {
    if (!ok) {
      pass = false;
      if (!detail.str().empty()) detail << "; ";
      detail << on_fail;
    }
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Exact-backend gradient vs central finite differences of the objective.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  Outcome out;
  const int ns[] = {3, 5, 10};
  const int ts[] = {5, 20};
  const double sigmas[] = {0.5, 2.0};
  double worst = 0.0;
  int instance = 0;
  std::uint64_t seed = 1000;
  while (instance < 20) {
    for (const int n : ns)
      for (const int t : ts)
        for (const double sigma : sigmas) {
          if (instance >= 20) break;
          ++instance;
          ShootingConfig cfg;
          cfg.sigma = sigma;
          cfg.lambda = 1.0;
          cfg.timesteps = t;
          const PointSet q0 = random_points(n, 4.0 * sigma, seed++);
          const MomentumSet p0 = random_momenta(n, 0.05, seed++);
          std::mt19937_64 rng(seed++);
          std::vector<Vec3> tv(q0.begin(), q0.end());
          for (Vec3& v : tv) v += (0.3 * sigma) * random_vec(rng, -1.0, 1.0);
          const PointSet target(tv);

          const Evaluation ev = evaluate(q0, p0, target, cfg, kThreads);
          const double h = 1e-5;
          std::vector<Vec3> pv(p0.begin(), p0.end());
          for (int i = 0; i < n; ++i)
            for (int axis = 0; axis < 3; ++axis) {
              std::vector<Vec3> hi = pv, lo = pv;
              (axis == 0 ? hi[i].x : axis == 1 ? hi[i].y : hi[i].z) += h;
              (axis == 0 ? lo[i].x : axis == 1 ? lo[i].y : lo[i].z) -= h;
              const double fd =
                  (objective(q0, MomentumSet(hi), target, cfg).total -
                   objective(q0, MomentumSet(lo), target, cfg).total) /
                  (2.0 * h);
              const double got = axis == 0   ? ev.gradient[i].x
                                 : axis == 1 ? ev.gradient[i].y
                                             : ev.gradient[i].z;
              worst = std::max(worst, comp_rel_err(got, fd, 1e-6));
            }
        }
  }
  out.require(worst < 1e-5, "worst componentwise rel err " + num(worst));
  out.detail << "20 instances, worst component rel err " << num(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 2. BH backend with infinite threshold reproduces the exact backend.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  Outcome out;
  double worst_obj = 0.0, worst_grad = 0.0;
  std::uint64_t seed = 2000;
  const int sizes[] = {20, 60, 120, 260, 500};
  for (int rep = 0; rep < 4; ++rep) {
    for (const int n : sizes) {
      ShootingConfig exact;
      exact.sigma = 0.5 + 0.375 * rep;
      exact.timesteps = 5;
      ShootingConfig bh = exact;
      bh.backend = Backend::BarnesHut;
      bh.threshold_multiplier = inf;

      const PointSet q0 = random_points(n, 6.0, seed++);
      const MomentumSet p0 = random_momenta(n, 0.05, seed++);
      const PointSet target = random_points(n, 6.0, seed++);

      const Evaluation a = evaluate(q0, p0, target, exact, kThreads);
      const Evaluation b = evaluate(q0, p0, target, bh, kThreads);

      worst_obj = std::max(worst_obj, rel_err(b.report.total, a.report.total));
      double gmax = 0.0, dmax = 0.0;
      for (int i = 0; i < n; ++i) {
        gmax = std::max(gmax, norm(a.gradient[i]));
        dmax = std::max(dmax, norm(b.gradient[i] - a.gradient[i]));
      }
      worst_grad = std::max(worst_grad, dmax / std::max(gmax, 1e-300));
    }
  }
  out.require(worst_obj < 1e-10, "objective rel err " + num(worst_obj));
  out.require(worst_grad < 1e-10, "gradient rel err " + num(worst_grad));
  out.detail << "20 instances, objective " << num(worst_obj) << ", gradient "
             << num(worst_grad);
  return out;
}

// Shared flat-rectangle registration runs (criteria 3 and 4).
struct RegistrationRun {
  double residual = 0.0;
  double wall_ms = 0.0;
  std::string reason;
};

RegistrationRun run_registration(const PointSet& moving, const PointSet& fixed,
                                 Backend backend, double sigma, double lambda,
                                 int timesteps, int max_iter) {
  ShootingConfig cfg;
  cfg.sigma = sigma;
  cfg.lambda = lambda;
  cfg.timesteps = timesteps;
  cfg.backend = backend;
  cfg.optimizer.max_iterations = max_iter;
  const auto t0 = Clock::now();
  auto [p0, trace] = optimize(moving, fixed, cfg, nullptr, kThreads);
  RegistrationRun run;
  run.wall_ms = ms_since(t0);
  run.residual = trace.records.back().attachment / cfg.lambda;
  run.reason = to_string(trace.reason);
  return run;
}

struct FlatCaseResults {
  RegistrationRun exact, bh;
  double worst_velocity_err = 0.0;
};

FlatCaseResults run_flat_case() {
  const int n = 1202;
  const double sigma = 2.0;
  const PointSet flat = generate(ShapeSpec::flat_rectangle(n, 100.0, 4.0));
  const PointSet bent =
      generate(ShapeSpec::bent_rectangle(n, 0.5235987755982988, 100.0, 4.0));

  FlatCaseResults res;

  // Per-point velocity accuracy at the 3 sigma gate, on a smooth nonzero
  // momentum field.
  std::mt19937_64 rng(3100);
  std::vector<Vec3> pv;
  pv.reserve(n);
  for (int i = 0; i < n; ++i)
    pv.push_back(Vec3{0.4, 0.2, 0.1} + 0.05 * random_vec(rng, -1.0, 1.0));
  const MomentumSet p(pv);
  const Octree tree = Octree::build(flat, p);
  const std::vector<Vec3> want = exact_velocity(flat, flat, p, sigma);
  for (int i = 0; i < n; ++i) {
    const BhVelocity got = bh_velocity(tree, flat[i], sigma, 3.0 * sigma);
    res.worst_velocity_err =
        std::max(res.worst_velocity_err,
                 norm(got.velocity - want[i]) / std::max(norm(want[i]), 1e-12));
  }

  const double lambda = 1.0;
  const int timesteps = 40, max_iter = 60;
  res.exact = run_registration(flat, bent, Backend::Exact, sigma, lambda,
                               timesteps, max_iter);
  res.bh = run_registration(flat, bent, Backend::BarnesHut, sigma, lambda,
                            timesteps, max_iter);
  return res;
}

Outcome criterion3(const FlatCaseResults& flat) {
  Outcome out;
  out.require(flat.worst_velocity_err < 2e-2,
              "worst velocity rel err " + num(flat.worst_velocity_err));
  const double gap =
      std::abs(flat.bh.residual - flat.exact.residual) / flat.exact.residual;
  out.require(gap < 0.05, "residual gap " + num(gap));
  out.detail << "velocity err " << num(flat.worst_velocity_err)
             << ", residuals exact " << num(flat.exact.residual) << " vs bh "
             << num(flat.bh.residual) << " (gap " << num(gap) << ")";
  return out;
}

Outcome criterion4(const FlatCaseResults& flat) {
  Outcome out;
  out.require(flat.bh.wall_ms < flat.exact.wall_ms,
              "bh " + num(flat.bh.wall_ms) + " ms vs exact " +
                  num(flat.exact.wall_ms) + " ms");
  out.detail << "flat shape: bh " << num(flat.bh.wall_ms / 1000.0)
             << " s < exact " << num(flat.exact.wall_ms / 1000.0) << " s ("
             << num(flat.exact.wall_ms / flat.bh.wall_ms) << "x)";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Concentrated regime: BH is slower on the circles case.
// ---------------------------------------------------------------------------
Outcome criterion5() {
  Outcome out;
  const int n = 1200;
  const PointSet moving = generate(ShapeSpec::circle(n, 1.0));
  const PointSet fixed = generate(ShapeSpec::circle(n, 2.0));
  const RegistrationRun exact =
      run_registration(moving, fixed, Backend::Exact, 2.0, 1.0, 40, 15);
  const RegistrationRun bh =
      run_registration(moving, fixed, Backend::BarnesHut, 2.0, 1.0, 40, 15);
  out.require(bh.wall_ms > exact.wall_ms,
              "bh " + num(bh.wall_ms) + " ms vs exact " + num(exact.wall_ms) +
                  " ms");
  out.detail << "circles: bh " << num(bh.wall_ms / 1000.0) << " s > exact "
             << num(exact.wall_ms / 1000.0) << " s ("
             << num(bh.wall_ms / exact.wall_ms) << "x)";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Scaling on the flat shape: exact grows ~4x per doubling, BH less.
// Timed on a fixed workload (one objective+gradient evaluation at p0 = 0)
// so iteration-count differences cannot contaminate the ratio.
// ---------------------------------------------------------------------------
Outcome criterion6() {
  Outcome out;
  const double sigma = 2.0;

  const auto eval_time = [&](int n, Backend backend) {
    const PointSet flat = generate(ShapeSpec::flat_rectangle(n, 100.0, 4.0));
    const PointSet bent =
        generate(ShapeSpec::bent_rectangle(n, 0.5235987755982988, 100.0, 4.0));
    ShootingConfig cfg;
    cfg.sigma = sigma;
    cfg.timesteps = 40;
    cfg.backend = backend;
    const MomentumSet p0 = MomentumSet::zeros(flat.size());
    double best = inf;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      (void)evaluate(flat, p0, bent, cfg, kThreads);
      best = std::min(best, ms_since(t0));
    }
    return best;
  };

  const double exact_1x = eval_time(1275, Backend::Exact);
  const double exact_2x = eval_time(2550, Backend::Exact);
  const double bh_1x = eval_time(1275, Backend::BarnesHut);
  const double bh_2x = eval_time(2550, Backend::BarnesHut);

  const double exact_ratio = exact_2x / exact_1x;
  const double bh_ratio = bh_2x / bh_1x;
  out.require(exact_ratio >= 3.6 && exact_ratio <= 4.4,
              "exact ratio " + num(exact_ratio) + " outside [3.6, 4.4]");
  out.require(bh_ratio < exact_ratio,
              "bh ratio " + num(bh_ratio) + " not below exact ratio " +
                  num(exact_ratio));
  out.detail << "1275 -> 2550 points: exact x" << num(exact_ratio) << ", bh x"
             << num(bh_ratio);
  return out;
}

// ---------------------------------------------------------------------------
// 7. Energy conservation order on the two-point head-on case.
// ---------------------------------------------------------------------------
Outcome criterion7() {
  Outcome out;
  const PointSet q({{-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
  const MomentumSet p({{0.3, 0.0, 0.0}, {-0.3, 0.0, 0.0}});
  const double sigma = 1.0;
  const double h0 = hamiltonian(q, p, sigma);

  std::vector<double> drifts;
  for (const int t : {25, 50, 100, 200}) {
    ShootingConfig cfg;
    cfg.sigma = sigma;
    cfg.timesteps = t;
    const GeodesicTrajectory traj = shoot_forward(q, p, cfg);
    double worst = 0.0;
    for (const auto& s : traj.states)
      worst = std::max(worst, std::abs(hamiltonian(s.q, s.p, sigma) - h0));
    drifts.push_back(worst / h0);
  }
  for (std::size_t k = 1; k < drifts.size(); ++k)
    out.require(drifts[k] <= 0.65 * drifts[k - 1],
                "drift ratio " + num(drifts[k - 1] / drifts[k]) +
                    " below first order at T doubling " + std::to_string(k));
  out.require(drifts.back() < 1e-2, "drift at T=200 is " + num(drifts.back()));
  out.detail << "drifts";
  for (const double d : drifts) out.detail << ' ' << num(d);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Octree invariants on 50 random point sets.
// ---------------------------------------------------------------------------
bool verify_tree(const Octree& tree, const PointSet& q, const MomentumSet& p,
                 std::string& why) {
  std::vector<std::size_t> all_leaf_points;
  for (std::size_t k = 0; k < tree.node_count(); ++k) {
    const Octree::Node& nd = tree.node(k);
    const std::vector<std::size_t> members = tree_members(tree, k);
    if (members.empty() || nd.count != members.size()) {
      why = "count mismatch at node " + std::to_string(k);
      return false;
    }
    Vec3 pos{}, mom{}, lo = q[members[0]], hi = q[members[0]];
    for (const std::size_t i : members) {
      pos += q[i];
      mom += p[i];
      lo = cwise_min(lo, q[i]);
      hi = cwise_max(hi, q[i]);
    }
    if (!(nd.position_sum == pos) || !(nd.momentum_sum == mom)) {
      why = "statistic mismatch at node " + std::to_string(k);
      return false;
    }
    if (!(nd.actual_min == lo) || !(nd.actual_max == hi)) {
      why = "actual bounds mismatch at node " + std::to_string(k);
      return false;
    }
    if (nd.leaf) {
      // single point, or a coincident bucket at the depth cap
      bool coincident = true;
      for (const std::size_t i : members)
        if (!(q[i] == q[members[0]])) coincident = false;
      if (members.size() != 1 && !coincident) {
        why = "multi-point leaf with distinct points at node " +
              std::to_string(k);
        return false;
      }
      for (const std::size_t i : members) all_leaf_points.push_back(i);
    }
    // min_distance soundness at a few probes
    std::mt19937_64 rng(k + 99);
    for (int t = 0; t < 3; ++t) {
      const Vec3 x = random_vec(rng, -2.0, 12.0);
      double nearest = inf;
      for (const std::size_t i : members) nearest = std::min(nearest, norm(x - q[i]));
      if (Octree::min_distance(nd, x) > nearest + 1e-12) {
        why = "min_distance overestimates at node " + std::to_string(k);
        return false;
      }
    }
  }
  std::sort(all_leaf_points.begin(), all_leaf_points.end());
  if (all_leaf_points.size() != q.size()) {
    why = "leaves do not partition the index set";
    return false;
  }
  for (std::size_t i = 0; i < q.size(); ++i)
    if (all_leaf_points[i] != i) {
      why = "leaves do not partition the index set";
      return false;
    }
  return true;
}

Outcome criterion8() {
  Outcome out;
  std::uint64_t seed = 8000;
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>((rep * 97) % 1000);
    const PointSet q = rep % 3 == 0
                           ? generate(ShapeSpec::clustered_pairs(
                                 std::max(n, 2), 10.0, 0.02, seed++))
                           : random_points(n, 10.0, seed++);
    const MomentumSet p = random_momenta(q.size(), 1.0, seed++);
    const Octree tree = Octree::build(q, p);
    std::string why;
    if (!verify_tree(tree, q, p, why)) {
      out.require(false, "set " + std::to_string(rep) + ": " + why);
      break;
    }
    ++checked;
  }
  out.detail << checked << " point sets verified";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Diffeomorphism smoke test: positive Jacobians on a warped planar grid.
// ---------------------------------------------------------------------------
Outcome criterion9() {
  Outcome out;
  const int n = 300;
  const PointSet moving = generate(ShapeSpec::circle(n, 1.0));
  const PointSet fixed = generate(ShapeSpec::circle(n, 2.0));
  ShootingConfig cfg;
  cfg.sigma = 2.0;
  cfg.lambda = 20.0;
  cfg.timesteps = 40;
  cfg.optimizer.max_iterations = 60;
  auto [p0, trace] = optimize(moving, fixed, cfg, nullptr, kThreads);
  const double res_sse = trace.records.back().attachment / cfg.lambda;
  out.require(res_sse < 0.1 * static_cast<double>(n),
              "registration did not converge (sse " + num(res_sse) + ")");

  const GeodesicTrajectory traj = shoot_forward(moving, p0, cfg);

  const int grid = 20;
  const double lo = -3.0, hi = 3.0;
  const double step = (hi - lo) / (grid - 1);
  std::vector<Vec3> nodes;
  nodes.reserve(grid * grid);
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix)
      nodes.push_back({lo + ix * step, lo + iy * step, 0.0});
  const PointSet warped = warp_points(traj, PointSet(nodes), cfg);

  double min_det = inf;
  for (int iy = 1; iy + 1 < grid; ++iy)
    for (int ix = 1; ix + 1 < grid; ++ix) {
      const auto at = [&](int gx, int gy) { return warped[gy * grid + gx]; };
      const Vec3 dx = (1.0 / (2.0 * step)) * (at(ix + 1, iy) - at(ix - 1, iy));
      const Vec3 dy = (1.0 / (2.0 * step)) * (at(ix, iy + 1) - at(ix, iy - 1));
      const double det = dx.x * dy.y - dx.y * dy.x;
      min_det = std::min(min_det, det);
    }
  out.require(min_det > 0.0, "minimum grid Jacobian " + num(min_det));
  out.detail << "registration sse " << num(res_sse) << ", min grid Jacobian "
             << num(min_det);
  return out;
}

// ---------------------------------------------------------------------------
// 10. Procrustes recovery of known rigid transforms.
// ---------------------------------------------------------------------------
Outcome criterion10() {
  Outcome out;
  std::mt19937_64 rng(10000);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    // uniform random rotation from a normalized quaternion
    double w, x, y, z, nrm;
    do {
      w = uniform(rng, -1, 1);
      x = uniform(rng, -1, 1);
      y = uniform(rng, -1, 1);
      z = uniform(rng, -1, 1);
      nrm = std::sqrt(w * w + x * x + y * y + z * z);
    } while (nrm < 1e-3 || nrm > 1.0);
    w /= nrm; x /= nrm; y /= nrm; z /= nrm;
    RigidTransform truth;
    truth.rotation_rows[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),
                              2 * (x * z + w * y)};
    truth.rotation_rows[1] = {2 * (x * y + w * z), 1 - 2 * (x * x + z * z),
                              2 * (y * z - w * x)};
    truth.rotation_rows[2] = {2 * (x * z - w * y), 2 * (y * z + w * x),
                              1 - 2 * (x * x + y * y)};
    truth.translation = random_vec(rng, -5.0, 5.0);

    const PointSet source = random_points(50, 4.0, 10100 + rep);
    std::vector<Vec3> moved;
    for (const Vec3& s : source) moved.push_back(truth.apply(s));
    const ProcrustesResult res = procrustes_align(source, PointSet(moved));
    for (int i = 0; i < 3; ++i)
      worst = std::max(
          worst, norm(res.transform.rotation_rows[i] - truth.rotation_rows[i]));
    worst = std::max(worst,
                     norm(res.transform.translation - truth.translation));
  }
  out.require(worst < 1e-10, "worst recovery error " + num(worst));
  out.detail << "20 transforms, worst entry error " << num(worst);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    Outcome outcome;
  };
  std::vector<Criterion> results;

  const FlatCaseResults flat = run_flat_case();

  results.push_back({1, "exact-backend gradient matches finite differences",
                     criterion1()});
  results.push_back({2, "BH at infinite threshold equals the exact backend",
                     criterion2()});
  results.push_back({3, "BH accuracy at 3 sigma on the flat shape",
                     criterion3(flat)});
  results.push_back({4, "BH faster than exact on the flat shape",
                     criterion4(flat)});
  results.push_back({5, "BH slower than exact on the circles case",
                     criterion5()});
  results.push_back({6, "quadratic exact scaling, sub-quadratic BH scaling",
                     criterion6()});
  results.push_back({7, "first-order Hamiltonian drift on the head-on case",
                     criterion7()});
  results.push_back({8, "octree invariant suite", criterion8()});
  results.push_back({9, "positive Jacobians on a warped grid", criterion9()});
  results.push_back({10, "Procrustes recovers known rigid transforms",
                      criterion10()});

  int failures = 0;
  for (const Criterion& c : results) {
    const bool pass = c.outcome.pass;
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.label, c.outcome.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}
