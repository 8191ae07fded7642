#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "geoshoot/optimizer.hpp"
#include "geoshoot/pipeline.hpp"
#include "geoshoot/shooting.hpp"
#include "geoshoot/synthetic.hpp"

namespace geoshoot {

namespace {

struct RegisterArgs {
  std::string moving, fixed, out_prefix, warp_path;
  double sigma = 2.0;
  double lambda = 1.0;
  int timesteps = 40;
  std::string backend = "exact";
  double threshold_mult = 3.0;
  int max_iter = 200;
  bool procrustes = false;
  bool trace = false;
};

struct SynthArgs {
  std::string kind = "circle";
  int n = 100;
  std::string out;
  double radius = 1.0;
  double radius2 = 2.0;
  double length = 100.0;
  double width = 4.0;
  double bend_angle = 0.0;
  double extent = 10.0;
  double spread = 0.05;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string spec;
  std::string out;  // empty = stdout
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_register(const RegisterArgs& a) {
  const PointSet moving = read_points(a.moving, format_for_path(a.moving));
  const PointSet fixed = read_points(a.fixed, format_for_path(a.fixed));
  require_aligned(moving.size(), fixed.size(), "register");

  ShootingConfig cfg;
  cfg.sigma = a.sigma;
  cfg.lambda = a.lambda;
  cfg.timesteps = a.timesteps;
  cfg.backend = a.backend == "bh" ? Backend::BarnesHut : Backend::Exact;
  cfg.threshold_multiplier = a.threshold_mult;
  cfg.optimizer.max_iterations = a.max_iter;
  validate_config(cfg);

  PointSet q0 = moving;
  if (a.procrustes) {
    ProcrustesResult pr = procrustes_align(moving, fixed);
    q0 = pr.aligned;
    write_points(q0, a.out_prefix + "_aligned.xyz", PointFormat::XyzText,
                 {"rigid pre-alignment of " + a.moving});
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto [p0, trace] = optimize(q0, fixed, cfg);
  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  const GeodesicTrajectory trajectory = shoot_forward(q0, p0, cfg);

  write_points(PointSet(p0.data()), a.out_prefix + "_p0.xyz",
               PointFormat::XyzText,
               {"initial momenta", "sigma=" + fmt(cfg.sigma) +
                                       " lambda=" + fmt(cfg.lambda) +
                                       " timesteps=" + std::to_string(cfg.timesteps) +
                                       " backend=" + a.backend});
  write_points(trajectory.final_state().q, a.out_prefix + "_warped.xyz",
               PointFormat::XyzText);

  if (a.trace) {
    std::ofstream os(a.out_prefix + "_trace.csv");
    if (!os)
      throw std::runtime_error("cannot write '" + a.out_prefix + "_trace.csv'");
    trace.write_csv(os);
  }

  if (!a.warp_path.empty()) {
    const PointSet extra = read_points(a.warp_path, format_for_path(a.warp_path));
    const PointSet warped = warp_points(trajectory, extra, cfg);
    write_points(warped, a.out_prefix + "_warped_extra.xyz",
                 PointFormat::XyzText);
  }

  const auto& last = trace.records.back();
  char line[160];
  std::snprintf(line, sizeof line, "residual=%.17g time_ms=%.3f iters=%d\n",
                last.attachment / cfg.lambda, wall_ms, last.iteration);
  std::cout << line;
  return 0;
}

int run_synth(const SynthArgs& a) {
  ShapeSpec spec;
  if (a.kind == "circle") spec.kind = ShapeKind::Circle;
  else if (a.kind == "two_circles") spec.kind = ShapeKind::TwoCircles;
  else if (a.kind == "flat_rectangle") spec.kind = ShapeKind::FlatRectangle;
  else if (a.kind == "bent_rectangle") spec.kind = ShapeKind::BentRectangle;
  else if (a.kind == "uniform_box") spec.kind = ShapeKind::UniformBox;
  else if (a.kind == "clustered_pairs") spec.kind = ShapeKind::ClusteredPairs;
  else throw InvalidSpec("unknown shape kind '" + a.kind + "'");
  spec.n_points = a.n;
  spec.radius = a.radius;
  spec.radius2 = a.radius2;
  spec.length = a.length;
  spec.width = a.width;
  spec.bend_angle = a.bend_angle;
  spec.extent = a.extent;
  spec.cluster_spread = a.spread;
  spec.rng_seed = a.seed;

  const PointSet points = generate(spec);
  write_points(points, a.out, format_for_path(a.out));
  std::cout << "wrote " << points.size() << " points to " << a.out << '\n';
  return 0;
}

int run_bench(const BenchArgs& a) {
  const std::vector<BenchmarkRecord> records = run_benchmark_suite(a.spec);
  if (a.out.empty()) {
    write_benchmark_csv(records, std::cout);
  } else {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot write '" + a.out + "'");
    write_benchmark_csv(records, os);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Diffeomorphic point-set registration by geodesic shooting"};
  app.require_subcommand(1);

  RegisterArgs reg;
  CLI::App* reg_cmd = app.add_subcommand(
      "register", "Register a moving point set onto a fixed one");
  reg_cmd->add_option("--moving", reg.moving, "moving (template) point file")
      ->required();
  reg_cmd->add_option("--fixed", reg.fixed, "fixed (target) point file")
      ->required();
  reg_cmd->add_option("--sigma", reg.sigma, "Gaussian kernel width (mm)");
  reg_cmd->add_option("--lambda", reg.lambda, "data-attachment weight");
  reg_cmd->add_option("--timesteps", reg.timesteps, "Euler steps over [0,1]");
  reg_cmd->add_option("--backend", reg.backend, "kernel backend")
      ->check(CLI::IsMember({"exact", "bh"}));
  reg_cmd->add_option("--threshold-mult", reg.threshold_mult,
                      "opening threshold in units of sigma");
  reg_cmd->add_option("--max-iter", reg.max_iter, "optimizer iteration cap");
  reg_cmd->add_option("--out-prefix", reg.out_prefix, "output path prefix")
      ->required();
  reg_cmd->add_flag("--procrustes", reg.procrustes,
                    "rigid pre-alignment before shooting");
  reg_cmd->add_option("--warp", reg.warp_path,
                      "extra points to warp through the result");
  reg_cmd->add_flag("--trace", reg.trace, "write per-iteration trace CSV");

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic point set");
  synth_cmd
      ->add_option("--kind", synth.kind,
                   "circle|two_circles|flat_rectangle|bent_rectangle|"
                   "uniform_box|clustered_pairs")
      ->required();
  synth_cmd->add_option("--n", synth.n, "number of points")->required();
  synth_cmd->add_option("--out", synth.out, "output file (.xyz or .vtk)")
      ->required();
  synth_cmd->add_option("--radius", synth.radius, "circle radius");
  synth_cmd->add_option("--radius2", synth.radius2, "second circle radius");
  synth_cmd->add_option("--length", synth.length, "rectangle length");
  synth_cmd->add_option("--width", synth.width, "rectangle width");
  synth_cmd->add_option("--bend-angle", synth.bend_angle,
                        "arc bend angle (radians)");
  synth_cmd->add_option("--extent", synth.extent, "random box edge length");
  synth_cmd->add_option("--spread", synth.spread, "pair separation");
  synth_cmd->add_option("--seed", synth.seed, "rng seed");

  BenchArgs bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Run a benchmark suite from a JSON spec");
  bench_cmd->add_option("--spec", bench.spec, "JSON case list")->required();
  bench_cmd->add_option("--out", bench.out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (reg_cmd->parsed()) return run_register(reg);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (bench_cmd->parsed()) return run_bench(bench);
  } catch (const NonFiniteState& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NonFiniteObjectiveAtStart& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace geoshoot
