#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "geoshoot/optimizer.hpp"
#include "geoshoot/pipeline.hpp"
#include "geoshoot/synthetic.hpp"

namespace geoshoot {

namespace {

using nlohmann::json;

ShapeKind shape_kind_from(const std::string& name) {
  if (name == "circle") return ShapeKind::Circle;
  if (name == "two_circles") return ShapeKind::TwoCircles;
  if (name == "flat_rectangle") return ShapeKind::FlatRectangle;
  if (name == "bent_rectangle") return ShapeKind::BentRectangle;
  if (name == "uniform_box") return ShapeKind::UniformBox;
  if (name == "clustered_pairs") return ShapeKind::ClusteredPairs;
  throw InvalidSpec("unknown shape kind '" + name + "'");
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw InvalidSpec("expected [x, y, z] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ShapeSpec shape_from(const json& j) {
  ShapeSpec s;
  s.kind = shape_kind_from(j.at("kind").get<std::string>());
  s.n_points = j.at("n").get<int>();
  if (j.contains("radius")) s.radius = j["radius"].get<double>();
  if (j.contains("radius2")) s.radius2 = j["radius2"].get<double>();
  if (j.contains("center")) s.center = vec3_from(j["center"]);
  if (j.contains("center_offset")) s.center_offset = vec3_from(j["center_offset"]);
  if (j.contains("length")) s.length = j["length"].get<double>();
  if (j.contains("width")) s.width = j["width"].get<double>();
  if (j.contains("bend_angle")) s.bend_angle = j["bend_angle"].get<double>();
  if (j.contains("extent")) s.extent = j["extent"].get<double>();
  if (j.contains("cluster_spread"))
    s.cluster_spread = j["cluster_spread"].get<double>();
  if (j.contains("seed")) s.rng_seed = j["seed"].get<std::uint64_t>();
  return s;
}

std::string sanitize_csv(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

BenchmarkRecord run_case(const json& j) {
  BenchmarkRecord rec;
  rec.case_name = j.at("name").get<std::string>();

  ShootingConfig cfg;
  cfg.sigma = j.value("sigma", 2.0);
  cfg.lambda = j.value("lambda", 1.0);
  cfg.timesteps = j.value("timesteps", 40);
  cfg.threshold_multiplier = j.value("threshold_mult", 3.0);
  const std::string backend = j.value("backend", std::string("exact"));
  if (backend == "exact") {
    cfg.backend = Backend::Exact;
  } else if (backend == "bh") {
    cfg.backend = Backend::BarnesHut;
  } else {
    throw InvalidSpec("backend must be 'exact' or 'bh'");
  }
  cfg.optimizer.max_iterations = j.value("max_iter", 40);
  const int threads = j.value("threads", 1);  // honest timings by default

  rec.backend = backend;
  rec.timesteps = cfg.timesteps;
  rec.sigma = cfg.sigma;

  const PointSet moving = generate(shape_from(j.at("moving")));
  const PointSet fixed = generate(shape_from(j.at("fixed")));
  rec.n = static_cast<int>(moving.size());

  EvalStats stats;
  const auto t0 = std::chrono::steady_clock::now();
  auto [p0, trace] = optimize(moving, fixed, cfg, &stats, threads);
  rec.total_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();

  rec.iterations = trace.records.back().iteration;
  rec.residual_sse = trace.records.back().attachment / cfg.lambda;
  rec.tree_build_ms = stats.tree_build_ms;
  rec.forward_ms = stats.forward_ms;
  rec.backward_ms = stats.backward_ms;
  if (stats.traversal_queries > 0) {
    rec.mean_direct_per_point =
        static_cast<double>(stats.traversal.direct_interactions) /
        static_cast<double>(stats.traversal_queries);
    rec.mean_approx_per_point =
        static_cast<double>(stats.traversal.approximated_interactions) /
        static_cast<double>(stats.traversal_queries);
  }
  return rec;
}

}  // namespace

std::vector<BenchmarkRecord> run_benchmark_suite(const std::string& spec_path) {
  std::ifstream in(spec_path);
  if (!in)
    throw std::runtime_error("cannot open benchmark spec '" + spec_path + "'");
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw InvalidSpec("bad benchmark spec: " + std::string(e.what()));
  }
  if (!spec.contains("cases") || !spec["cases"].is_array())
    throw InvalidSpec("benchmark spec must contain a 'cases' array");

  std::vector<BenchmarkRecord> records;
  for (const json& j : spec["cases"]) {
    try {
      records.push_back(run_case(j));
    } catch (const std::exception& e) {
      BenchmarkRecord rec;
      rec.case_name = j.is_object() && j.contains("name")
                          ? j["name"].get<std::string>()
                          : "<unnamed>";
      rec.status = sanitize_csv(e.what());
      records.push_back(rec);
    }
  }
  return records;
}

void write_benchmark_csv(const std::vector<BenchmarkRecord>& records,
                         std::ostream& os) {
  os << "case,backend,n,timesteps,sigma,status,iterations,residual_sse,"
        "tree_build_ms,forward_ms,backward_ms,total_ms,"
        "mean_direct_per_point,mean_approx_per_point\n";
  char buf[512];
  for (const BenchmarkRecord& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%s,%s,%d,%d,%.17g,%s,%d,%.17g,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                  sanitize_csv(r.case_name).c_str(), r.backend.c_str(), r.n,
                  r.timesteps, r.sigma, sanitize_csv(r.status).c_str(),
                  r.iterations, r.residual_sse, r.tree_build_ms, r.forward_ms,
                  r.backward_ms, r.total_ms, r.mean_direct_per_point,
                  r.mean_approx_per_point);
    os << buf;
  }
}

}  // namespace geoshoot
