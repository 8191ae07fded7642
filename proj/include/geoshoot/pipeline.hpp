#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "geoshoot/core.hpp"

namespace geoshoot {

// Operational surface: point-cloud file I/O, Procrustes rigid pre-alignment,
// the command-line driver, and the benchmark harness.

// --- Rigid alignment -----------------------------------------------------------

struct RigidTransform {
  std::array<Vec3, 3> rotation_rows;  // orthonormal, det = +1
  Vec3 translation;

  Vec3 apply(const Vec3& x) const {
    return {dot(rotation_rows[0], x) + translation.x,
            dot(rotation_rows[1], x) + translation.y,
            dot(rotation_rows[2], x) + translation.z};
  }

  static RigidTransform identity() {
    return {{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}, Vec3{}};
  }
};

struct ProcrustesResult {
  RigidTransform transform;
  PointSet aligned;
};

/// Least-squares rigid transform (rotation + translation, no scaling) taking
/// source onto target under index correspondence, with reflection correction.
/// Requires N >= 3 non-collinear points.
ProcrustesResult procrustes_align(const PointSet& source,
                                  const PointSet& target);

// --- File formats ---------------------------------------------------------------

enum class PointFormat {
  XyzText,             // one "x y z" per line, '#' comments, blank lines ignored
  LegacyPolydataAscii, // legacy visualization-toolkit ASCII polydata, points only
};

/// Picks the format from the file extension: ".vtk" reads as legacy polydata,
/// anything else as xyz text.
PointFormat format_for_path(const std::string& path);

PointSet read_points(const std::string& path, PointFormat format);

/// Text output carries 17 significant digits, enough to reproduce every
/// double bit-exactly on read-back. header_comments become leading '#' lines
/// in xyz output (the title line in polydata output).
void write_points(const PointSet& points, const std::string& path,
                  PointFormat format,
                  const std::vector<std::string>& header_comments = {});

// --- CLI -----------------------------------------------------------------------

/// exit 0 = success, 2 = usage/config/input error, 3 = blown-up integration.
int run_cli(int argc, const char* const* argv);

// --- Benchmark harness -----------------------------------------------------------

struct BenchmarkRecord {
  std::string case_name;
  std::string backend;
  int n = 0;
  int timesteps = 0;
  double sigma = 0.0;
  std::string status = "ok";  // "ok" or the failure message
  int iterations = 0;
  double residual_sse = 0.0;
  double tree_build_ms = 0.0;
  double forward_ms = 0.0;
  double backward_ms = 0.0;
  double total_ms = 0.0;
  double mean_direct_per_point = 0.0;
  double mean_approx_per_point = 0.0;
};

/// Runs every case in a JSON spec file (see README for the schema), in order,
/// sequentially and single-threaded by default so the timings stay honest.
/// Per-case failures become rows with a non-"ok" status; the suite continues.
std::vector<BenchmarkRecord> run_benchmark_suite(const std::string& spec_path);

/// Fixed column order:
/// case,backend,n,timesteps,sigma,status,iterations,residual_sse,
/// tree_build_ms,forward_ms,backward_ms,total_ms,
/// mean_direct_per_point,mean_approx_per_point
void write_benchmark_csv(const std::vector<BenchmarkRecord>& records,
                         std::ostream& os);

}  // namespace geoshoot
