#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "geoshoot/pipeline.hpp"
#include "geoshoot/synthetic.hpp"

using namespace geoshoot;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    const auto tick =
        std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() / ("geoshoot_cli_" + std::to_string(tick));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

// argv adapter plus stdout capture (the CLI prints its summary line there).
struct CliResult {
  int code;
  std::string out;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "geoshoot");
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());

  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  const int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("synth writes the requested shape") {
  TempDir tmp;
  const CliResult r = cli({"synth", "--kind", "circle", "--n", "16", "--radius",
                           "2.5", "--out", tmp.file("c.xyz")});
  CHECK(r.code == 0);
  const PointSet q = read_points(tmp.file("c.xyz"), PointFormat::XyzText);
  CHECK(q.size() == 16);
  for (const Vec3& v : q)
    CHECK(norm(v) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("registering a set onto itself is a no-op with zero residual") {
  TempDir tmp;
  write_points(generate(ShapeSpec::circle(12, 1.0)), tmp.file("same.xyz"),
               PointFormat::XyzText);
  const CliResult r = cli({"register", "--moving", tmp.file("same.xyz"),
                           "--fixed", tmp.file("same.xyz"), "--out-prefix",
                           tmp.file("run")});
  CHECK(r.code == 0);
  CHECK(r.out.find("residual=0 ") != std::string::npos);
  CHECK(r.out.find("iters=0") != std::string::npos);
  CHECK(fs::exists(tmp.file("run_p0.xyz")));
  CHECK(fs::exists(tmp.file("run_warped.xyz")));

  // warped output equals the input exactly (zero momentum flow)
  const PointSet warped =
      read_points(tmp.file("run_warped.xyz"), PointFormat::XyzText);
  const PointSet original =
      read_points(tmp.file("same.xyz"), PointFormat::XyzText);
  for (std::size_t i = 0; i < warped.size(); ++i)
    CHECK(warped[i] == original[i]);
}

TEST_CASE("malformed flags exit with code 2") {
  CHECK(cli({"register", "--not-a-flag"}).code == 2);
  CHECK(cli({"register"}).code == 2);          // missing required options
  CHECK(cli({"frobnicate"}).code == 2);        // unknown subcommand
  CHECK(cli({}).code == 2);                    // missing subcommand
  TempDir tmp;
  write_points(generate(ShapeSpec::circle(6, 1.0)), tmp.file("a.xyz"),
               PointFormat::XyzText);
  CHECK(cli({"register", "--moving", tmp.file("a.xyz"), "--fixed",
             tmp.file("a.xyz"), "--out-prefix", tmp.file("x"), "--backend",
             "banana"})
            .code == 2);
  // config bound violations are input errors too
  CHECK(cli({"register", "--moving", tmp.file("a.xyz"), "--fixed",
             tmp.file("a.xyz"), "--out-prefix", tmp.file("x"), "--sigma",
             "-1"})
            .code == 2);
}

TEST_CASE("small registration end to end, both backends") {
  TempDir tmp;
  write_points(generate(ShapeSpec::circle(20, 1.0)), tmp.file("moving.xyz"),
               PointFormat::XyzText);
  write_points(generate(ShapeSpec::circle(20, 1.15)), tmp.file("fixed.xyz"),
               PointFormat::XyzText);
  // a little grid to warp along
  std::vector<Vec3> grid;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      grid.push_back({-1.0 + i, -1.0 + j, 0.0});
  write_points(PointSet(grid), tmp.file("grid.xyz"), PointFormat::XyzText);

  for (const std::string backend : {"exact", "bh"}) {
    const std::string prefix = tmp.file("run_" + backend);
    const CliResult r =
        cli({"register", "--moving", tmp.file("moving.xyz"), "--fixed",
             tmp.file("fixed.xyz"), "--sigma", "1.0", "--lambda", "4",
             "--timesteps", "10", "--backend", backend, "--max-iter", "25",
             "--out-prefix", prefix, "--trace", "--warp", tmp.file("grid.xyz")});
    CHECK(r.code == 0);
    CHECK(r.out.find("residual=") != std::string::npos);
    CHECK(fs::exists(prefix + "_p0.xyz"));
    CHECK(fs::exists(prefix + "_warped.xyz"));
    CHECK(fs::exists(prefix + "_warped_extra.xyz"));
    const std::string trace = slurp(prefix + "_trace.csv");
    CHECK(trace.rfind("iter,total,energy,attachment,grad_inf,wall_ms", 0) == 0);

    // momenta header records the replay parameters
    const std::string p0 = slurp(prefix + "_p0.xyz");
    CHECK(p0.find("sigma=1") != std::string::npos);
    CHECK(p0.find("timesteps=10") != std::string::npos);
  }
}

TEST_CASE("procrustes flag pre-aligns and writes the aligned set") {
  TempDir tmp;
  const PointSet fixed = generate(ShapeSpec::circle(24, 1.0));
  std::vector<Vec3> rotated;
  for (const Vec3& v : fixed)  // rotate 90 degrees about z and shift
    rotated.push_back({-v.y + 3.0, v.x - 1.0, v.z});
  write_points(PointSet(rotated), tmp.file("moving.xyz"), PointFormat::XyzText);
  write_points(fixed, tmp.file("fixed.xyz"), PointFormat::XyzText);

  const CliResult r = cli({"register", "--moving", tmp.file("moving.xyz"),
                           "--fixed", tmp.file("fixed.xyz"), "--procrustes",
                           "--max-iter", "5", "--out-prefix", tmp.file("pa")});
  CHECK(r.code == 0);
  REQUIRE(fs::exists(tmp.file("pa_aligned.xyz")));
  const PointSet aligned =
      read_points(tmp.file("pa_aligned.xyz"), PointFormat::XyzText);
  double sse = 0.0;
  for (std::size_t i = 0; i < aligned.size(); ++i)
    sse += norm2(aligned[i] - fixed[i]);
  CHECK(sse < 1e-18);  // pure rigid offset, recovered exactly
}

TEST_CASE("bench subcommand produces the documented CSV schema") {
  TempDir tmp;
  {
    std::ofstream os(tmp.file("suite.json"));
    os << R"({"cases": [
      {"name": "tiny_exact", "backend": "exact", "sigma": 1.0, "lambda": 4.0,
       "timesteps": 6, "max_iter": 4,
       "moving": {"kind": "circle", "n": 12, "radius": 1.0},
       "fixed": {"kind": "circle", "n": 12, "radius": 1.1}},
      {"name": "tiny_bh", "backend": "bh", "sigma": 1.0, "lambda": 4.0,
       "timesteps": 6, "max_iter": 4,
       "moving": {"kind": "circle", "n": 12, "radius": 1.0},
       "fixed": {"kind": "circle", "n": 12, "radius": 1.1}},
      {"name": "broken", "backend": "warp-drive",
       "moving": {"kind": "circle", "n": 4},
       "fixed": {"kind": "circle", "n": 4}}
    ]})";
  }
  const CliResult r =
      cli({"bench", "--spec", tmp.file("suite.json"), "--out",
           tmp.file("out.csv")});
  CHECK(r.code == 0);

  std::ifstream in(tmp.file("out.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "case,backend,n,timesteps,sigma,status,iterations,residual_sse,"
        "tree_build_ms,forward_ms,backward_ms,total_ms,"
        "mean_direct_per_point,mean_approx_per_point");
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].find("tiny_exact,exact,12,") == 0);
  CHECK(rows[0].find(",ok,") != std::string::npos);
  CHECK(rows[1].find("tiny_bh,bh,12,") == 0);
  CHECK(rows[2].find("broken,") == 0);
  CHECK(rows[2].find(",ok,") == std::string::npos);

  // every row splits into exactly 14 fields
  for (const std::string& row : rows) {
    std::size_t fields = 1;
    for (const char c : row)
      if (c == ',') ++fields;
    CHECK(fields == 14);
  }
}

TEST_CASE("bench rejects a missing or broken spec") {
  CHECK(cli({"bench", "--spec", "/nonexistent.json"}).code == 2);
  TempDir tmp;
  std::ofstream(tmp.file("bad.json")) << "{ not json";
  CHECK(cli({"bench", "--spec", tmp.file("bad.json")}).code == 2);
}
