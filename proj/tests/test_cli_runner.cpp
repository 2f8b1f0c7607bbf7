// Configuration parsing, output grids, surface-file serialization, the three
// file-writing runners, and the self-check suites.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wchaos/config.hpp"
#include "wchaos/runner.hpp"
#include "wchaos/validate.hpp"

using namespace wchaos;

namespace {

constexpr double kPi = std::numbers::pi;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parsed(const std::string& text) {
  RunConfig cfg = parse_config(text);
  validate_config(cfg);
  return cfg;
}

}  // namespace

TEST_CASE("config text parses with defaults, comments and overrides", "[cli]") {
  const auto cfg = parsed(
      "# experiment setup\n"
      "model = fisher\n"
      "nu = 0.25\n"
      "\n"
      "N = 5\n"
      "M = 6\n"
      "paths = 2500\n"
      "seed = 777\n");
  REQUIRE(cfg.model == "fisher");
  REQUIRE(cfg.nu == 0.25);
  REQUIRE(cfg.N == 5);
  REQUIRE(cfg.M == 6);
  REQUIRE(cfg.paths == 2500);
  REQUIRE(cfg.seed == 777);
  // Untouched keys keep their defaults; fisher fills its own preset profile.
  REQUIRE(cfg.grid_points == 101);
  REQUIRE(cfg.scheme == "total");
  REQUIRE(cfg.ic == "fisher_sech");

  const auto heat = parsed("model = heat\n");
  REQUIRE(heat.ic == "heat_sine");
}

TEST_CASE("config rejects unknown keys, duplicates and malformed values", "[cli]") {
  REQUIRE_THROWS_AS(parse_config("unknown_key = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("nu = 0.1\nnu = 0.2\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("just a line without equals\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("nu = not_a_number\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("N = 3.5\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("paths = twelve\n"), ConfigError);
}

TEST_CASE("config validation enforces ranges and enumerations", "[cli]") {
  RunConfig cfg;
  cfg.nu = 0.0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.model = "advection";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.scheme = "sparse";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.functional = "max";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.quadratic_mode = "quadratic";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.fd_scheme = "upwind";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.ic = "unknown_profile";
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.grid_points = 0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.output_times = 0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.N = -1;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.M = 0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.paths = 0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.t_final = 0.0;
  REQUIRE_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("config serialization round-trips to a fixed point", "[cli]") {
  RunConfig cfg;
  cfg.model = "burgers";
  cfg.nu = 0.01;
  cfg.N = 5;
  cfg.M = 12;
  cfg.t_final = 0.75;
  cfg.quadratic_mode = "exact";
  validate_config(cfg);
  const std::string once = serialize_config(cfg);
  RunConfig back = parse_config(once);
  validate_config(back);
  REQUIRE(serialize_config(back) == once);
  REQUIRE(back.ic == cfg.ic);
  REQUIRE(back.nu == cfg.nu);
  REQUIRE(back.t_final == cfg.t_final);
}

TEST_CASE("missing config file raises an io error", "[cli]") {
  REQUIRE_THROWS_AS(load_config_file("test_out/does_not_exist.cfg"), IoError);
}

TEST_CASE("output grids cover the closed domain and time window", "[cli]") {
  REQUIRE(output_grid(1) == std::vector<double>{0.5});
  REQUIRE(output_grid(3) == std::vector<double>{0.0, 0.5, 1.0});
  const auto g = output_grid(101);
  REQUIRE(g.size() == 101);
  REQUIRE(g.front() == 0.0);
  REQUIRE(g.back() == 1.0);

  REQUIRE(output_time_grid(1.0, 1) == std::vector<double>{0.0});
  const auto t = output_time_grid(2.0, 3);
  REQUIRE(t == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("surface files round-trip exactly and rewrite identically", "[cli]") {
  SolutionSurface s;
  s.times = {0.0, 1.0 / 3.0, 1.0};
  s.points = {0.0, 0.1, 0.7, 1.0};
  s.values.resize(3, 4);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      s.values(i, j) = std::sin(1.0 + 3.7 * static_cast<double>(i) - 0.9 * static_cast<double>(j));
    }
  }
  detail::ensure_output_dir("test_out");
  const std::string path = "test_out/roundtrip_surface.csv";
  write_surface_file(path, s);
  const SolutionSurface r = read_surface_file(path);
  REQUIRE(r.times == s.times);    // shortest round-trip formatting is exact
  REQUIRE(r.points == s.points);
  REQUIRE(r.values == s.values);

  const std::string first = slurp(path);
  write_surface_file(path, s);
  REQUIRE(slurp(path) == first);

  // Header layout: "t" plus one column label per abscissa.
  std::istringstream head(first);
  std::string line;
  std::getline(head, line);
  REQUIRE(line.rfind("t,", 0) == 0);
  REQUIRE(std::count(line.begin(), line.end(), ',') == 4);
}

TEST_CASE("malformed surface files raise io errors", "[cli]") {
  detail::ensure_output_dir("test_out");
  {
    std::ofstream out("test_out/bad_header.csv");
    out << "x,0,1\n0,1,2\n";
  }
  REQUIRE_THROWS_AS(read_surface_file("test_out/bad_header.csv"), IoError);
  {
    std::ofstream out("test_out/bad_number.csv");
    out << "t,0,1\n0,1,abc\n";
  }
  REQUIRE_THROWS_AS(read_surface_file("test_out/bad_number.csv"), IoError);
  {
    std::ofstream out("test_out/ragged.csv");
    out << "t,0,1\n0,1\n";
  }
  REQUIRE_THROWS_AS(read_surface_file("test_out/ragged.csv"), IoError);
  REQUIRE_THROWS_AS(read_surface_file("test_out/absent.csv"), IoError);
}

TEST_CASE("spectral run reproduces the initial profile at t = 0", "[cli]") {
  RunConfig cfg;
  cfg.model = "heat";
  cfg.nu = 0.1;
  cfg.M = 3;
  cfg.N = 2;
  cfg.grid_points = 11;
  cfg.t_final = 0.5;
  cfg.output_times = 6;
  validate_config(cfg);
  const auto s = spectral_surface(cfg);
  REQUIRE(s.times.size() == 6);
  REQUIRE(s.points.size() == 11);
  REQUIRE(s.values.rows() == 6);
  REQUIRE(s.values.cols() == 11);
  for (std::size_t p = 0; p < s.points.size(); ++p) {
    // The sine profile lives entirely in the first retained mode, so the
    // t = 0 slice is exact up to rounding.
    REQUIRE_THAT(s.values(0, static_cast<Eigen::Index>(p)),
                 Catch::Matchers::WithinAbs(std::sin(kPi * s.points[p]), 1e-9));
  }
  // Dirichlet boundary columns vanish for every time.
  REQUIRE(s.values.col(0).cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(s.values.col(10).cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(s.meta.source == "eigen");
}

TEST_CASE("spectral and finite-difference surfaces agree on the forced heat run", "[cli]") {
  RunConfig cfg;
  cfg.model = "heat";
  cfg.nu = 0.1;
  cfg.M = 3;
  cfg.N = 2;
  cfg.grid_points = 21;
  cfg.t_final = 0.5;
  cfg.output_times = 6;
  cfg.fd_points = 99;
  cfg.fd_dt = 1e-3;
  validate_config(cfg);
  const auto a = spectral_surface(cfg);
  const auto b = reference_surface(cfg);
  REQUIRE(a.times == b.times);
  REQUIRE(a.points == b.points);
  const auto rep = compare(a, b);
  // Three retained modes at nu = 0.1 leave a small forcing tail.
  REQUIRE(rep.l2 <= 0.05);
}

TEST_CASE("integral-functional surfaces are single-column and consistent", "[cli]") {
  RunConfig cfg;
  cfg.model = "heat";
  cfg.nu = 0.1;
  cfg.M = 3;
  cfg.N = 2;
  cfg.functional = "integral";
  cfg.t_final = 0.5;
  cfg.output_times = 6;
  cfg.fd_points = 99;
  cfg.fd_dt = 1e-3;
  validate_config(cfg);
  const auto a = spectral_surface(cfg);
  const auto b = reference_surface(cfg);
  REQUIRE(a.points == std::vector<double>{0.5});
  REQUIRE(b.points == std::vector<double>{0.5});
  REQUIRE(a.values.cols() == 1);
  REQUIRE(b.values.cols() == 1);
  // Integral of sin(pi x) at t = 0.
  REQUIRE_THAT(a.values(0, 0), Catch::Matchers::WithinAbs(2.0 / kPi, 1e-9));
  const auto rep = compare(a, b);
  REQUIRE(rep.l2 <= 0.05);
}

TEST_CASE("all three runners write byte-reproducible outputs", "[cli]") {
  RunConfig cfg;
  cfg.model = "heat";
  cfg.nu = 0.1;
  cfg.M = 3;
  cfg.N = 2;
  cfg.grid_points = 11;
  cfg.t_final = 0.2;
  cfg.output_times = 3;
  cfg.mc_modes = 4;
  cfg.paths = 300;
  cfg.dt = 0.02;
  cfg.fd_points = 49;
  cfg.fd_dt = 1e-3;
  validate_config(cfg);

  cfg.output_dir = "test_out/repro_a";
  const auto sp1 = run_spectral(cfg);
  const auto rf1 = run_reference(cfg);
  const auto mc1 = run_mc(cfg);
  REQUIRE(sp1.files.size() == 2);
  REQUIRE(rf1.files.size() == 2);
  REQUIRE(mc1.files.size() == 3);
  std::vector<std::string> first;
  for (const auto& f : sp1.files) first.push_back(slurp(f));
  for (const auto& f : rf1.files) first.push_back(slurp(f));
  for (const auto& f : mc1.files) first.push_back(slurp(f));

  cfg.output_dir = "test_out/repro_b";
  const auto sp2 = run_spectral(cfg);
  const auto rf2 = run_reference(cfg);
  const auto mc2 = run_mc(cfg);
  std::vector<std::string> second;
  for (const auto& f : sp2.files) second.push_back(slurp(f));
  for (const auto& f : rf2.files) second.push_back(slurp(f));
  for (const auto& f : mc2.files) second.push_back(slurp(f));

  REQUIRE(first == second);
  // The three runners share one grid: their files can be compared pairwise.
  REQUIRE(sp1.surface.times == rf1.surface.times);
  REQUIRE(sp1.surface.points == rf1.surface.points);
  REQUIRE(sp1.surface.times == mc1.surface.times);
  REQUIRE(sp1.surface.points == mc1.surface.points);
}

TEST_CASE("comparison runner reports zero against itself and writes metrics", "[cli]") {
  RunConfig cfg;
  cfg.model = "heat";
  cfg.M = 3;
  cfg.N = 2;
  cfg.grid_points = 11;
  cfg.t_final = 0.2;
  cfg.output_times = 3;
  cfg.output_dir = "test_out/self_compare";
  validate_config(cfg);
  const auto run = run_spectral(cfg);
  const auto rep = run_compare(run.files[0], run.files[0], cfg.output_dir);
  REQUIRE(rep.l2 == 0.0);
  REQUIRE(rep.sup == 0.0);

  const std::string metrics = slurp(cfg.output_dir + "/metrics.txt");
  REQUIRE(metrics.rfind("l2=", 0) == 0);
  REQUIRE(metrics.find("\nsup=") != std::string::npos);
  REQUIRE(metrics.find("t=") != std::string::npos);

  const std::string formatted = format_metrics(rep);
  REQUIRE(formatted == metrics);
  REQUIRE_THROWS_AS(run_compare(run.files[0], "test_out/absent.csv"), IoError);
}

TEST_CASE("self-check suites all pass on the healthy build", "[cli]") {
  const auto results = run_validate();
  REQUIRE(!results.empty());
  for (const auto& r : results) {
    INFO(r.name << ": " << r.message);
    REQUIRE(r.pass);
  }
}

TEST_CASE("perturbed polynomial weights are caught by exactly one suite", "[cli]") {
  const auto results = run_validate(/*perturb_hermite=*/true);
  int failed = 0;
  std::string which;
  for (const auto& r : results) {
    if (!r.pass) {
      ++failed;
      which = r.name;
    }
  }
  REQUIRE(failed == 1);
  REQUIRE(which == "hermite-orthonormality");
}
