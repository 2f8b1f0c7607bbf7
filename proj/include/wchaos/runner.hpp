#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wchaos/config.hpp"
#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/field_solution.hpp"
#include "wchaos/galerkin_ode.hpp"
#include "wchaos/hermite.hpp"
#include "wchaos/initial_conditions.hpp"
#include "wchaos/mc_oracle.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/parallel.hpp"
#include "wchaos/reference_pde.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

// ---------------------------------------------------------------------------
// Shared grid contract: all three runners emit surfaces on the same abscissae
// and output times for a given config, so their files compare directly.
// ---------------------------------------------------------------------------

inline std::vector<double> output_grid(int grid_points) {
  if (grid_points < 1) throw ConfigError("grid_points must be at least 1");
  if (grid_points == 1) return {0.5};
  std::vector<double> xs(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_points - 1);
  }
  return xs;
}

inline std::vector<double> output_time_grid(double t_final, int output_times) {
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (output_times < 1) throw ConfigError("output_times must be at least 1");
  if (output_times == 1) return {0.0};
  std::vector<double> ts(static_cast<std::size_t>(output_times));
  for (int j = 0; j < output_times; ++j) {
    ts[static_cast<std::size_t>(j)] = t_final * static_cast<double>(j) / (output_times - 1);
  }
  return ts;
}

// The stochastic heat experiment runs with the fixed polynomial source
// f(xi) = xi^3; the quadratic models carry their reaction inside the drift.
inline ForcingFunction heat_experiment_forcing() {
  return [](double xi) { return xi * xi * xi; };
}

// ---------------------------------------------------------------------------
// Surface files: first line `t,<x_0>,...,<x_P>` listing the grid abscissae,
// then one `t_j,v_0,...,v_P` row per output time, shortest round-trip
// decimals throughout.
// ---------------------------------------------------------------------------

inline void write_surface_file(const std::string& path, const SolutionSurface& s,
                               bool write_stderrs = false) {
  const Eigen::MatrixXd& vals = write_stderrs ? s.stderrs : s.values;
  if (vals.rows() != static_cast<Eigen::Index>(s.times.size()) ||
      vals.cols() != static_cast<Eigen::Index>(s.points.size())) {
    throw ConfigError("surface shape does not match its grids");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << 't';
  for (double x : s.points) out << ',' << detail::format_double(x);
  out << '\n';
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    out << detail::format_double(s.times[i]);
    for (Eigen::Index j = 0; j < vals.cols(); ++j) {
      out << ',' << detail::format_double(vals(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_surface_number(const std::string& path, const std::string& tok) {
  try {
    return parse_double("surface", tok);
  } catch (const ConfigError&) {
    throw IoError("malformed surface file '" + path + "': bad number '" + tok + "'");
  }
}

}  // namespace detail

inline SolutionSurface read_surface_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open surface file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("surface file '" + path + "' is empty");
  const auto header = detail::split_csv(line);
  if (header.size() < 2 || header[0] != "t") {
    throw IoError("malformed surface file '" + path + "': header must be t,<x_0>,...");
  }
  SolutionSurface s;
  for (std::size_t i = 1; i < header.size(); ++i) {
    s.points.push_back(detail::parse_surface_number(path, header[i]));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto toks = detail::split_csv(line);
    if (toks.size() != header.size()) {
      throw IoError("malformed surface file '" + path + "': row width " +
                    std::to_string(toks.size()) + " does not match header width " +
                    std::to_string(header.size()));
    }
    s.times.push_back(detail::parse_surface_number(path, toks[0]));
    std::vector<double> row;
    row.reserve(toks.size() - 1);
    for (std::size_t i = 1; i < toks.size(); ++i) {
      row.push_back(detail::parse_surface_number(path, toks[i]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("surface file '" + path + "' has no data rows");
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.points.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Spectral pipeline
// ---------------------------------------------------------------------------

namespace detail {

inline DriftModel build_drift_model(const RunConfig& cfg) {
  DriftModel model;
  model.kind = drift_kind_from(cfg.model);
  model.mode = quadratic_mode_from(cfg.quadratic_mode);
  if (model.kind == DriftKind::Heat) {
    model.forcing = heat_experiment_forcing();
  } else {
    const int Kb = cfg.base_modes > 0 ? cfg.base_modes : 2 * cfg.M;
    model.base_field = project_field(initial_condition_function(cfg.ic), Kb);
  }
  return model;
}

// Forward-reachable closure of the seed indices under the drift's sparsity
// pattern.  Modes outside the closure stay identically zero, so dropping them
// is exact.  Available for the heat drift and the linearized quadratic mode,
// whose couplings never raise the chaos level.
inline IndexSet reachable_subset(const IndexSet& set, const DriftModel& model,
                                 const OperatorSpectrum& spectrum, const QuadratureRule& rule,
                                 const std::vector<int>& seed_positions) {
  DriftAssembler assembler(spectrum, model, rule, std::max(1, pairing_degree_for(set)));
  std::vector<char> keep(static_cast<std::size_t>(set.size()), 0);
  std::vector<int> stack;
  for (int s : seed_positions) {
    if (s >= 0 && s < set.size() && !keep[static_cast<std::size_t>(s)]) {
      keep[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (const MultiIndex& m : assembler.successors(set[i])) {
      const int j = set.find(m);
      if (j >= 0 && !keep[static_cast<std::size_t>(j)]) {
        keep[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
    }
  }
  std::vector<int> positions;
  for (int i = 0; i < set.size(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) positions.push_back(i);
  }
  return set.subset(positions);
}

struct TrajectoryFamily {
  std::vector<ModeTrajectories> trajectories;
  TrajectorySource source = TrajectorySource::Eigen;
};

// Solve the same Galerkin system for many initial vectors: one shared
// eigendecomposition, per-vector constants (projection or collocation).  Any
// numerical failure of the shared decomposition falls back to RK4 with the
// same step policy as solve_eigen, labeled accordingly.
inline TrajectoryFamily solve_point_family(const GalerkinSystem& sys,
                                           const std::vector<Eigen::VectorXd>& u0s,
                                           const std::vector<double>& times,
                                           const std::string& constants_route, const IndexSet& set,
                                           const OperatorSpectrum& spectrum, std::uint64_t seed,
                                           unsigned threads) {
  validate_times(times);
  TrajectoryFamily fam;
  fam.trajectories.resize(u0s.size());

  auto fallback_all = [&]() {
    const double spacing = min_positive_spacing(times);
    const double span = times.back() - times.front();
    double rho = std::max(sys.matrix.cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
    double dt = std::min(0.5 / rho, std::isfinite(spacing) ? spacing : span);
    if (span > 0) dt = std::min(dt, span);
    if (dt <= 0 || !std::isfinite(dt)) dt = 1e-3;
    parallel_for_chunks(u0s.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        fam.trajectories[p] = solve_rk4(sys, u0s[p], times, dt);
        fam.trajectories[p].source = TrajectorySource::EigenFallbackRk4;
      }
    });
    fam.source = TrajectorySource::EigenFallbackRk4;
    return fam;
  };

  EigenSolution sol;
  try {
    sol = eigen_decompose(sys);
  } catch (const NumericalError&) {
    return fallback_all();
  }
  if (!std::isfinite(sol.condition) || sol.condition > 1e12) return fallback_all();

  // Collocation: shared sample fields drawn from the stationary coordinate
  // law (sigma_k beta_k standard normal), one shared least-squares factor.
  const bool collocate = constants_route == "collocation";
  Eigen::MatrixXd H;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> shared_qr;
  if (collocate) {
    const int dim = set.size();
    const int n_samples = 2 * dim;
    GaussianStream rng(path_stream_seed(seed ^ 0x5CA1AB1E5EEDULL, 7));
    H.resize(n_samples, dim);
    for (int p = 0; p < n_samples; ++p) {
      SpectralField sample;
      sample.beta.resize(static_cast<std::size_t>(spectrum.M));
      for (int k = 0; k < spectrum.M; ++k) {
        sample.beta[static_cast<std::size_t>(k)] =
            std::sqrt(spectrum.lambda_cov[static_cast<std::size_t>(k)]) * rng.next();
      }
      H.row(p) = hermite_vector(set, sample, spectrum).transpose();
    }
    shared_qr.compute(H * sol.phi0);
    if (shared_qr.rank() < sol.phi0.cols()) return fallback_all();
  }

  try {
    parallel_for_chunks(u0s.size(), threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        Eigen::VectorXd c;
        if (collocate) {
          c = shared_qr.solve(H * u0s[p]);
          if (!c.allFinite()) throw NumericalError("collocation solve produced non-finite constants");
        } else {
          c = fix_constants(sol, u0s[p]).constants;
        }
        ModeTrajectories traj;
        traj.times = times;
        traj.source = TrajectorySource::Eigen;
        traj.values.resize(static_cast<Eigen::Index>(times.size()), u0s[p].size());
        for (std::size_t s = 0; s < times.size(); ++s) {
          traj.values.row(static_cast<Eigen::Index>(s)) = real_form_eval(sol, c, times[s]).transpose();
        }
        if (!traj.values.allFinite()) throw NumericalError("trajectory evaluation produced non-finite values");
        fam.trajectories[p] = std::move(traj);
      }
    });
  } catch (const NumericalError&) {
    return fallback_all();
  }
  fam.source = TrajectorySource::Eigen;
  return fam;
}

}  // namespace detail

// Result of one runner invocation: the surface it computed plus every file it
// wrote (surface, standard errors when present, metadata).
struct RunResult {
  SolutionSurface surface;
  std::vector<std::string> files;
};

// Chaos-spectral solve of the chosen model on the configured grid.
inline SolutionSurface spectral_surface(const RunConfig& cfg) {
  const DriftModel model = detail::build_drift_model(cfg);
  const OperatorSpectrum spectrum = make_spectrum(cfg.nu, cfg.M);
  const QuadratureRule rule = gauss_hermite(cfg.quadrature_order);
  const FunctionalKind fkind = functional_from(cfg.functional);
  const std::vector<double> times = output_time_grid(cfg.t_final, cfg.output_times);
  const std::vector<double> grid = output_grid(cfg.grid_points);

  IndexSet set = enumerate_indices(cfg.M, cfg.N, truncation_scheme_from(cfg.scheme));
  // Seeds: every first-chaos mode (the initial vectors of both functionals
  // are supported there).
  if (model.kind == DriftKind::Heat || model.mode == QuadraticMode::Linearized) {
    std::vector<int> seeds;
    for (int k = 0; k < cfg.M; ++k) {
      const int pos = set.find(unit_index(cfg.M, k));
      if (pos >= 0) seeds.push_back(pos);
    }
    set = detail::reachable_subset(set, model, spectrum, rule, seeds);
  }

  const CoefficientMatrix coeffs = assemble_coefficients(set, model, spectrum, rule, cfg.threads);
  const GalerkinSystem sys = assemble_system(coeffs, spectrum);
  const SpectralField initial_field = project_field(initial_condition_function(cfg.ic), cfg.M);

  SurfaceMeta meta;
  meta.model = cfg.model;
  meta.nu = cfg.nu;
  meta.N = cfg.N;
  meta.M = cfg.M;

  if (fkind == FunctionalKind::IntegralOverDomain) {
    meta.functional = "integral";
    const Eigen::VectorXd u0 = integral_functional_ic(set, spectrum);
    std::vector<Eigen::VectorXd> u0s{u0};
    const auto fam = detail::solve_point_family(sys, u0s, times, cfg.constants_route, set, spectrum,
                                                cfg.seed, cfg.threads);
    meta.source = to_string(fam.source);
    return build_surface(fam.trajectories[0], set, initial_field, spectrum, times, meta);
  }

  meta.functional = "point";
  std::vector<Eigen::VectorXd> u0s;
  u0s.reserve(grid.size());
  for (double z : grid) u0s.push_back(point_functional_ic(set, z, spectrum));
  const auto fam = detail::solve_point_family(sys, u0s, times, cfg.constants_route, set, spectrum,
                                              cfg.seed, cfg.threads);
  meta.source = to_string(fam.source);
  return build_surface(fam.trajectories, set, initial_field, spectrum, grid, times, meta);
}

// Deterministic mean-field finite-difference surface resampled onto the
// configured grid (integral functional: trapezoid over the full grid).
inline SolutionSurface reference_surface(const RunConfig& cfg) {
  DriftModel model;
  model.kind = drift_kind_from(cfg.model);
  if (model.kind == DriftKind::Heat) model.forcing = heat_experiment_forcing();
  const FunctionalKind fkind = functional_from(cfg.functional);
  const std::vector<double> times = output_time_grid(cfg.t_final, cfg.output_times);
  const std::vector<double> grid = output_grid(cfg.grid_points);

  FDGrid fd;
  fd.P = cfg.fd_points;
  fd.dt = cfg.fd_dt;
  fd.scheme = fd_scheme_from(cfg.fd_scheme);
  const SolutionSurface fine =
      solve_deterministic(model, cfg.nu, initial_condition_function(cfg.ic), fd, times);

  SolutionSurface s;
  s.times = times;
  s.meta = fine.meta;
  s.meta.N = cfg.N;
  s.meta.M = cfg.M;
  if (fkind == FunctionalKind::IntegralOverDomain) {
    s.meta.functional = "integral";
    s.points = {0.5};
    s.values.resize(static_cast<Eigen::Index>(times.size()), 1);
    const double h = fd.h();
    for (std::size_t i = 0; i < times.size(); ++i) {
      // Trapezoid with zero boundary values: h * sum of interior nodes.
      double acc = 0.0;
      for (Eigen::Index j = 1; j + 1 < fine.values.cols(); ++j) {
        acc += fine.values(static_cast<Eigen::Index>(i), j);
      }
      s.values(static_cast<Eigen::Index>(i), 0) = h * acc;
    }
    return s;
  }
  s.meta.functional = "point";
  s.points = grid;
  s.values.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::VectorXd row = fine.values.row(static_cast<Eigen::Index>(i)).transpose();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::interp1(fine.points, row, grid[j]);
    }
  }
  return s;
}

// Path-sampling estimate on the configured grid.
inline SolutionSurface mc_surface(const RunConfig& cfg) {
  McConfig mc;
  mc.kind = drift_kind_from(cfg.model);
  if (mc.kind == DriftKind::Heat) mc.forcing = heat_experiment_forcing();
  mc.nu = cfg.nu;
  mc.K = cfg.mc_modes;
  mc.dt = cfg.dt;
  mc.paths = cfg.paths;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  const Functional functional{functional_from(cfg.functional), 0.5};
  const std::vector<double> times = output_time_grid(cfg.t_final, cfg.output_times);
  const std::vector<double> grid = output_grid(cfg.grid_points);
  const SpectralField X0 = project_field(initial_condition_function(cfg.ic), cfg.mc_modes);
  SolutionSurface s = simulate_mean(mc, X0, functional, times, grid);
  s.meta.N = cfg.N;
  return s;
}

// ---------------------------------------------------------------------------
// File-writing runners
// ---------------------------------------------------------------------------

namespace detail {

inline void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

inline void write_meta_file(const std::string& path, const RunConfig& cfg,
                            const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "model = " << cfg.model << '\n';
  out << "nu = " << format_double(cfg.nu) << '\n';
  out << "N = " << cfg.N << '\n';
  out << "M = " << cfg.M << '\n';
  out << "scheme = " << cfg.scheme << '\n';
  out << "functional = " << cfg.functional << '\n';
  out << "grid_points = " << cfg.grid_points << '\n';
  out << "t_final = " << format_double(cfg.t_final) << '\n';
  out << "output_times = " << cfg.output_times << '\n';
  out << "ic = " << cfg.ic << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace detail

inline RunResult run_spectral(const RunConfig& cfg) {
  RunResult r;
  r.surface = spectral_surface(cfg);
  detail::ensure_output_dir(cfg.output_dir);
  const std::string surface_path = cfg.output_dir + "/spectral_surface.csv";
  const std::string meta_path = cfg.output_dir + "/spectral_meta.txt";
  write_surface_file(surface_path, r.surface);
  detail::write_meta_file(meta_path, cfg,
                          {{"quadrature_order", std::to_string(cfg.quadrature_order)},
                           {"quadratic_mode", cfg.quadratic_mode},
                           {"base_modes", std::to_string(cfg.base_modes > 0 ? cfg.base_modes : 2 * cfg.M)},
                           {"constants_route", cfg.constants_route},
                           {"source", r.surface.meta.source}});
  r.files = {surface_path, meta_path};
  return r;
}

inline RunResult run_reference(const RunConfig& cfg) {
  RunResult r;
  r.surface = reference_surface(cfg);
  detail::ensure_output_dir(cfg.output_dir);
  const std::string surface_path = cfg.output_dir + "/reference_surface.csv";
  const std::string meta_path = cfg.output_dir + "/reference_meta.txt";
  write_surface_file(surface_path, r.surface);
  detail::write_meta_file(meta_path, cfg,
                          {{"fd_points", std::to_string(cfg.fd_points)},
                           {"fd_dt", detail::format_double(cfg.fd_dt)},
                           {"fd_scheme", cfg.fd_scheme}});
  r.files = {surface_path, meta_path};
  return r;
}

inline RunResult run_mc(const RunConfig& cfg) {
  RunResult r;
  r.surface = mc_surface(cfg);
  detail::ensure_output_dir(cfg.output_dir);
  const std::string surface_path = cfg.output_dir + "/mc_surface.csv";
  const std::string stderr_path = cfg.output_dir + "/mc_stderr.csv";
  const std::string meta_path = cfg.output_dir + "/mc_meta.txt";
  write_surface_file(surface_path, r.surface);
  write_surface_file(stderr_path, r.surface, /*write_stderrs=*/true);
  detail::write_meta_file(meta_path, cfg,
                          {{"mc_modes", std::to_string(cfg.mc_modes)},
                           {"paths", std::to_string(cfg.paths)},
                           {"seed", std::to_string(cfg.seed)},
                           {"dt", detail::format_double(cfg.dt)}});
  r.files = {surface_path, stderr_path, meta_path};
  return r;
}

// Metrics text: `l2=` and `sup=` lines, then one `t=<t> l2=<v>` cumulative
// line per time on the comparison grid.
inline std::string format_metrics(const CompareReport& rep) {
  std::ostringstream out;
  out << "l2=" << detail::format_double(rep.l2) << '\n';
  out << "sup=" << detail::format_double(rep.sup) << '\n';
  for (const auto& [t, v] : rep.per_time) {
    out << "t=" << detail::format_double(t) << " l2=" << detail::format_double(v) << '\n';
  }
  return out.str();
}

// Compare two surface files (A = candidate, B = reference); optionally write
// metrics.txt into `out_dir` (empty = stdout only, handled by the caller).
inline CompareReport run_compare(const std::string& file_a, const std::string& file_b,
                                 const std::string& out_dir = "") {
  const SolutionSurface a = read_surface_file(file_a);
  const SolutionSurface b = read_surface_file(file_b);
  const CompareReport rep = compare(a, b);
  if (!out_dir.empty()) {
    detail::ensure_output_dir(out_dir);
    const std::string path = out_dir + "/metrics.txt";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << format_metrics(rep);
    out.flush();
    if (!out) throw IoError("error writing '" + path + "'");
  }
  return rep;
}

}  // namespace wchaos
