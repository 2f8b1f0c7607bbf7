#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/initial_conditions.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/reference_pde.hpp"

namespace wchaos {

// Flat key = value run configuration.  Unknown keys are rejected so typos
// cannot silently fall back to defaults.
struct RunConfig {
  std::string model = "heat";                  // heat | fisher | burgers
  double nu = 0.1;
  int N = 4;                                   // polynomial degree cap
  int M = 4;                                   // retained noise modes
  std::string scheme = "total";                // total | tensor
  std::string functional = "point";            // point | integral
  int grid_points = 101;
  double t_final = 1.0;
  int output_times = 11;                       // count, including t = 0
  int quadrature_order = 64;
  std::string ic;                              // empty -> model default preset
  std::uint64_t seed = 12345;
  long paths = 10000;                          // Monte Carlo sample count
  double dt = 1e-3;                            // Monte Carlo step
  int mc_modes = 16;                           // Monte Carlo retained modes
  std::string quadratic_mode = "linearized";   // linearized | exact
  int base_modes = 0;                          // linearization modes; 0 -> 2M
  std::string constants_route = "projection";  // projection | collocation
  int fd_points = 199;                         // reference interior grid points
  double fd_dt = 2.5e-4;                       // reference step
  std::string fd_scheme = "cn";                // cn | rk4
  unsigned threads = 0;                        // 0 -> hardware default
  std::string output_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.begin(), e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return {b, e};
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("key '" + key + "': cannot parse real value '" + v + "'");
  }
  return out;
}

template <typename Int>
inline Int parse_integer(const std::string& key, const std::string& v) {
  Int out = 0;
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("key '" + key + "': cannot parse integer value '" + v + "'");
  }
  return out;
}

}  // namespace detail

// Parse the flat key = value format ('#' starts a comment, blank lines
// ignored).  Unknown or duplicate keys are configuration errors.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate key '" + key + "'");
    }
    if (key == "model") cfg.model = value;
    else if (key == "nu") cfg.nu = detail::parse_double(key, value);
    else if (key == "N") cfg.N = detail::parse_integer<int>(key, value);
    else if (key == "M") cfg.M = detail::parse_integer<int>(key, value);
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "functional") cfg.functional = value;
    else if (key == "grid_points") cfg.grid_points = detail::parse_integer<int>(key, value);
    else if (key == "t_final") cfg.t_final = detail::parse_double(key, value);
    else if (key == "output_times") cfg.output_times = detail::parse_integer<int>(key, value);
    else if (key == "quadrature_order") cfg.quadrature_order = detail::parse_integer<int>(key, value);
    else if (key == "ic") cfg.ic = value;
    else if (key == "seed") cfg.seed = detail::parse_integer<std::uint64_t>(key, value);
    else if (key == "paths") cfg.paths = detail::parse_integer<long>(key, value);
    else if (key == "dt") cfg.dt = detail::parse_double(key, value);
    else if (key == "mc_modes") cfg.mc_modes = detail::parse_integer<int>(key, value);
    else if (key == "quadratic_mode") cfg.quadratic_mode = value;
    else if (key == "base_modes") cfg.base_modes = detail::parse_integer<int>(key, value);
    else if (key == "constants_route") cfg.constants_route = value;
    else if (key == "fd_points") cfg.fd_points = detail::parse_integer<int>(key, value);
    else if (key == "fd_dt") cfg.fd_dt = detail::parse_double(key, value);
    else if (key == "fd_scheme") cfg.fd_scheme = value;
    else if (key == "threads") cfg.threads = detail::parse_integer<unsigned>(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else throw ConfigError("unknown key '" + key + "'");
  }
  return cfg;
}

// Named initial-condition presets.
inline std::function<double(double)> initial_condition_function(const std::string& name) {
  if (name == "heat_sine") return [](double xi) { return std::sin(M_PI * xi); };
  if (name == "fisher_sech") {
    return [](double xi) {
      const double c = std::cosh(5.0 * (xi - 0.5));
      return 1.0 / (c * c);
    };
  }
  if (name == "parabola") return [](double xi) { return xi * (1.0 - xi); };
  if (name == "zero") return [](double) { return 0.0; };
  throw ConfigError("unknown initial-condition preset '" + name + "'");
}

inline DriftKind drift_kind_from(const std::string& model) {
  if (model == "heat") return DriftKind::Heat;
  if (model == "fisher") return DriftKind::Fisher;
  if (model == "burgers") return DriftKind::Burgers;
  throw ConfigError("unknown model '" + model + "' (expected heat, fisher, or burgers)");
}

inline TruncationScheme truncation_scheme_from(const std::string& scheme) {
  if (scheme == "total") return TruncationScheme::TotalDegree;
  if (scheme == "tensor") return TruncationScheme::FullTensor;
  throw ConfigError("unknown scheme '" + scheme + "' (expected total or tensor)");
}

inline FunctionalKind functional_from(const std::string& functional) {
  if (functional == "point") return FunctionalKind::PointEvaluation;
  if (functional == "integral") return FunctionalKind::IntegralOverDomain;
  throw ConfigError("unknown functional '" + functional + "' (expected point or integral)");
}

inline QuadraticMode quadratic_mode_from(const std::string& mode) {
  if (mode == "linearized") return QuadraticMode::Linearized;
  if (mode == "exact") return QuadraticMode::Exact;
  throw ConfigError("unknown quadratic_mode '" + mode + "' (expected linearized or exact)");
}

inline FDScheme fd_scheme_from(const std::string& scheme) {
  if (scheme == "cn") return FDScheme::CrankNicolsonIMEX;
  if (scheme == "rk4") return FDScheme::ExplicitRK4;
  throw ConfigError("unknown fd_scheme '" + scheme + "' (expected cn or rk4)");
}

// Range/enum validation; fills the model-dependent initial-condition default.
inline void validate_config(RunConfig& cfg) {
  drift_kind_from(cfg.model);
  if (!(cfg.nu > 0.0)) throw ConfigError("nu must be positive");
  if (cfg.N < 1) throw ConfigError("N must be at least 1");
  if (cfg.M < 1) throw ConfigError("M must be at least 1");
  truncation_scheme_from(cfg.scheme);
  functional_from(cfg.functional);
  if (cfg.grid_points < 1) throw ConfigError("grid_points must be at least 1");
  if (!(cfg.t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (cfg.output_times < 1) throw ConfigError("output_times must be at least 1");
  if (cfg.quadrature_order < 1) throw ConfigError("quadrature_order must be at least 1");
  if (cfg.ic.empty()) cfg.ic = cfg.model == "fisher" ? "fisher_sech" : "heat_sine";
  initial_condition_function(cfg.ic);
  if (cfg.paths < 1) throw ConfigError("paths must be at least 1");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.mc_modes < 1) throw ConfigError("mc_modes must be at least 1");
  quadratic_mode_from(cfg.quadratic_mode);
  if (cfg.base_modes < 0) throw ConfigError("base_modes must be nonnegative");
  if (cfg.constants_route != "projection" && cfg.constants_route != "collocation") {
    throw ConfigError("unknown constants_route '" + cfg.constants_route +
                      "' (expected projection or collocation)");
  }
  if (cfg.fd_points < 3) throw ConfigError("fd_points must be at least 3");
  if (!(cfg.fd_dt > 0.0)) throw ConfigError("fd_dt must be positive");
  fd_scheme_from(cfg.fd_scheme);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

// Canonical serialization: fixed key order, shortest round-trip decimals.
// parse . serialize is the identity on parsed configs.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "model = " << cfg.model << '\n';
  out << "nu = " << detail::format_double(cfg.nu) << '\n';
  out << "N = " << cfg.N << '\n';
  out << "M = " << cfg.M << '\n';
  out << "scheme = " << cfg.scheme << '\n';
  out << "functional = " << cfg.functional << '\n';
  out << "grid_points = " << cfg.grid_points << '\n';
  out << "t_final = " << detail::format_double(cfg.t_final) << '\n';
  out << "output_times = " << cfg.output_times << '\n';
  out << "quadrature_order = " << cfg.quadrature_order << '\n';
  out << "ic = " << cfg.ic << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "paths = " << cfg.paths << '\n';
  out << "dt = " << detail::format_double(cfg.dt) << '\n';
  out << "mc_modes = " << cfg.mc_modes << '\n';
  out << "quadratic_mode = " << cfg.quadratic_mode << '\n';
  out << "base_modes = " << cfg.base_modes << '\n';
  out << "constants_route = " << cfg.constants_route << '\n';
  out << "fd_points = " << cfg.fd_points << '\n';
  out << "fd_dt = " << detail::format_double(cfg.fd_dt) << '\n';
  out << "fd_scheme = " << cfg.fd_scheme << '\n';
  out << "threads = " << cfg.threads << '\n';
  out << "output_dir = " << cfg.output_dir << '\n';
  return out.str();
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  RunConfig cfg = parse_config(buf.str());
  validate_config(cfg);
  return cfg;
}

}  // namespace wchaos
