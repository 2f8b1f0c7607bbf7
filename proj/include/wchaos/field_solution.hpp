#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wchaos/errors.hpp"
#include "wchaos/galerkin_ode.hpp"
#include "wchaos/hermite.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

struct SurfaceMeta {
  std::string model;
  double nu = 0.0;
  int N = 0;
  int M = 0;
  std::string functional;
  std::string source;  // trajectory engine that produced the values, when known
};

// Sampled functional values u(t, X0) on a time x space grid.  For the point
// functional the column at abscissa z holds u_0^z; for the integral
// functional the time series occupies a single column.  stderrs is populated
// only by the Monte-Carlo estimator.
struct SolutionSurface {
  std::vector<double> times;
  std::vector<double> points;
  Eigen::MatrixXd values;   // row per time, column per point
  Eigen::MatrixXd stderrs;  // same shape when present, else 0 x 0
  SurfaceMeta meta;
};

// H_n(x) = prod_i P_{n_i}(xi_i) with whitened coordinates xi_i = sigma_i beta_i.
inline double hermite_functional_eval(const MultiIndex& n, const SpectralField& field,
                                      const OperatorSpectrum& spectrum) {
  if (field.truncation() < n.size()) {
    throw ConfigError("field truncation shorter than the multi-index");
  }
  if (spectrum.M < n.size()) throw ConfigError("spectrum shorter than the multi-index");
  double prod = 1.0;
  for (int i = 0; i < n.size(); ++i) {
    if (n[i] == 0) continue;
    const double xi = spectrum.sigma[static_cast<std::size_t>(i)] * field.beta[static_cast<std::size_t>(i)];
    prod *= hermite_eval(n[i], xi);
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

// Truncated chaos sum u(t, x) = sum_n u_n(t) H_n(x) with linear interpolation
// between sampled instants.
inline double evaluate_solution(const ModeTrajectories& traj, const IndexSet& set,
                                const SpectralField& field, const OperatorSpectrum& spectrum, double t) {
  if (traj.values.cols() != set.size()) throw ConfigError("trajectory width does not match index set");
  if (traj.times.empty()) throw ConfigError("empty trajectory");
  const double t0 = traj.times.front(), t1 = traj.times.back();
  if (t < t0 - 1e-12 || t > t1 + 1e-12) {
    throw ConfigError("evaluation time outside the sampled range");
  }
  const double tc = std::clamp(t, t0, t1);
  auto hi = std::lower_bound(traj.times.begin(), traj.times.end(), tc);
  Eigen::VectorXd row;
  if (hi == traj.times.begin()) {
    row = traj.values.row(0).transpose();
  } else if (hi == traj.times.end()) {
    row = traj.values.row(traj.values.rows() - 1).transpose();
  } else {
    const auto i1 = static_cast<Eigen::Index>(hi - traj.times.begin());
    const auto i0 = i1 - 1;
    const double ta = traj.times[static_cast<std::size_t>(i0)];
    const double tb = traj.times[static_cast<std::size_t>(i1)];
    const double w = tb > ta ? (tc - ta) / (tb - ta) : 0.0;
    row = ((1.0 - w) * traj.values.row(i0) + w * traj.values.row(i1)).transpose();
  }
  double acc = 0.0;
  for (int i = 0; i < set.size(); ++i) {
    acc += row(i) * hermite_functional_eval(set[i], field, spectrum);
  }
  return acc;
}

namespace detail {

inline Eigen::VectorXd hermite_vector(const IndexSet& set, const SpectralField& field,
                                      const OperatorSpectrum& spectrum) {
  Eigen::VectorXd h(set.size());
  for (int i = 0; i < set.size(); ++i) h(i) = hermite_functional_eval(set[i], field, spectrum);
  return h;
}

inline void check_surface_times(const ModeTrajectories& traj, const std::vector<double>& times) {
  if (traj.times.size() != times.size()) throw ConfigError("trajectory sampled at unexpected times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(traj.times[i] - times[i]) > 1e-12) {
      throw ConfigError("trajectory sampled at unexpected times");
    }
  }
}

}  // namespace detail

// Point-functional surface: one trajectory per grid abscissa (the initial
// vector depends on z), all evaluated at the shared initial field.
inline SolutionSurface build_surface(const std::vector<ModeTrajectories>& per_point, const IndexSet& set,
                                     const SpectralField& initial_field, const OperatorSpectrum& spectrum,
                                     const std::vector<double>& points, const std::vector<double>& times,
                                     SurfaceMeta meta) {
  if (per_point.size() != points.size()) throw ConfigError("one trajectory per grid point required");
  SolutionSurface s;
  s.times = times;
  s.points = points;
  s.meta = std::move(meta);
  s.values.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(points.size()));
  const Eigen::VectorXd h = detail::hermite_vector(set, initial_field, spectrum);
  for (std::size_t p = 0; p < per_point.size(); ++p) {
    const ModeTrajectories& traj = per_point[p];
    if (traj.values.cols() != set.size()) throw ConfigError("trajectory width does not match index set");
    detail::check_surface_times(traj, times);
    s.values.col(static_cast<Eigen::Index>(p)) = traj.values * h;
  }
  return s;
}

// Integral-functional surface: a single trajectory, one output column.
inline SolutionSurface build_surface(const ModeTrajectories& traj, const IndexSet& set,
                                     const SpectralField& initial_field, const OperatorSpectrum& spectrum,
                                     const std::vector<double>& times, SurfaceMeta meta) {
  if (traj.values.cols() != set.size()) throw ConfigError("trajectory width does not match index set");
  detail::check_surface_times(traj, times);
  SolutionSurface s;
  s.times = times;
  s.points = {0.5};
  s.meta = std::move(meta);
  const Eigen::VectorXd h = detail::hermite_vector(set, initial_field, spectrum);
  s.values = traj.values * h;
  return s;
}

}  // namespace wchaos
