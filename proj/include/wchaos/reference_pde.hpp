#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/field_solution.hpp"
#include "wchaos/galerkin_ode.hpp"

namespace wchaos {

enum class FDScheme { ExplicitRK4, CrankNicolsonIMEX };

// Method-of-lines grid: P interior points, spacing h = 1/(P+1), Dirichlet
// boundaries pinned to zero.  The explicit scheme is guarded by the parabolic
// CFL condition nu dt / h^2 <= 0.25; the IMEX scheme treats diffusion by
// Crank-Nicolson and the reaction/advection term explicitly.
struct FDGrid {
  int P = 199;
  double dt = 2.5e-4;
  FDScheme scheme = FDScheme::CrankNicolsonIMEX;
  double h() const { return 1.0 / (P + 1); }
};

namespace detail {

// Solve (I - a T) y = rhs with T the 1-D Laplacian stencil tridiag(1,-2,1).
inline void thomas_cn_solve(double a, const Eigen::VectorXd& rhs, Eigen::VectorXd& y,
                            std::vector<double>& cp, std::vector<double>& dp) {
  const auto P = static_cast<std::size_t>(rhs.size());
  const double diag = 1.0 + 2.0 * a;
  const double off = -a;
  cp.resize(P);
  dp.resize(P);
  cp[0] = off / diag;
  dp[0] = rhs(0) / diag;
  for (std::size_t i = 1; i < P; ++i) {
    const double m = diag - off * cp[i - 1];
    cp[i] = off / m;
    dp[i] = (rhs(static_cast<Eigen::Index>(i)) - off * dp[i - 1]) / m;
  }
  y.resize(static_cast<Eigen::Index>(P));
  y(static_cast<Eigen::Index>(P - 1)) = dp[P - 1];
  for (std::size_t i = P - 1; i-- > 0;) {
    y(static_cast<Eigen::Index>(i)) = dp[i] - cp[i] * y(static_cast<Eigen::Index>(i + 1));
  }
}

}  // namespace detail

// Mean-field baseline: y_t = nu y_xx + r(y) with
//   heat:    r = f(xi)                (additive source)
//   fisher:  r = y (1 - y)
//   burgers: r = (F_{i+1} - F_{i-1}) / (2h),  F = y^2 / 2   (conservative form)
// sampled at `times` on the full grid including the boundary columns.
inline SolutionSurface solve_deterministic(const DriftModel& model, double nu,
                                           const std::function<double(double)>& X0, const FDGrid& grid,
                                           const std::vector<double>& times) {
  if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
  if (grid.P < 3) throw ConfigError("finite-difference grid needs at least 3 interior points");
  if (!(grid.dt > 0.0)) throw ConfigError("finite-difference step must be positive");
  detail::validate_times(times);
  const double h = grid.h();
  if (grid.scheme == FDScheme::ExplicitRK4 && nu * grid.dt / (h * h) > 0.25) {
    throw ConfigError("explicit scheme violates the CFL bound nu dt / h^2 <= 0.25");
  }

  const int P = grid.P;
  Eigen::VectorXd y(P), f(P);
  for (int i = 0; i < P; ++i) {
    const double xi = (i + 1) * h;
    y(i) = X0(xi);
    f(i) = model.kind == DriftKind::Heat && model.forcing ? model.forcing(xi) : 0.0;
  }

  auto laplacian = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd L(P);
    for (int i = 0; i < P; ++i) {
      const double left = i > 0 ? v(i - 1) : 0.0;
      const double right = i + 1 < P ? v(i + 1) : 0.0;
      L(i) = (left - 2.0 * v(i) + right) / (h * h);
    }
    return L;
  };
  auto reaction = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(P);
    switch (model.kind) {
      case DriftKind::Heat:
        r = f;
        break;
      case DriftKind::Fisher:
        for (int i = 0; i < P; ++i) r(i) = v(i) * (1.0 - v(i));
        break;
      case DriftKind::Burgers:
        for (int i = 0; i < P; ++i) {
          const double Fl = i > 0 ? 0.5 * v(i - 1) * v(i - 1) : 0.0;
          const double Fr = i + 1 < P ? 0.5 * v(i + 1) * v(i + 1) : 0.0;
          r(i) = (Fr - Fl) / (2.0 * h);
        }
        break;
    }
    return r;
  };

  SolutionSurface s;
  s.times = times;
  s.points.resize(static_cast<std::size_t>(P) + 2);
  for (int i = 0; i <= P + 1; ++i) s.points[static_cast<std::size_t>(i)] = i * h;
  s.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()), P + 2);
  s.meta.model = model.kind == DriftKind::Heat    ? "heat"
                 : model.kind == DriftKind::Fisher ? "fisher"
                                                   : "burgers";
  s.meta.nu = nu;
  s.meta.functional = "field";

  auto emit = [&](std::size_t row) {
    for (int i = 0; i < P; ++i) s.values(static_cast<Eigen::Index>(row), i + 1) = y(i);
  };
  emit(0);

  std::vector<double> cp, dp;
  Eigen::VectorXd rhs(P), ynew(P);
  for (std::size_t seg = 1; seg < times.size(); ++seg) {
    const double span = times[seg] - times[seg - 1];
    if (span <= 0) {
      emit(seg);
      continue;
    }
    const auto steps = static_cast<long>(std::ceil(span / grid.dt - 1e-12));
    const double dt = span / static_cast<double>(std::max<long>(steps, 1));
    const double a = 0.5 * nu * dt / (h * h);
    for (long st = 0; st < std::max<long>(steps, 1); ++st) {
      if (grid.scheme == FDScheme::CrankNicolsonIMEX) {
        // (I + a T) y = y + a h^2 L y with T the unscaled stencil.
        rhs = y + (a * (h * h)) * laplacian(y);
        rhs += dt * reaction(y);
        detail::thomas_cn_solve(a, rhs, ynew, cp, dp);
        y.swap(ynew);
      } else {
        auto rate = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
          return nu * laplacian(v) + reaction(v);
        };
        const Eigen::VectorXd k1 = rate(y);
        const Eigen::VectorXd k2 = rate(y + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = rate(y + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = rate(y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    if (!y.allFinite()) {
      throw NumericalError("finite-difference state became non-finite near t = " +
                           std::to_string(times[seg]));
    }
    emit(seg);
  }
  return s;
}

struct CompareReport {
  double l2 = 0.0;   // relative space-time L2 error, candidate vs reference
  double sup = 0.0;  // absolute sup-norm error
  std::vector<std::pair<double, double>> per_time;  // cumulative error / total reference norm
};

namespace detail {

inline double interp1(const std::vector<double>& xs, const Eigen::VectorXd& vals, double x) {
  if (xs.size() == 1) return vals(0);
  auto hi = std::lower_bound(xs.begin(), xs.end(), x);
  if (hi == xs.begin()) return vals(0);
  if (hi == xs.end()) return vals(static_cast<Eigen::Index>(xs.size() - 1));
  const auto i1 = static_cast<Eigen::Index>(hi - xs.begin());
  const auto i0 = i1 - 1;
  const double x0 = xs[static_cast<std::size_t>(i0)], x1 = xs[static_cast<std::size_t>(i1)];
  const double w = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
  return (1.0 - w) * vals(i0) + w * vals(i1);
}

// Bilinear sample of a surface at (t, x).
inline double surface_at(const SolutionSurface& s, double t, double x) {
  auto hi = std::lower_bound(s.times.begin(), s.times.end(), t);
  Eigen::Index r0, r1;
  double w;
  if (hi == s.times.begin()) {
    r0 = r1 = 0;
    w = 0.0;
  } else if (hi == s.times.end()) {
    r0 = r1 = static_cast<Eigen::Index>(s.times.size() - 1);
    w = 0.0;
  } else {
    r1 = static_cast<Eigen::Index>(hi - s.times.begin());
    r0 = r1 - 1;
    const double t0 = s.times[static_cast<std::size_t>(r0)], t1 = s.times[static_cast<std::size_t>(r1)];
    w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  }
  const double v0 = interp1(s.points, s.values.row(r0).transpose(), x);
  const double v1 = interp1(s.points, s.values.row(r1).transpose(), x);
  return (1.0 - w) * v0 + w * v1;
}

inline std::vector<double> trapezoid_weights(const std::vector<double>& xs) {
  std::vector<double> w(xs.size(), 0.0);
  if (xs.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double d = 0.5 * (xs[i + 1] - xs[i]);
    w[i] += d;
    w[i + 1] += d;
  }
  return w;
}

inline std::vector<double> merged_axis(const std::vector<double>& a, const std::vector<double>& b,
                                       double lo, double hi) {
  std::set<double> s;
  for (double v : a) {
    if (v >= lo - 1e-12 && v <= hi + 1e-12) s.insert(std::clamp(v, lo, hi));
  }
  for (double v : b) {
    if (v >= lo - 1e-12 && v <= hi + 1e-12) s.insert(std::clamp(v, lo, hi));
  }
  return {s.begin(), s.end()};
}

}  // namespace detail

// Error report of candidate A against reference B on the common refinement of
// their grids: relative space-time L2, absolute sup, and the cumulative error
// profile t_j -> ||A - B||_{L2(t <= t_j)} / ||B||_{L2(all)} whose final entry
// equals l2.
inline CompareReport compare(const SolutionSurface& A, const SolutionSurface& B) {
  if (A.times.empty() || B.times.empty() || A.points.empty() || B.points.empty()) {
    throw ConfigError("cannot compare empty surfaces");
  }
  const double t_lo = std::max(A.times.front(), B.times.front());
  const double t_hi = std::min(A.times.back(), B.times.back());
  if (t_lo > t_hi + 1e-12) throw ConfigError("surfaces cover disjoint time ranges");
  const double x_lo = std::max(A.points.front(), B.points.front());
  const double x_hi = std::min(A.points.back(), B.points.back());
  if (x_lo > x_hi + 1e-12) throw ConfigError("surfaces cover disjoint spatial ranges");

  const std::vector<double> times = detail::merged_axis(A.times, B.times, t_lo, t_hi);
  const std::vector<double> points = detail::merged_axis(A.points, B.points, x_lo, x_hi);
  const std::vector<double> wt = detail::trapezoid_weights(times);
  const std::vector<double> wx = detail::trapezoid_weights(points);

  double den2 = 0.0;
  std::vector<double> slice(times.size(), 0.0);
  CompareReport rep;
  for (std::size_t it = 0; it < times.size(); ++it) {
    double acc = 0.0;
    for (std::size_t ix = 0; ix < points.size(); ++ix) {
      const double va = detail::surface_at(A, times[it], points[ix]);
      const double vb = detail::surface_at(B, times[it], points[ix]);
      const double d = va - vb;
      acc += wx[ix] * d * d;
      den2 += wt[it] * wx[ix] * vb * vb;
      rep.sup = std::max(rep.sup, std::abs(d));
    }
    slice[it] = wt[it] * acc;
  }
  const double den = std::sqrt(den2);
  double cum = 0.0;
  for (std::size_t it = 0; it < times.size(); ++it) {
    cum += slice[it];
    const double num = std::sqrt(cum);
    rep.per_time.emplace_back(times[it], den > 0 ? num / den
                                                 : (num > 0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  rep.l2 = rep.per_time.empty() ? 0.0 : rep.per_time.back().second;
  return rep;
}

}  // namespace wchaos
