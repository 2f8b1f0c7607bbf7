#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

// Truncated linear system du_m/dt = sum_n G[m][n] u_n with
// G[m][n] = -lambda_m delta_{mn} + C_{n,m}.  G is nonsymmetric in general.
struct GalerkinSystem {
  Eigen::MatrixXd matrix;
  IndexSet index_set;
  std::vector<double> lambda;  // OU eigenvalue per index
};

inline GalerkinSystem assemble_system(const CoefficientMatrix& coeffs, const OperatorSpectrum& spectrum) {
  const int dim = coeffs.set.size();
  if (coeffs.values.rows() != dim || coeffs.values.cols() != dim) {
    throw ConfigError("coefficient matrix shape does not match its index set");
  }
  if (coeffs.set.M > spectrum.M) {
    throw ConfigError("index set dimension exceeds available spectrum modes");
  }
  GalerkinSystem sys;
  sys.index_set = coeffs.set;
  sys.matrix = coeffs.values;
  sys.lambda.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    const double lam = ou_eigenvalue(coeffs.set[i], spectrum.lambda_A);
    sys.lambda[static_cast<std::size_t>(i)] = lam;
    sys.matrix(i, i) -= lam;
  }
  return sys;
}

// One real fundamental solution of u' = G u derived from the eigensystem.
//   Real:    Phi(t) = a e^{gamma t}
//   CosPair: Phi(t) = e^{gamma t} (a cos(mu t) - b sin(mu t))
//   SinPair: Phi(t) = e^{gamma t} (a sin(mu t) + b cos(mu t))
// where a + ib is the eigenvector of the eigenvalue gamma + i mu (mu > 0).
struct RealFundamental {
  enum class Kind { Real, CosPair, SinPair };
  Kind kind = Kind::Real;
  double gamma = 0.0;
  double mu = 0.0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

struct EigenSolution {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd constants;  // filled once the initial vector is known
  std::vector<RealFundamental> real_form;
  Eigen::MatrixXd phi0;       // column i = real_form[i] evaluated at t = 0
  double condition = 0.0;     // condition number of phi0
};

inline EigenSolution eigen_decompose(const GalerkinSystem& sys) {
  const Eigen::Index dim = sys.matrix.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(sys.matrix);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition did not converge");
  EigenSolution sol;
  sol.eigenvalues = es.eigenvalues();
  sol.eigenvectors = es.eigenvectors();
  const double scale = std::max(1.0, sol.eigenvalues.cwiseAbs().maxCoeff());
  const double imag_tol = 1e-10 * scale;
  const double pair_tol = 1e-8 * scale;
  std::vector<bool> used(static_cast<std::size_t>(dim), false);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    used[static_cast<std::size_t>(i)] = true;
    std::complex<double> eta = sol.eigenvalues(i);
    Eigen::VectorXcd v = sol.eigenvectors.col(i);
    bool real_branch = std::abs(eta.imag()) <= imag_tol;
    if (!real_branch) {
      Eigen::Index partner = -1;
      for (Eigen::Index j = i + 1; j < dim; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        if (std::abs(sol.eigenvalues(j) - std::conj(eta)) <= pair_tol) {
          partner = j;
          break;
        }
      }
      if (partner >= 0) {
        used[static_cast<std::size_t>(partner)] = true;
        if (eta.imag() < 0) {
          eta = std::conj(eta);
          v = v.conjugate();
        }
        RealFundamental fc;
        fc.kind = RealFundamental::Kind::CosPair;
        fc.gamma = eta.real();
        fc.mu = eta.imag();
        fc.a = v.real();
        fc.b = v.imag();
        RealFundamental fs = fc;
        fs.kind = RealFundamental::Kind::SinPair;
        sol.real_form.push_back(std::move(fc));
        sol.real_form.push_back(std::move(fs));
        continue;
      }
      // Unpaired complex eigenvalue (defective numerics): degrade to the real
      // part; the condition check on phi0 flags the loss downstream.
      real_branch = true;
    }
    if (real_branch) {
      // Rotate the arbitrary complex phase away so the vector is real.
      Eigen::Index p = 0;
      v.cwiseAbs().maxCoeff(&p);
      const double mag = std::abs(v(p));
      const std::complex<double> phase = mag > 0 ? v(p) / mag : std::complex<double>(1.0, 0.0);
      RealFundamental f;
      f.kind = RealFundamental::Kind::Real;
      f.gamma = eta.real();
      f.a = (v * std::conj(phase)).real();
      sol.real_form.push_back(std::move(f));
    }
  }
  sol.phi0.resize(dim, static_cast<Eigen::Index>(sol.real_form.size()));
  for (std::size_t c = 0; c < sol.real_form.size(); ++c) {
    const RealFundamental& f = sol.real_form[c];
    sol.phi0.col(static_cast<Eigen::Index>(c)) =
        f.kind == RealFundamental::Kind::SinPair ? f.b : f.a;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sol.phi0);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  sol.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  return sol;
}

// sum_i c_i Phi_i(t) for the real fundamental system.
inline Eigen::VectorXd real_form_eval(const EigenSolution& sol, const Eigen::VectorXd& c, double t) {
  if (c.size() != static_cast<Eigen::Index>(sol.real_form.size())) {
    throw ConfigError("constants length does not match the fundamental system");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(sol.phi0.rows());
  for (std::size_t i = 0; i < sol.real_form.size(); ++i) {
    const RealFundamental& f = sol.real_form[i];
    const double ci = c(static_cast<Eigen::Index>(i));
    if (ci == 0.0) continue;
    const double growth = std::exp(f.gamma * t);
    switch (f.kind) {
      case RealFundamental::Kind::Real:
        y += ci * growth * f.a;
        break;
      case RealFundamental::Kind::CosPair:
        y += ci * growth * (std::cos(f.mu * t) * f.a - std::sin(f.mu * t) * f.b);
        break;
      case RealFundamental::Kind::SinPair:
        y += ci * growth * (std::sin(f.mu * t) * f.a + std::cos(f.mu * t) * f.b);
        break;
    }
  }
  return y;
}

enum class TrajectorySource { Eigen, Rk4, EigenFallbackRk4 };

inline std::string to_string(TrajectorySource s) {
  switch (s) {
    case TrajectorySource::Eigen: return "eigen";
    case TrajectorySource::Rk4: return "rk4";
    default: return "eigen-fallback";
  }
}

struct ModeTrajectories {
  std::vector<double> times;
  Eigen::MatrixXd values;  // row per time, column per index
  TrajectorySource source = TrajectorySource::Eigen;
};

namespace detail {

inline void validate_times(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("at least one output time is required");
  if (std::abs(times.front()) > 1e-12) throw ConfigError("output times must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw ConfigError("output times must be sorted ascending");
  }
}

inline double min_positive_spacing(const std::vector<double>& times) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double d = times[i] - times[i - 1];
    if (d > 0) m = std::min(m, d);
  }
  return m;
}

}  // namespace detail

inline ModeTrajectories solve_rk4(const GalerkinSystem& sys, const Eigen::VectorXd& u0,
                                  const std::vector<double>& times, double dt) {
  if (u0.size() != sys.matrix.rows()) throw ConfigError("initial vector length does not match system");
  detail::validate_times(times);
  if (!(dt > 0.0)) throw ConfigError("rk4 step size must be positive");
  const double spacing = detail::min_positive_spacing(times);
  if (std::isfinite(spacing) && dt > spacing * (1.0 + 1e-12)) {
    throw ConfigError("rk4 step size must not exceed the smallest output spacing");
  }
  ModeTrajectories traj;
  traj.times = times;
  traj.source = TrajectorySource::Rk4;
  traj.values.resize(static_cast<Eigen::Index>(times.size()), u0.size());
  Eigen::VectorXd y = u0;
  traj.values.row(0) = y.transpose();
  const Eigen::MatrixXd& G = sys.matrix;
  for (std::size_t s = 1; s < times.size(); ++s) {
    const double span = times[s] - times[s - 1];
    if (span <= 0) {
      traj.values.row(static_cast<Eigen::Index>(s)) = y.transpose();
      continue;
    }
    const auto steps = static_cast<long>(std::ceil(span / dt - 1e-12));
    const double h = span / static_cast<double>(std::max<long>(steps, 1));
    for (long st = 0; st < std::max<long>(steps, 1); ++st) {
      const Eigen::VectorXd k1 = G * y;
      const Eigen::VectorXd k2 = G * (y + 0.5 * h * k1);
      const Eigen::VectorXd k3 = G * (y + 0.5 * h * k2);
      const Eigen::VectorXd k4 = G * (y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!y.allFinite()) {
      throw NumericalError("rk4 state became non-finite near t = " + std::to_string(times[s]) +
                           "; reduce the step size");
    }
    traj.values.row(static_cast<Eigen::Index>(s)) = y.transpose();
  }
  return traj;
}

// Primary solver: eigendecomposition with complex pairs mapped to the two
// real fundamental solutions, constants fixed from the fundamental matrix at
// t = 0.  A defective or ill-conditioned fundamental matrix (condition number
// above 1e12) falls back to RK4 and says so in the trajectory source.
inline ModeTrajectories solve_eigen(const GalerkinSystem& sys, const Eigen::VectorXd& u0,
                                    const std::vector<double>& times) {
  if (u0.size() != sys.matrix.rows()) throw ConfigError("initial vector length does not match system");
  detail::validate_times(times);
  constexpr double kConditionLimit = 1e12;

  auto fallback = [&]() {
    const double spacing = detail::min_positive_spacing(times);
    const double span = times.back() - times.front();
    double rho = sys.matrix.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm bound
    rho = std::max(rho, 1e-12);
    double dt = std::min(0.5 / rho, std::isfinite(spacing) ? spacing : span);
    if (span > 0) dt = std::min(dt, span);
    if (dt <= 0 || !std::isfinite(dt)) dt = 1e-3;
    ModeTrajectories t = solve_rk4(sys, u0, times, dt);
    t.source = TrajectorySource::EigenFallbackRk4;
    return t;
  };

  EigenSolution sol;
  try {
    sol = eigen_decompose(sys);
  } catch (const NumericalError&) {
    return fallback();
  }
  if (!std::isfinite(sol.condition) || sol.condition > kConditionLimit) return fallback();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sol.phi0);
  sol.constants = lu.solve(u0);
  const double resid = (sol.phi0 * sol.constants - u0).norm();
  if (!sol.constants.allFinite() || resid > 1e-8 * (1.0 + u0.norm())) return fallback();

  ModeTrajectories traj;
  traj.times = times;
  traj.source = TrajectorySource::Eigen;
  traj.values.resize(static_cast<Eigen::Index>(times.size()), u0.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    traj.values.row(static_cast<Eigen::Index>(s)) = real_form_eval(sol, sol.constants, times[s]).transpose();
  }
  if (!traj.values.allFinite()) return fallback();
  return traj;
}

}  // namespace wchaos
