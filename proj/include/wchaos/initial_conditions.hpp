#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "wchaos/errors.hpp"
#include "wchaos/field_solution.hpp"
#include "wchaos/galerkin_ode.hpp"
#include "wchaos/hermite.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

enum class FunctionalKind { PointEvaluation, IntegralOverDomain };

struct Functional {
  FunctionalKind kind = FunctionalKind::PointEvaluation;
  double z = 0.5;  // evaluation abscissa, PointEvaluation only
};

// Initial chaos coefficients of the point functional u_0^z(g) = g(z):
// u_m(0) = integral x(z) H_m(x) dmu = sum_k (e_k(z)/sigma_k) delta_{m, unit_k}.
// The pairing factor integral P_{m_k} xi dmu vanishes unless m_k = 1, so both
// functionals populate first-order chaos only; the delta form is exact and is
// cross-checked against its quadrature realization in the tests.
inline Eigen::VectorXd point_functional_ic(const IndexSet& set, double z, const OperatorSpectrum& spectrum) {
  if (z < 0.0 || z > 1.0) throw ConfigError("point functional abscissa must lie in [0, 1]");
  if (set.M > spectrum.M) throw ConfigError("index set dimension exceeds available spectrum modes");
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(set.size());
  for (int i = 0; i < set.size(); ++i) {
    const MultiIndex& m = set[i];
    if (m.degree() != 1) continue;
    for (int k = 0; k < set.M; ++k) {
      if (m[k] == 1) {
        u0(i) = basis_eval(k + 1, z) / spectrum.sigma[static_cast<std::size_t>(k)];
        break;
      }
    }
  }
  return u0;
}

// The same coefficients realized through gaussian_pairing (the quadrature
// route of Eq. u_m(0) = sum_k (e_k(z)/sigma_k) int P_{m_k} xi dmu prod int
// P_{m_i} dmu), kept as the independent oracle for the delta form.
inline Eigen::VectorXd point_functional_ic_quadrature(const IndexSet& set, double z,
                                                      const OperatorSpectrum& spectrum,
                                                      const QuadratureRule& rule) {
  if (z < 0.0 || z > 1.0) throw ConfigError("point functional abscissa must lie in [0, 1]");
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(set.size());
  for (int i = 0; i < set.size(); ++i) {
    const MultiIndex& m = set[i];
    double acc = 0.0;
    for (int k = 0; k < set.M; ++k) {
      double prod = gaussian_pairing(m[k], 0, 1, rule);
      for (int j = 0; j < set.M && prod != 0.0; ++j) {
        if (j == k) continue;
        prod *= gaussian_pairing(m[j], 0, 0, rule);
      }
      acc += basis_eval(k + 1, z) / spectrum.sigma[static_cast<std::size_t>(k)] * prod;
    }
    u0(i) = acc;
  }
  return u0;
}

// Initial chaos coefficients of u_0(g) = integral_0^1 g: replace e_k(z) by
// integral_0^1 e_k = 2 sqrt2 / (k pi) for odd k, 0 for even k.
inline Eigen::VectorXd integral_functional_ic(const IndexSet& set, const OperatorSpectrum& spectrum) {
  if (set.M > spectrum.M) throw ConfigError("index set dimension exceeds available spectrum modes");
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(set.size());
  for (int i = 0; i < set.size(); ++i) {
    const MultiIndex& m = set[i];
    if (m.degree() != 1) continue;
    for (int k = 0; k < set.M; ++k) {
      if (m[k] == 1) {
        const int mode = k + 1;
        const double ek_mass =
            mode % 2 == 1 ? 2.0 * std::numbers::sqrt2 / (mode * std::numbers::pi) : 0.0;
        u0(i) = ek_mass / spectrum.sigma[static_cast<std::size_t>(k)];
        break;
      }
    }
  }
  return u0;
}

struct ConstantsResult {
  enum class Status { Exact, LeastSquares };
  Eigen::VectorXd constants;
  Status status = Status::Exact;
};

// Solve phi0 c = u0 for the eigen-solution constants.  Partial-pivot LU when
// the fundamental matrix is regular (residual <= 1e-10 relative); otherwise a
// rank-revealing least-squares fallback, which must itself reproduce u0 to
// 1e-8 relative or the system is declared unusable.
inline ConstantsResult fix_constants(const EigenSolution& eigen, const Eigen::VectorXd& u0) {
  if (eigen.phi0.rows() != u0.size() || eigen.phi0.cols() != u0.size()) {
    throw ConfigError("fundamental matrix shape does not match the initial vector");
  }
  const double scale = 1.0 + u0.norm();
  ConstantsResult out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(eigen.phi0);
  out.constants = lu.solve(u0);
  if (out.constants.allFinite() && (eigen.phi0 * out.constants - u0).norm() <= 1e-10 * scale) {
    out.status = ConstantsResult::Status::Exact;
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(eigen.phi0);
  out.constants = qr.solve(u0);
  const double resid = (eigen.phi0 * out.constants - u0).norm();
  if (!out.constants.allFinite() || resid > 1e-8 * scale) {
    throw NumericalError("fundamental matrix is rank-deficient beyond the least-squares tolerance");
  }
  out.status = ConstantsResult::Status::LeastSquares;
  return out;
}

// Collocation route for the constants: sample fields x_p, build
// A[p][i] = sum_j H_{n_j}(x_p) phi0[j][i], and fit A c = targets in the
// least-squares sense.  Requires at least as many samples as constants.
inline Eigen::VectorXd collocation_constants(const IndexSet& set, const EigenSolution& eigen,
                                             const std::vector<SpectralField>& samples,
                                             const Eigen::VectorXd& targets,
                                             const OperatorSpectrum& spectrum) {
  const auto dim = eigen.phi0.cols();
  if (eigen.phi0.rows() != set.size()) throw ConfigError("fundamental matrix does not match index set");
  if (static_cast<Eigen::Index>(samples.size()) != targets.size()) {
    throw ConfigError("one target value per sample field required");
  }
  if (static_cast<Eigen::Index>(samples.size()) < dim) {
    throw ConfigError("collocation needs at least as many samples as constants");
  }
  Eigen::MatrixXd H(static_cast<Eigen::Index>(samples.size()), set.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    for (int j = 0; j < set.size(); ++j) {
      H(static_cast<Eigen::Index>(p), j) = hermite_functional_eval(set[j], samples[p], spectrum);
    }
  }
  const Eigen::MatrixXd A = H * eigen.phi0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < dim) throw NumericalError("singular collocation sample matrix");
  Eigen::VectorXd c = qr.solve(targets);
  if (!c.allFinite()) throw NumericalError("collocation solve produced non-finite constants");
  return c;
}

}  // namespace wchaos
