#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "wchaos/errors.hpp"
#include "wchaos/hermite.hpp"

namespace wchaos {

// Dirichlet spectral data on (0, 1) for the operator A = nu * Laplacian with
// space-time white noise.  In the orthonormal sine basis
//   e_k(xi) = sqrt(2) sin(k pi xi),     k = 1, ..., M,
// the drift operator has -A e_k = lambda_A[k] e_k with lambda_A[k] = nu pi^2 k^2,
// the Gaussian invariant measure has covariance Lambda = (1/2)(-A)^{-1} with
// eigenvalues lambda_cov[k] = 1 / (2 nu pi^2 k^2), and the whitening weights
// are sigma[k] = lambda_cov[k]^{-1/2} = sqrt(2 nu) pi k.  Arrays are 0-based:
// entry k-1 belongs to mode k.
struct OperatorSpectrum {
  double nu = 0.0;
  int M = 0;
  std::vector<double> lambda_A;
  std::vector<double> lambda_cov;
  std::vector<double> sigma;
};

inline OperatorSpectrum make_spectrum(double nu, int M) {
  if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
  if (M < 1) throw ConfigError("spectrum needs at least one mode");
  OperatorSpectrum s;
  s.nu = nu;
  s.M = M;
  s.lambda_A.resize(static_cast<std::size_t>(M));
  s.lambda_cov.resize(static_cast<std::size_t>(M));
  s.sigma.resize(static_cast<std::size_t>(M));
  const double pi = std::numbers::pi;
  for (int k = 1; k <= M; ++k) {
    const double lam = nu * pi * pi * k * k;
    s.lambda_A[static_cast<std::size_t>(k - 1)] = lam;
    s.lambda_cov[static_cast<std::size_t>(k - 1)] = 1.0 / (2.0 * lam);
    s.sigma[static_cast<std::size_t>(k - 1)] = std::sqrt(2.0 * lam);
  }
  return s;
}

// e_k(xi) = sqrt(2) sin(k pi xi); orthonormal in L^2(0, 1).
inline double basis_eval(int k, double xi) {
  return std::numbers::sqrt2 * std::sin(k * std::numbers::pi * xi);
}

inline double basis_derivative(int k, double xi) {
  return std::numbers::sqrt2 * k * std::numbers::pi * std::cos(k * std::numbers::pi * xi);
}

// Truncated spectral representation of a field on (0, 1):
// x(xi) = sum_k beta[k-1] e_k(xi).
struct SpectralField {
  std::vector<double> beta;
  int truncation() const { return static_cast<int>(beta.size()); }
};

inline SpectralField zero_field(int K) {
  return SpectralField{std::vector<double>(static_cast<std::size_t>(K), 0.0)};
}

inline double field_eval(const SpectralField& f, double xi) {
  double acc = 0.0;
  for (int k = 1; k <= f.truncation(); ++k) {
    acc += f.beta[static_cast<std::size_t>(k - 1)] * basis_eval(k, xi);
  }
  return acc;
}

// L^2(0, 1) projection beta_k = <x, e_k> by composite Gauss-Legendre panels.
// The panel count scales with K so the oscillatory high modes stay resolved;
// for smooth x the truncated coefficients are exact to ~1e-12.
inline SpectralField project_field(const std::function<double(double)>& x, int K, int panels = 0) {
  if (K < 1) throw ConfigError("projection needs at least one mode");
  if (panels <= 0) panels = std::max(16, 2 * K);
  static thread_local QuadratureRule panel_rule = gauss_legendre_01(16);
  SpectralField f = zero_field(K);
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = p * h;
    for (std::size_t q = 0; q < panel_rule.nodes.size(); ++q) {
      const double xi = left + h * panel_rule.nodes[q];
      const double wx = h * panel_rule.weights[q] * x(xi);
      for (int k = 1; k <= K; ++k) {
        f.beta[static_cast<std::size_t>(k - 1)] += wx * basis_eval(k, xi);
      }
    }
  }
  return f;
}

// Stationary covariance kernel of the invariant measure,
//   C(xi, xi') = (1 / nu) * (1/2) * min(xi, xi') (1 - max(xi, xi')),
// i.e. half the Dirichlet Green function scaled by 1/nu.  Its Mercer series
// sum_k lambda_cov[k] e_k(xi) e_k(xi') converges to this closed form.
inline double covariance_kernel(double xi, double xip, double nu) {
  if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
  const double lo = std::min(xi, xip);
  const double hi = std::max(xi, xip);
  return 0.5 * lo * (1.0 - hi) / nu;
}

}  // namespace wchaos
