#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "wchaos/errors.hpp"

namespace wchaos {

// Orthonormal probabilists' Hermite polynomials P_k w.r.t. the standard
// Gaussian measure: integral P_i P_j dmu = delta_ij, three-term recurrence
//   sqrt(k+1) P_{k+1}(x) = x P_k(x) - sqrt(k) P_{k-1}(x),
// P_0 = 1, P_1 = x.  Evaluation runs the recurrence forward (stable for the
// degrees used here).
inline double hermite_eval(int k, double x) {
  if (k < 0) throw ConfigError("hermite degree must be nonnegative");
  if (k == 0) return 1.0;
  double pm = 1.0;  // P_0
  double p = x;     // P_1
  for (int j = 1; j < k; ++j) {
    const double pn = (x * p - std::sqrt(static_cast<double>(j)) * pm) /
                      std::sqrt(static_cast<double>(j + 1));
    pm = p;
    p = pn;
  }
  return p;
}

// d/dx P_k = sqrt(k) P_{k-1}.
inline double hermite_derivative(int k, double x) {
  if (k < 0) throw ConfigError("hermite degree must be nonnegative");
  if (k == 0) return 0.0;
  return std::sqrt(static_cast<double>(k)) * hermite_eval(k - 1, x);
}

// Quadrature rule: nodes and weights, with weights normalized to the measure
// they discretize (total mass 1 for both rules below).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the recurrence,
// weights are mu_0 times the squared first components of the eigenvectors.
inline QuadratureRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int Q = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(Q, Q);
  for (int i = 0; i + 1 < Q; ++i) {
    J(i, i + 1) = offdiag[static_cast<std::size_t>(i)];
    J(i + 1, i) = offdiag[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw NumericalError("quadrature eigen solve failed");
  QuadratureRule rule;
  rule.order = Q;
  rule.nodes.resize(static_cast<std::size_t>(Q));
  rule.weights.resize(static_cast<std::size_t>(Q));
  for (int i = 0; i < Q; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

// One forward pass of the orthonormal Hermite recurrence at x: returns
// P_Q(x), P_{Q-1}(x), and the Christoffel sum over degrees below Q.
struct HermiteLadder {
  double p_q;
  double p_qm1;
  double christoffel;  // sum_{k=0}^{Q-1} P_k(x)^2
};

inline HermiteLadder hermite_ladder(int Q, double x) {
  double pm = 0.0;  // P_{-1}
  double p = 1.0;   // P_0
  double sum = 0.0;
  for (int k = 0; k < Q; ++k) {
    sum += p * p;
    const double pn = (x * p - std::sqrt(static_cast<double>(k)) * pm) /
                      std::sqrt(static_cast<double>(k + 1));
    pm = p;
    p = pn;
  }
  return {p, pm, sum};
}

}  // namespace detail

// Gauss-Hermite rule for the standard Gaussian weight (weights sum to 1).
// Nodes start from the Jacobi-matrix eigenvalues and are polished by Newton
// iteration on P_Q; weights come from the Christoffel identity
//   w_i = 1 / sum_{k<Q} P_k(x_i)^2,
// which stays relatively accurate even for the exponentially small tail
// weights (squared-eigenvector weights only carry absolute accuracy, which
// ruins high-degree integrands).  Node/weight symmetry about 0 is enforced
// exactly.  Exact for polynomials of degree <= 2Q - 1.
inline QuadratureRule gauss_hermite(int Q) {
  if (Q < 1) throw ConfigError("quadrature order must be at least 1");
  if (Q > 200) throw ConfigError("quadrature order capped at 200 for stability");
  std::vector<double> off(static_cast<std::size_t>(Q - 1));
  for (int k = 1; k < Q; ++k) off[static_cast<std::size_t>(k - 1)] = std::sqrt(static_cast<double>(k));
  QuadratureRule rule = detail::golub_welsch(off, 1.0);
  // Newton polish: x -= P_Q(x) / (sqrt(Q) P_{Q-1}(x)); the eigenvalues are
  // within ~1e-13 of the roots, so a couple of steps reach full precision.
  for (double& xn : rule.nodes) {
    for (int it = 0; it < 4; ++it) {
      const detail::HermiteLadder lad = detail::hermite_ladder(Q, xn);
      const double dx = lad.p_q / (std::sqrt(static_cast<double>(Q)) * lad.p_qm1);
      xn -= dx;
      if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(xn))) break;
    }
  }
  // Symmetrize: eigenvalues come back sorted, pair i with Q-1-i.
  for (int i = 0; i < Q / 2; ++i) {
    const int j = Q - 1 - i;
    const double x = 0.5 * (rule.nodes[static_cast<std::size_t>(j)] - rule.nodes[static_cast<std::size_t>(i)]);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(j)] = x;
  }
  if (Q % 2 == 1) rule.nodes[static_cast<std::size_t>(Q / 2)] = 0.0;
  for (int i = 0; i < Q; ++i) {
    rule.weights[static_cast<std::size_t>(i)] =
        1.0 / detail::hermite_ladder(Q, rule.nodes[static_cast<std::size_t>(i)]).christoffel;
  }
  double sum = 0.0;
  for (double w : rule.weights) sum += w;
  for (double& w : rule.weights) w /= sum;
  return rule;
}

// Gauss-Legendre rule mapped to [0, 1] with the Lebesgue measure normalized
// off the standard [-1, 1] rule (weights sum to 1 = length of the interval).
inline QuadratureRule gauss_legendre_01(int Q) {
  if (Q < 1) throw ConfigError("quadrature order must be at least 1");
  if (Q > 200) throw ConfigError("quadrature order capped at 200 for stability");
  std::vector<double> off(static_cast<std::size_t>(Q - 1));
  for (int k = 1; k < Q; ++k) {
    off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  QuadratureRule rule = detail::golub_welsch(off, 2.0);
  for (int i = 0; i < Q; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
    rule.weights[static_cast<std::size_t>(i)] *= 0.5;
  }
  return rule;
}

// One-dimensional Gaussian pairing integral P_i(x) P_j(x) x^p dmu(x), the
// building block every drift coefficient factorizes into.  Requires the rule
// to be exact for the integrand: 2Q - 1 >= i + j + p.
inline double gaussian_pairing(int i, int j, int p, const QuadratureRule& rule) {
  if (i < 0 || j < 0 || p < 0) throw ConfigError("gaussian pairing orders must be nonnegative");
  if (2 * rule.order - 1 < i + j + p) {
    throw NumericalError("quadrature order " + std::to_string(rule.order) +
                         " insufficient for pairing degree " + std::to_string(i + j + p));
  }
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q];
    double mono = 1.0;
    for (int r = 0; r < p; ++r) mono *= x;
    acc += rule.weights[q] * hermite_eval(i, x) * hermite_eval(j, x) * mono;
  }
  return acc;
}

// Closed forms of the same pairings for p <= 2, from the recurrence:
//   p = 0: delta_ij
//   p = 1: sqrt(max(i, j)) when |i - j| = 1, else 0
//   p = 2: 2i + 1 when i = j; sqrt((m+1)(m+2)), m = min(i, j), when |i-j| = 2.
inline double gaussian_pairing_closed(int i, int j, int p) {
  if (i < 0 || j < 0) throw ConfigError("gaussian pairing orders must be nonnegative");
  switch (p) {
    case 0:
      return i == j ? 1.0 : 0.0;
    case 1:
      return std::abs(i - j) == 1 ? std::sqrt(static_cast<double>(std::max(i, j))) : 0.0;
    case 2: {
      if (i == j) return 2.0 * i + 1.0;
      if (std::abs(i - j) == 2) {
        const int m = std::min(i, j);
        return std::sqrt(static_cast<double>((m + 1) * (m + 2)));
      }
      return 0.0;
    }
    default:
      throw ConfigError("closed-form pairing implemented for moment powers 0..2");
  }
}

}  // namespace wchaos
