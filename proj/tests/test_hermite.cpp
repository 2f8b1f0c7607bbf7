#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "wchaos/errors.hpp"
#include "wchaos/hermite.hpp"

using namespace wchaos;

TEST_CASE("orthonormal polynomial values", "[hermite]") {
  CHECK(hermite_eval(0, 1.7) == 1.0);
  CHECK(hermite_eval(1, 1.7) == Catch::Approx(1.7).epsilon(1e-15));
  // P_2(x) = (x^2 - 1)/sqrt(2), so P_2(0) = -1/sqrt(2).
  CHECK(hermite_eval(2, 0.0) == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(hermite_eval(3, 0.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("three-term recurrence holds to machine precision", "[hermite]") {
  for (int k = 1; k <= 30; ++k) {
    for (double x : {-3.2, -1.0, 0.0, 0.5, 2.8}) {
      const double lhs = std::sqrt(k + 1.0) * hermite_eval(k + 1, x);
      const double rhs =
          x * hermite_eval(k, x) - std::sqrt(static_cast<double>(k)) * hermite_eval(k - 1, x);
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("derivative identity P'_k = sqrt(k) P_{k-1}", "[hermite]") {
  const double h = 1e-6;
  for (int k = 0; k <= 12; ++k) {
    for (double x : {-2.0, 0.0, 0.9, 2.4}) {
      const double fd = (hermite_eval(k, x + h) - hermite_eval(k, x - h)) / (2.0 * h);
      CHECK(hermite_derivative(k, x) == Catch::Approx(fd).margin(1e-6 * (1.0 + std::abs(fd))));
      if (k > 0) {
        CHECK(hermite_derivative(k, x) ==
              Catch::Approx(std::sqrt(static_cast<double>(k)) * hermite_eval(k - 1, x))
                  .epsilon(1e-14)
                  .margin(1e-14));
      }
    }
  }
  CHECK(hermite_derivative(0, 1.3) == 0.0);
}

TEST_CASE("Gauss-Hermite rule integrates the Gaussian measure", "[hermite]") {
  const QuadratureRule rule = gauss_hermite(64);
  REQUIRE(rule.nodes.size() == 64);
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  CHECK(total == Catch::Approx(1.0).epsilon(1e-13));
  // Symmetry of nodes and weights about zero.
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const std::size_t j = rule.nodes.size() - 1 - i;
    CHECK(rule.nodes[i] == Catch::Approx(-rule.nodes[j]).margin(1e-13));
    CHECK(rule.weights[i] == Catch::Approx(rule.weights[j]).epsilon(1e-12));
  }
  // Gaussian moments: E[x^2] = 1, E[x^4] = 3, odd moments vanish.
  double m2 = 0, m3 = 0, m4 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m2 += w * x * x;
    m3 += w * x * x * x;
    m4 += w * x * x * x * x;
  }
  CHECK(m2 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(m3 == Catch::Approx(0.0).margin(1e-12));
  CHECK(m4 == Catch::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("orthonormality under the quadrature measure", "[hermite]") {
  const QuadratureRule rule = gauss_hermite(64);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = i; j <= 20; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        acc += rule.weights[q] * hermite_eval(i, rule.nodes[q]) * hermite_eval(j, rule.nodes[q]);
      }
      worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("Gauss-Legendre rule on the unit interval", "[hermite]") {
  const QuadratureRule rule = gauss_legendre_01(16);
  double total = 0, mean = 0, osc = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    CHECK(rule.nodes[i] > 0.0);
    CHECK(rule.nodes[i] < 1.0);
    total += rule.weights[i];
    mean += rule.weights[i] * rule.nodes[i];
    osc += rule.weights[i] * std::sin(M_PI * rule.nodes[i]);
  }
  CHECK(total == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(mean == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(osc == Catch::Approx(2.0 / M_PI).epsilon(1e-12));
}

TEST_CASE("quadrature order is validated and capped", "[hermite]") {
  CHECK_THROWS_AS(gauss_hermite(0), ConfigError);
  CHECK_THROWS_AS(gauss_hermite(201), ConfigError);
  CHECK_THROWS_AS(gauss_legendre_01(0), ConfigError);
  CHECK_NOTHROW(gauss_hermite(200));
}

TEST_CASE("pairing closed forms match quadrature", "[hermite]") {
  const QuadratureRule rule = gauss_hermite(40);
  for (int p = 0; p <= 2; ++p) {
    for (int i = 0; i <= 8; ++i) {
      for (int j = 0; j <= 8; ++j) {
        CHECK(gaussian_pairing(i, j, p, rule) ==
              Catch::Approx(gaussian_pairing_closed(i, j, p)).margin(1e-10));
      }
    }
  }
}

TEST_CASE("pairing identities", "[hermite]") {
  const QuadratureRule rule = gauss_hermite(32);
  // p = 0 is the Kronecker delta (orthonormality).
  CHECK(gaussian_pairing(4, 4, 0, rule) == Catch::Approx(1.0).margin(1e-12));
  CHECK(gaussian_pairing(4, 5, 0, rule) == Catch::Approx(0.0).margin(1e-12));
  // p = 1: E[x P_i P_j] = sqrt(max(i, j)) when |i - j| = 1.
  CHECK(gaussian_pairing(3, 4, 1, rule) == Catch::Approx(2.0).margin(1e-12));
  CHECK(gaussian_pairing(4, 3, 1, rule) == Catch::Approx(2.0).margin(1e-12));
  CHECK(gaussian_pairing(3, 3, 1, rule) == Catch::Approx(0.0).margin(1e-12));
  // p = 2 diagonal: E[x^2 P_i^2] = 2i + 1.
  CHECK(gaussian_pairing(3, 3, 2, rule) == Catch::Approx(7.0).margin(1e-11));
  // p = 2 off-diagonal |i-j| = 2: sqrt((m+1)(m+2)) with m = min(i, j).
  CHECK(gaussian_pairing(2, 4, 2, rule) == Catch::Approx(std::sqrt(12.0)).margin(1e-11));
}

TEST_CASE("pairing precondition rejects under-resolved rules", "[hermite]") {
  const QuadratureRule rule = gauss_hermite(4);  // exact only up to degree 7
  CHECK_THROWS_AS(gaussian_pairing(4, 4, 0, rule), NumericalError);
  CHECK_NOTHROW(gaussian_pairing(3, 3, 1, rule));
}
