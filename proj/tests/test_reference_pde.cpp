// Finite-difference baseline solver and the surface comparison metrics.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "wchaos/reference_pde.hpp"

using namespace wchaos;

namespace {

constexpr double kPi = std::numbers::pi;

DriftModel plain(DriftKind kind) {
  DriftModel m;
  m.kind = kind;
  return m;
}

std::vector<double> uniform_times(double t_final, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_final * i / (n - 1);
  return t;
}

SolutionSurface synthetic_surface(const std::function<double(double, double)>& f,
                                  const std::vector<double>& times, const std::vector<double>& points) {
  SolutionSurface s;
  s.times = times;
  s.points = points;
  s.values.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t it = 0; it < times.size(); ++it) {
    for (std::size_t ix = 0; ix < points.size(); ++ix) {
      s.values(static_cast<Eigen::Index>(it), static_cast<Eigen::Index>(ix)) = f(times[it], points[ix]);
    }
  }
  return s;
}

// Sup error of a sampled heat-decay run against exp(-nu pi^2 t) sin(pi x).
double decay_error(const SolutionSurface& s, double nu) {
  double worst = 0.0;
  for (std::size_t it = 0; it < s.times.size(); ++it) {
    for (std::size_t ix = 0; ix < s.points.size(); ++ix) {
      const double exact = std::exp(-nu * kPi * kPi * s.times[it]) * std::sin(kPi * s.points[ix]);
      worst = std::max(worst, std::abs(s.values(static_cast<Eigen::Index>(it),
                                                static_cast<Eigen::Index>(ix)) -
                                       exact));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("heat decay matches the separated analytic mode", "[reference]") {
  const double nu = 0.1;
  const auto X0 = [](double xi) { return std::sin(kPi * xi); };
  const auto times = uniform_times(1.0, 5);

  FDGrid cn;
  cn.P = 99;
  cn.dt = 1e-3;
  cn.scheme = FDScheme::CrankNicolsonIMEX;
  REQUIRE(decay_error(solve_deterministic(plain(DriftKind::Heat), nu, X0, cn, times), nu) <= 2e-4);

  FDGrid rk;
  rk.P = 99;
  rk.dt = 2e-4;  // nu dt / h^2 = 0.2, inside the CFL bound
  rk.scheme = FDScheme::ExplicitRK4;
  REQUIRE(decay_error(solve_deterministic(plain(DriftKind::Heat), nu, X0, rk, times), nu) <= 2e-4);
}

TEST_CASE("explicit scheme enforces the parabolic CFL bound", "[reference]") {
  FDGrid rk;
  rk.P = 99;
  rk.dt = 1e-3;  // nu dt / h^2 = 1.0
  rk.scheme = FDScheme::ExplicitRK4;
  const auto X0 = [](double xi) { return std::sin(kPi * xi); };
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Heat), 0.1, X0, rk, {0.0, 1.0}), ConfigError);
  rk.dt = 2.5e-4;  // exactly on the bound is allowed
  REQUIRE_NOTHROW(solve_deterministic(plain(DriftKind::Heat), 0.1, X0, rk, {0.0, 0.01}));
}

TEST_CASE("input validation of the finite-difference run", "[reference]") {
  const auto X0 = [](double xi) { return std::sin(kPi * xi); };
  FDGrid g;
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Heat), 0.0, X0, g, {0.0, 1.0}), ConfigError);
  g.P = 2;
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Heat), 0.1, X0, g, {0.0, 1.0}), ConfigError);
  g.P = 99;
  g.dt = 0.0;
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Heat), 0.1, X0, g, {0.0, 1.0}), ConfigError);
  g.dt = 1e-3;
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Heat), 0.1, X0, g, {0.5, 1.0}), ConfigError);
}

TEST_CASE("spatial error contracts at second order under grid refinement", "[reference]") {
  const double nu = 0.1;
  const auto X0 = [](double xi) { return std::sin(kPi * xi); };
  const std::vector<double> times{0.0, 0.25};
  auto error_at = [&](int P) {
    FDGrid g;
    g.P = P;
    g.dt = 1e-4;  // temporal error negligible against the spatial one
    g.scheme = FDScheme::CrankNicolsonIMEX;
    const auto s = solve_deterministic(plain(DriftKind::Heat), nu, X0, g, times);
    double worst = 0.0;
    for (std::size_t ix = 0; ix < s.points.size(); ++ix) {
      const double exact = std::exp(-nu * kPi * kPi * 0.25) * std::sin(kPi * s.points[ix]);
      worst = std::max(worst, std::abs(s.values(1, static_cast<Eigen::Index>(ix)) - exact));
    }
    return worst;
  };
  const double e1 = error_at(24);   // h = 1/25
  const double e2 = error_at(49);   // h = 1/50
  const double e3 = error_at(99);   // h = 1/100
  REQUIRE(e1 / e2 >= 3.0);
  REQUIRE(e1 / e2 <= 5.0);
  REQUIRE(e2 / e3 >= 3.0);
  REQUIRE(e2 / e3 <= 5.0);
}

TEST_CASE("forced heat settles on the discrete boundary-value solution", "[reference]") {
  const double nu = 0.1;
  DriftModel model = plain(DriftKind::Heat);
  model.forcing = [](double xi) { return xi * xi * xi; };
  FDGrid g;
  g.P = 99;
  g.dt = 1e-3;
  g.scheme = FDScheme::CrankNicolsonIMEX;
  // By t = 16 the slowest transient carries exp(-nu pi^2 16) ~ 1.4e-7.
  const auto s = solve_deterministic(model, nu, [](double) { return 0.0; }, g, {0.0, 16.0});

  // Independent oracle: the same Dirichlet stencil as a linear system,
  // nu T y / h^2 = -f  =>  (-T) y = (h^2/nu) f.
  const int P = g.P;
  const double h = g.h();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
  Eigen::VectorXd rhs(P);
  for (int i = 0; i < P; ++i) {
    A(i, i) = 2.0;
    if (i > 0) A(i, i - 1) = -1.0;
    if (i + 1 < P) A(i, i + 1) = -1.0;
    const double xi = (i + 1) * h;
    rhs(i) = h * h / nu * (xi * xi * xi);
  }
  const Eigen::VectorXd steady = A.partialPivLu().solve(rhs);
  for (int i = 0; i < P; ++i) {
    REQUIRE_THAT(s.values(1, i + 1), Catch::Matchers::WithinAbs(steady(i), 1e-6));
  }
}

TEST_CASE("logistic reaction keeps the state inside the invariant band", "[reference]") {
  const auto X0 = [](double xi) {
    const double c = std::cosh(5.0 * (xi - 0.5));
    return 1.0 / (c * c);
  };
  FDGrid g;
  g.P = 99;
  g.dt = 1e-3;
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto s = solve_deterministic(plain(DriftKind::Fisher), 0.1, X0, g, times);
  REQUIRE(s.values.minCoeff() >= -1e-9);
  REQUIRE(s.values.maxCoeff() <= 1.02);
  // At the saturated crest the reaction y(1-y) vanishes while diffusion pulls
  // the peak down, so the midpoint decays monotonically from 1.
  const auto mid = static_cast<Eigen::Index>((g.P + 1) / 2);
  REQUIRE(s.values(0, mid) > s.values(1, mid));
  REQUIRE(s.values(1, mid) > s.values(2, mid));
  REQUIRE(s.values(2, mid) > s.values(3, mid));
  REQUIRE(s.values(3, mid) > 0.05);
  // Comparison principle: the nonnegative reaction keeps the logistic state
  // above the pure-diffusion solution of the same initial profile.
  const auto d = solve_deterministic(plain(DriftKind::Heat), 0.1, X0, g, times);
  REQUIRE((s.values - d.values).minCoeff() >= -1e-9);
  REQUIRE(s.values(3, mid) > d.values(3, mid) + 0.1);
}

TEST_CASE("advection flux balances the mass budget step by step", "[reference]") {
  // For the conservative quadratic flux the semi-implicit step satisfies an
  // exact discrete identity: with m = h sum_i y_i,
  //   m^{n+1} - m^n = dt [ -nu (ybar_1 + ybar_P)/h + (F^n_P - F^n_1)/2 ],
  // where ybar is the step average and F = y^2/2 from the explicit state.
  const double nu = 0.1;
  FDGrid g;
  g.P = 49;
  g.dt = 1e-3;
  g.scheme = FDScheme::CrankNicolsonIMEX;
  const auto X0 = [](double xi) { return std::sin(kPi * xi); };
  const auto times = uniform_times(0.05, 51);  // one solver step per sample
  const auto s = solve_deterministic(plain(DriftKind::Burgers), nu, X0, g, times);

  const int P = g.P;
  const double h = g.h();
  auto mass = [&](std::size_t row) {
    double m = 0.0;
    for (int i = 1; i <= P; ++i) m += s.values(static_cast<Eigen::Index>(row), i);
    return h * m;
  };
  for (std::size_t n = 0; n + 1 < times.size(); ++n) {
    const double dt = times[n + 1] - times[n];
    const double y1n = s.values(static_cast<Eigen::Index>(n), 1);
    const double yPn = s.values(static_cast<Eigen::Index>(n), P);
    const double y1p = s.values(static_cast<Eigen::Index>(n + 1), 1);
    const double yPp = s.values(static_cast<Eigen::Index>(n + 1), P);
    const double flux = 0.5 * (0.5 * yPn * yPn - 0.5 * y1n * y1n);
    const double leak = -nu * (0.5 * (y1n + y1p) + 0.5 * (yPn + yPp)) / h;
    const double predicted = dt * (leak + flux);
    REQUIRE_THAT(mass(n + 1) - mass(n), Catch::Matchers::WithinAbs(predicted, 1e-12));
  }
}

TEST_CASE("diverging advection run raises a numerical error", "[reference]") {
  FDGrid g;
  g.P = 49;
  g.dt = 0.05;  // explicit advection far outside its stability region
  g.scheme = FDScheme::CrankNicolsonIMEX;
  const auto X0 = [](double xi) { return 50.0 * std::sin(kPi * xi); };
  REQUIRE_THROWS_AS(solve_deterministic(plain(DriftKind::Burgers), 0.1, X0, g, {0.0, 1.0}),
                    NumericalError);
}

TEST_CASE("comparison of identical surfaces is exactly zero", "[comparison]") {
  const auto s = synthetic_surface(
      [](double t, double x) { return (2.0 + std::sin(kPi * x)) * std::exp(-t); },
      uniform_times(1.0, 11), uniform_times(1.0, 21));
  const auto rep = compare(s, s);
  REQUIRE(rep.l2 == 0.0);
  REQUIRE(rep.sup == 0.0);
  for (const auto& [t, v] : rep.per_time) REQUIRE(v == 0.0);
}

TEST_CASE("uniform relative offset is recovered exactly", "[comparison]") {
  const auto f = [](double t, double x) { return 2.0 + std::sin(kPi * x) * std::exp(-t); };
  const auto times = uniform_times(1.0, 11);
  const auto points = uniform_times(1.0, 21);
  const auto B = synthetic_surface(f, times, points);
  auto A = B;
  A.values *= 1.1;
  const auto rep = compare(A, B);
  REQUIRE_THAT(rep.l2, Catch::Matchers::WithinAbs(0.1, 1e-12));
  REQUIRE_THAT(rep.sup, Catch::Matchers::WithinAbs(0.1 * B.values.cwiseAbs().maxCoeff(), 1e-12));
  // Cumulative error profile: strictly increasing, final entry equals l2.
  for (std::size_t i = 1; i < rep.per_time.size(); ++i) {
    REQUIRE(rep.per_time[i].second > rep.per_time[i - 1].second);
  }
  REQUIRE(rep.per_time.back().second == rep.l2);
}

TEST_CASE("comparison interpolates across mismatched grids", "[comparison]") {
  // Bilinear field: interpolation between the two samplings is exact.
  const auto f = [](double t, double x) { return (1.0 + t) * x; };
  const auto A = synthetic_surface(f, uniform_times(1.0, 5), uniform_times(1.0, 5));
  const auto B = synthetic_surface(f, uniform_times(1.0, 9), uniform_times(1.0, 17));
  const auto rep = compare(A, B);
  REQUIRE(rep.l2 <= 1e-13);
  REQUIRE(rep.sup <= 1e-13);
}

TEST_CASE("comparison rejects disjoint domains", "[comparison]") {
  const auto f = [](double, double) { return 1.0; };
  const auto A = synthetic_surface(f, {0.0, 1.0}, uniform_times(1.0, 5));
  SolutionSurface late = synthetic_surface(f, {2.0, 3.0}, uniform_times(1.0, 5));
  REQUIRE_THROWS_AS(compare(A, late), ConfigError);

  SolutionSurface left = synthetic_surface(f, {0.0, 1.0}, {0.0, 0.2, 0.4});
  SolutionSurface right = synthetic_surface(f, {0.0, 1.0}, {0.6, 0.8, 1.0});
  REQUIRE_THROWS_AS(compare(left, right), ConfigError);

  SolutionSurface empty;
  REQUIRE_THROWS_AS(compare(A, empty), ConfigError);
}

TEST_CASE("comparison tracks where the error accumulates in time", "[comparison]") {
  // Error mass only in the second half of the window: the cumulative profile
  // must stay at zero through the first half and then grow.
  const auto times = uniform_times(1.0, 21);
  const auto points = uniform_times(1.0, 11);
  const auto B = synthetic_surface([](double, double) { return 1.0; }, times, points);
  auto A = B;
  for (std::size_t it = 0; it < times.size(); ++it) {
    if (times[it] > 0.5 + 1e-12) {
      A.values.row(static_cast<Eigen::Index>(it)).array() += 0.2;
    }
  }
  const auto rep = compare(A, B);
  double at_half = 0.0, at_end = 0.0;
  for (const auto& [t, v] : rep.per_time) {
    if (t <= 0.5 + 1e-12) at_half = v;
    at_end = v;
  }
  REQUIRE(at_half <= 1e-12);
  REQUIRE(at_end > 0.05);
  REQUIRE_THAT(rep.sup, Catch::Matchers::WithinAbs(0.2, 1e-12));
}