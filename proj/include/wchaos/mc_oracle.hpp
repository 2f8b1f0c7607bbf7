#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/field_solution.hpp"
#include "wchaos/initial_conditions.hpp"
#include "wchaos/parallel.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {
namespace detail {

// SplitMix64: tiny, splittable, passes BigCrush for this use.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform in (0,1), never exactly 0 or 1.
  double u01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-path stream seed.  The nonlinear mix is essential: seeding SplitMix64
// with `seed + c * path` alone would make path p's stream a shifted copy of
// path p+1's (the generator itself walks by a fixed increment).
inline std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path) {
  return mix64(mix64(seed ^ 0x8BADF00D5EEDULL) + (path + 1) * 0x9E3779B97F4A7C15ULL);
}

// Box-Muller standard normals drawn strictly in sequence from one stream.
struct GaussianStream {
  SplitMix64 gen;
  bool has_spare = false;
  double spare = 0.0;
  explicit GaussianStream(std::uint64_t seed) : gen(seed) {}
  double next() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u1 = gen.u01();
    const double u2 = gen.u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace detail

// Direct path-sampling estimator configuration.  K spectral modes carry the
// truncated cylindrical noise; `dt` is the nominal Euler-Maruyama step.
struct McConfig {
  DriftKind kind = DriftKind::Heat;
  ForcingFunction forcing;    // heat source term (may be empty)
  double nu = 0.1;
  int K = 16;
  double dt = 1e-3;
  long paths = 10000;
  std::uint64_t seed = 12345;
  bool noise = true;          // test hook: false integrates the drift alone
  unsigned threads = 0;       // 0 = hardware default
};

namespace detail {

struct McWorkspace {
  OperatorSpectrum spec;
  Eigen::VectorXd forcing_k;      // <f, e_k>, heat only
  Eigen::MatrixXd basis_at;       // K x n_points, e_k(point_p)
  Eigen::VectorXd integral_e;     // ∫ e_k, integral functional
  // Quadratic drift quadrature grid (fisher / burgers).
  Eigen::MatrixXd S;              // K x G, e_k(xi_i)
  Eigen::MatrixXd D;              // K x G, e_k'(xi_i)
  double gw = 0.0;                // uniform interior trapezoid weight 1/(G+1)
};

inline McWorkspace make_mc_workspace(const McConfig& cfg, const Functional& functional,
                                     const std::vector<double>& out_points) {
  McWorkspace w;
  w.spec = make_spectrum(cfg.nu, cfg.K);
  const int K = cfg.K;
  if (cfg.kind == DriftKind::Heat) {
    w.forcing_k = Eigen::VectorXd::Zero(K);
    if (cfg.forcing) {
      for (int k = 1; k <= K; ++k) w.forcing_k(k - 1) = forcing_inner_product(cfg.forcing, k);
    }
  } else {
    const int G = std::max(64, 4 * K);
    w.S.resize(K, G);
    w.D.resize(K, G);
    w.gw = 1.0 / (G + 1);
    for (int k = 1; k <= K; ++k) {
      for (int i = 0; i < G; ++i) {
        const double xi = (i + 1) * w.gw;
        w.S(k - 1, i) = basis_eval(k, xi);
        w.D(k - 1, i) = basis_derivative(k, xi);
      }
    }
  }
  if (functional.kind == FunctionalKind::PointEvaluation) {
    w.basis_at.resize(K, static_cast<Eigen::Index>(out_points.size()));
    for (int k = 1; k <= K; ++k) {
      for (std::size_t p = 0; p < out_points.size(); ++p) {
        w.basis_at(k - 1, static_cast<Eigen::Index>(p)) = basis_eval(k, out_points[p]);
      }
    }
  } else {
    w.integral_e = Eigen::VectorXd::Zero(K);
    for (int k = 1; k <= K; ++k) {
      if (k % 2 == 1) w.integral_e(k - 1) = 2.0 * std::sqrt(2.0) / (k * M_PI);
    }
  }
  return w;
}

// Drift coefficients <B(x), e_k> for the current mode vector.
inline void mc_drift(const McConfig& cfg, const McWorkspace& w, const Eigen::VectorXd& beta,
                     Eigen::VectorXd& out) {
  const int K = cfg.K;
  switch (cfg.kind) {
    case DriftKind::Heat:
      out = w.forcing_k;
      return;
    case DriftKind::Fisher: {
      const Eigen::VectorXd x = w.S.transpose() * beta;            // field on the grid
      const Eigen::VectorXd x2 = x.array().square().matrix();
      out = beta - w.gw * (w.S * x2);                              // <x - x^2, e_k>
      return;
    }
    case DriftKind::Burgers: {
      const Eigen::VectorXd x = w.S.transpose() * beta;
      const Eigen::VectorXd x2 = x.array().square().matrix();
      out = -0.5 * w.gw * (w.D * x2);                              // <(x^2/2)', e_k> by parts
      return;
    }
  }
  out.setZero(K);
}

}  // namespace detail

// Empirical mean (and standard error) of the observable across `paths`
// independent driving-noise realizations, sampled at `times`.  Point
// functionals are evaluated at every entry of `out_points`; the integral
// functional produces a single column at abscissa 0.5.  Heat uses the exact
// Ornstein-Uhlenbeck transition per step; the quadratic models use
// Euler-Maruyama.  Results are bit-identical for any thread count: paths are
// grouped into fixed blocks of 256 accumulated in block order.
inline SolutionSurface simulate_mean(const McConfig& cfg, const SpectralField& X0,
                                     const Functional& functional, const std::vector<double>& times,
                                     const std::vector<double>& out_points) {
  if (cfg.K < 1) throw ConfigError("mode count must be at least 1");
  if (cfg.paths < 1) throw ConfigError("path count must be at least 1");
  if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(cfg.nu > 0.0)) throw ConfigError("viscosity must be positive");
  detail::validate_times(times);
  const double lambda_K = cfg.nu * M_PI * M_PI * cfg.K * cfg.K;
  if (cfg.kind != DriftKind::Heat && cfg.dt * lambda_K >= 2.0) {
    throw ConfigError("step too large for stiffest retained mode: dt * lambda_K = " +
                      std::to_string(cfg.dt * lambda_K) + " >= 2");
  }
  if (static_cast<int>(X0.beta.size()) > cfg.K) {
    throw ConfigError("initial state has more modes than the estimator retains");
  }
  std::vector<double> points = out_points;
  if (functional.kind == FunctionalKind::IntegralOverDomain) points = {0.5};
  if (points.empty()) throw ConfigError("point functional needs at least one abscissa");

  const detail::McWorkspace w = detail::make_mc_workspace(cfg, functional, points);
  const int K = cfg.K;
  const auto T = static_cast<Eigen::Index>(times.size());
  const auto P = static_cast<Eigen::Index>(points.size());

  struct Segment {
    long steps;
    double dt;
  };
  std::vector<Segment> plan;
  for (std::size_t s = 1; s < times.size(); ++s) {
    const double span = times[s] - times[s - 1];
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(span / cfg.dt - 1e-12)));
    plan.push_back({span > 0 ? n : 0, span > 0 ? span / static_cast<double>(n) : 0.0});
  }
  std::vector<Eigen::VectorXd> ou_decay(plan.size()), ou_mean(plan.size()), ou_noise(plan.size());
  if (cfg.kind == DriftKind::Heat) {
    for (std::size_t s = 0; s < plan.size(); ++s) {
      ou_decay[s].resize(K);
      ou_mean[s].resize(K);
      ou_noise[s].resize(K);
      for (int k = 0; k < K; ++k) {
        const double lam = w.spec.lambda_A[static_cast<std::size_t>(k)];
        const double e = std::exp(-lam * plan[s].dt);
        ou_decay[s](k) = e;
        ou_mean[s](k) = w.forcing_k(k) * (1.0 - e) / lam;
        ou_noise[s](k) = std::sqrt((1.0 - e * e) / (2.0 * lam));
      }
    }
  }

  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(K);
  for (std::size_t k = 0; k < X0.beta.size(); ++k) beta0(static_cast<Eigen::Index>(k)) = X0.beta[k];

  auto observe = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& row) {
    if (functional.kind == FunctionalKind::PointEvaluation) {
      row = w.basis_at.transpose() * beta;
    } else {
      row.resize(1);
      row(0) = w.integral_e.dot(beta);
    }
  };

  constexpr long kBlock = 256;
  const long n_blocks = (cfg.paths + kBlock - 1) / kBlock;
  std::vector<Eigen::MatrixXd> block_sum(static_cast<std::size_t>(n_blocks));
  std::vector<Eigen::MatrixXd> block_sq(static_cast<std::size_t>(n_blocks));
  std::vector<std::string> block_error(static_cast<std::size_t>(n_blocks));

  const unsigned threads = cfg.threads ? cfg.threads : detail::default_threads();
  detail::parallel_for_chunks(static_cast<std::size_t>(n_blocks), threads, [&](std::size_t b0, std::size_t b1) {
    Eigen::VectorXd beta(K), drift(K), row;
    for (std::size_t b = b0; b < b1; ++b) {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(T, P);
      Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(T, P);
      const long lo = static_cast<long>(b) * kBlock;
      const long hi = std::min(cfg.paths, lo + kBlock);
      for (long p = lo; p < hi && block_error[b].empty(); ++p) {
        detail::GaussianStream rng(detail::path_stream_seed(cfg.seed, static_cast<std::uint64_t>(p)));
        beta = beta0;
        observe(beta, row);
        sum.row(0) += row.transpose();
        sq.row(0) += row.array().square().matrix().transpose();
        for (std::size_t seg = 0; seg < plan.size(); ++seg) {
          const double dt = plan[seg].dt;
          const double sq_dt = std::sqrt(dt);
          for (long st = 0; st < plan[seg].steps; ++st) {
            if (cfg.kind == DriftKind::Heat) {
              for (int k = 0; k < K; ++k) {
                const double g = cfg.noise ? rng.next() : 0.0;
                beta(k) = ou_decay[seg](k) * beta(k) + ou_mean[seg](k) + ou_noise[seg](k) * g;
              }
            } else {
              detail::mc_drift(cfg, w, beta, drift);
              for (int k = 0; k < K; ++k) {
                const double lam = w.spec.lambda_A[static_cast<std::size_t>(k)];
                const double g = cfg.noise ? rng.next() : 0.0;
                beta(k) += dt * (-lam * beta(k) + drift(k)) + sq_dt * g;
              }
            }
            if (beta.cwiseAbs().maxCoeff() > 1e6) {
              block_error[b] = "path " + std::to_string(p) + " diverged during segment ending t = " +
                               std::to_string(times[seg + 1]);
              break;
            }
          }
          if (!block_error[b].empty()) break;
          observe(beta, row);
          sum.row(static_cast<Eigen::Index>(seg) + 1) += row.transpose();
          sq.row(static_cast<Eigen::Index>(seg) + 1) += row.array().square().matrix().transpose();
        }
      }
      block_sum[b] = std::move(sum);
      block_sq[b] = std::move(sq);
    }
  });

  for (const auto& err : block_error) {
    if (!err.empty()) throw NumericalError(err);
  }

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(T, P);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(T, P);
  for (long b = 0; b < n_blocks; ++b) {  // fixed order: results independent of thread count
    sum += block_sum[static_cast<std::size_t>(b)];
    sq += block_sq[static_cast<std::size_t>(b)];
  }

  SolutionSurface s;
  s.times = times;
  s.points = points;
  const auto n = static_cast<double>(cfg.paths);
  s.values = sum / n;
  s.stderrs = Eigen::MatrixXd::Zero(T, P);
  if (cfg.paths > 1) {
    for (Eigen::Index i = 0; i < T; ++i) {
      for (Eigen::Index j = 0; j < P; ++j) {
        const double var = std::max(0.0, (sq(i, j) - n * s.values(i, j) * s.values(i, j)) / (n - 1.0));
        s.stderrs(i, j) = std::sqrt(var / n);
      }
    }
  }
  s.meta.model = cfg.kind == DriftKind::Heat    ? "heat"
                 : cfg.kind == DriftKind::Fisher ? "fisher"
                                                  : "burgers";
  s.meta.nu = cfg.nu;
  s.meta.M = cfg.K;
  s.meta.functional = functional.kind == FunctionalKind::PointEvaluation ? "point" : "integral";
  return s;
}

}  // namespace wchaos
