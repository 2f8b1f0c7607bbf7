#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wchaos/drift_models.hpp"
#include "wchaos/errors.hpp"
#include "wchaos/field_solution.hpp"
#include "wchaos/galerkin_ode.hpp"
#include "wchaos/hermite.hpp"
#include "wchaos/initial_conditions.hpp"
#include "wchaos/mc_oracle.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/reference_pde.hpp"
#include "wchaos/runner.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

struct SuiteResult {
  std::string name;
  bool pass = true;
  std::string message;  // first failure, or empty
};

namespace detail {

// Tiny check collector: records the first failing condition.
struct SuiteState {
  SuiteResult result;
  explicit SuiteState(std::string name) { result.name = std::move(name); }
  void require(bool ok, const std::string& what) {
    if (!ok && result.pass) {
      result.pass = false;
      result.message = what;
    }
  }
  void require_close(double got, double want, double tol, const std::string& what) {
    require(std::isfinite(got) && std::abs(got - want) <= tol,
            what + ": got " + std::to_string(got) + ", want " + std::to_string(want) +
                " within " + std::to_string(tol));
  }
  SuiteResult finish() { return result; }
};

template <typename Fn>
inline SuiteResult guarded_suite(const std::string& name, Fn&& body) {
  SuiteState st(name);
  try {
    body(st);
  } catch (const std::exception& e) {
    st.require(false, std::string("unexpected error: ") + e.what());
  }
  return st.finish();
}

}  // namespace detail

// --- polynomial basis ------------------------------------------------------

inline SuiteResult suite_hermite_orthonormality(bool perturb = false) {
  return detail::guarded_suite("hermite-orthonormality", [&](detail::SuiteState& st) {
    const QuadratureRule rule = gauss_hermite(64);
    // The perturbation hook scales one polynomial, which must break the suite
    // (negative control for the validation harness itself).
    auto eval = [&](int k, double x) {
      const double v = hermite_eval(k, x);
      return perturb && k == 5 ? v * (1.0 + 1e-6) : v;
    };
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i) {
      for (int j = i; j <= 20; ++j) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          acc += rule.weights[q] * eval(i, rule.nodes[q]) * eval(j, rule.nodes[q]);
        }
        worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
      }
    }
    st.require(worst <= 1e-10, "orthonormality defect " + std::to_string(worst) + " exceeds 1e-10");
  });
}

inline SuiteResult suite_hermite_derivative() {
  return detail::guarded_suite("hermite-derivative", [](detail::SuiteState& st) {
    const double h = 1e-6;
    for (int k = 0; k <= 10; ++k) {
      for (double x : {-2.0, -0.7, 0.0, 1.3, 2.5}) {
        const double fd = (hermite_eval(k, x + h) - hermite_eval(k, x - h)) / (2.0 * h);
        st.require(std::abs(hermite_derivative(k, x) - fd) <= 1e-6 * (1.0 + std::abs(fd)),
                   "derivative mismatch at k=" + std::to_string(k) + ", x=" + std::to_string(x));
      }
    }
  });
}

inline SuiteResult suite_hermite_recurrence() {
  return detail::guarded_suite("hermite-recurrence", [](detail::SuiteState& st) {
    for (int k = 1; k <= 25; ++k) {
      for (double x : {-3.0, -1.1, 0.0, 0.4, 2.2}) {
        const double lhs = std::sqrt(k + 1.0) * hermite_eval(k + 1, x);
        const double rhs = x * hermite_eval(k, x) - std::sqrt(static_cast<double>(k)) * hermite_eval(k - 1, x);
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        st.require(std::abs(lhs - rhs) <= 1e-12 * scale,
                   "recurrence residual at k=" + std::to_string(k) + ", x=" + std::to_string(x));
      }
    }
  });
}

inline SuiteResult suite_gaussian_pairing() {
  return detail::guarded_suite("gaussian-pairing", [](detail::SuiteState& st) {
    const QuadratureRule rule = gauss_hermite(32);
    for (int p = 0; p <= 2; ++p) {
      for (int i = 0; i <= 6; ++i) {
        for (int j = 0; j <= 6; ++j) {
          const double num = gaussian_pairing(i, j, p, rule);
          const double cls = gaussian_pairing_closed(i, j, p);
          st.require(std::abs(num - cls) <= 1e-10,
                     "pairing p=" + std::to_string(p) + " (" + std::to_string(i) + "," +
                         std::to_string(j) + ") closed form vs quadrature");
        }
      }
    }
  });
}

// --- operator spectrum and kernels -----------------------------------------

inline SuiteResult suite_covariance_kernel() {
  return detail::guarded_suite("covariance-kernel", [](detail::SuiteState& st) {
    const double nu = 1.0;
    st.require_close(covariance_kernel(0.5, 0.5, nu), 0.125, 1e-12, "kernel value at (0.5, 0.5)");
    double worst = 0.0;
    for (int a = 0; a <= 20; ++a) {
      for (int b = 0; b <= 20; ++b) {
        const double x = a / 20.0, y = b / 20.0;
        double series = 0.0;
        for (int k = 1; k <= 1000; ++k) {
          const double lam_cov = 1.0 / (2.0 * nu * M_PI * M_PI * k * k);
          series += lam_cov * basis_eval(k, x) * basis_eval(k, y);
        }
        worst = std::max(worst, std::abs(series - covariance_kernel(x, y, nu)));
      }
    }
    st.require(worst <= 2e-3, "eigenfunction series deviates from the closed kernel by " +
                                  std::to_string(worst));
  });
}

inline SuiteResult suite_index_sets() {
  return detail::guarded_suite("index-sets", [](detail::SuiteState& st) {
    const IndexSet total = enumerate_indices(3, 4, TruncationScheme::TotalDegree);
    st.require(total.size() == 35, "total-degree count for M=3, N=4");
    const IndexSet tensor = enumerate_indices(3, 4, TruncationScheme::FullTensor);
    st.require(tensor.size() == 125, "full-tensor count for M=3, N=4");
    for (int i = 1; i < total.size(); ++i) {
      st.require(graded_lex_less(total[i - 1], total[i]), "graded-lex ordering");
    }
    for (int i = 0; i < total.size(); ++i) {
      st.require(total.find(total[i]) == i, "find round-trip");
    }
  });
}

inline SuiteResult suite_basis_tensors() {
  return detail::guarded_suite("basis-tensors", [](detail::SuiteState& st) {
    const QuadratureRule gl = gauss_legendre_01(200);
    for (int l = 1; l <= 4; ++l) {
      for (int k = 1; k <= 4; ++k) {
        for (int j = 1; j <= 5; ++j) {
          double tp = 0.0, dtp = 0.0;
          for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double x = gl.nodes[q], w = gl.weights[q];
            tp += w * basis_eval(l, x) * basis_eval(k, x) * basis_eval(j, x);
            dtp += w *
                   (basis_eval(l, x) * basis_derivative(k, x) +
                    basis_derivative(l, x) * basis_eval(k, x)) *
                   basis_eval(j, x);
          }
          st.require(std::abs(tp - triple_product(l, k, j)) <= 1e-9,
                     "triple product (" + std::to_string(l) + "," + std::to_string(k) + "," +
                         std::to_string(j) + ")");
          st.require(std::abs(dtp - derivative_triple_product(l, k, j)) <= 1e-9,
                     "derivative triple product (" + std::to_string(l) + "," + std::to_string(k) +
                         "," + std::to_string(j) + ")");
        }
      }
    }
  });
}

// Dirichlet-form identity: for cylinder functions phi = sum phi_n H_n over
// (M = 2, N = 3), the gradient energy integral equals 2 sum lambda_n phi_n^2.
inline SuiteResult suite_green_identity() {
  return detail::guarded_suite("green-identity", [](detail::SuiteState& st) {
    const int M = 2, N = 3;
    const double nu = 0.7;
    const OperatorSpectrum spec = make_spectrum(nu, M);
    const IndexSet set = enumerate_indices(M, N, TruncationScheme::TotalDegree);
    const QuadratureRule rule = gauss_hermite(24);
    detail::GaussianStream rng(0xD1121C4A11EFULL);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd phi(set.size());
      for (int n = 0; n < set.size(); ++n) phi(n) = rng.next();
      // Quadrature of |D_x phi|^2 over the 2-D whitened coordinates:
      // D_x phi = sum_k sigma_k (d phi / d xi_k) e_k.
      double energy = 0.0;
      for (std::size_t qa = 0; qa < rule.nodes.size(); ++qa) {
        for (std::size_t qb = 0; qb < rule.nodes.size(); ++qb) {
          const double xa = rule.nodes[qa], xb = rule.nodes[qb];
          double da = 0.0, db = 0.0;
          for (int n = 0; n < set.size(); ++n) {
            const MultiIndex& idx = set[n];
            da += phi(n) * hermite_derivative(idx[0], xa) * hermite_eval(idx[1], xb);
            db += phi(n) * hermite_eval(idx[0], xa) * hermite_derivative(idx[1], xb);
          }
          const double s0 = spec.sigma[0], s1 = spec.sigma[1];
          energy += rule.weights[qa] * rule.weights[qb] * (s0 * s0 * da * da + s1 * s1 * db * db);
        }
      }
      double identity = 0.0;
      for (int n = 0; n < set.size(); ++n) {
        identity += 2.0 * ou_eigenvalue(set[n], spec.lambda_A) * phi(n) * phi(n);
      }
      const double scale = std::max(1.0, std::abs(identity));
      st.require(std::abs(energy - identity) <= 1e-8 * scale,
                 "gradient energy vs eigenvalue identity, trial " + std::to_string(trial));
    }
  });
}

// --- dynamics ---------------------------------------------------------------

inline SuiteResult suite_galerkin_solver() {
  return detail::guarded_suite("galerkin-solver", [](detail::SuiteState& st) {
    const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
    {
      GalerkinSystem sys;
      sys.matrix = Eigen::MatrixXd::Zero(2, 2);
      sys.matrix(0, 0) = -1.0;
      sys.matrix(1, 1) = -2.0;
      const ModeTrajectories traj = solve_eigen(sys, Eigen::Vector2d(1.0, 1.0), times);
      st.require(traj.source == TrajectorySource::Eigen, "diagonal system should use the eigen route");
      for (std::size_t i = 0; i < times.size(); ++i) {
        st.require_close(traj.values(static_cast<Eigen::Index>(i), 0), std::exp(-times[i]), 1e-10,
                         "diagonal mode 1");
        st.require_close(traj.values(static_cast<Eigen::Index>(i), 1), std::exp(-2.0 * times[i]),
                         1e-10, "diagonal mode 2");
      }
    }
    {
      GalerkinSystem sys;
      sys.matrix = Eigen::MatrixXd::Zero(2, 2);
      sys.matrix(0, 1) = -1.0;
      sys.matrix(1, 0) = 1.0;
      const ModeTrajectories traj = solve_eigen(sys, Eigen::Vector2d(1.0, 0.0), times);
      for (std::size_t i = 0; i < times.size(); ++i) {
        st.require_close(traj.values(static_cast<Eigen::Index>(i), 0), std::cos(times[i]), 1e-10,
                         "rotation cosine");
        st.require_close(traj.values(static_cast<Eigen::Index>(i), 1), std::sin(times[i]), 1e-10,
                         "rotation sine");
      }
    }
  });
}

// With no drift the Galerkin matrix is exactly diagonal with the multi-index
// eigenvalues, and the solution decays mode by mode.
inline SuiteResult suite_ou_decay() {
  return detail::guarded_suite("ou-decay", [](detail::SuiteState& st) {
    const int M = 3, N = 2;
    const OperatorSpectrum spec = make_spectrum(1.0, M);
    const IndexSet set = enumerate_indices(M, N, TruncationScheme::TotalDegree);
    DriftModel model;
    model.kind = DriftKind::Heat;
    model.forcing = nullptr;  // B = 0
    const CoefficientMatrix cm = assemble_coefficients(set, model, spec, gauss_hermite(8));
    const GalerkinSystem sys = assemble_system(cm, spec);
    for (int i = 0; i < set.size(); ++i) {
      for (int j = 0; j < set.size(); ++j) {
        const double want = i == j ? -ou_eigenvalue(set[i], spec.lambda_A) : 0.0;
        st.require(sys.matrix(i, j) == want, "zero-drift matrix must be exactly diagonal");
      }
    }
    Eigen::VectorXd u0(set.size());
    for (int i = 0; i < set.size(); ++i) u0(i) = 1.0 + 0.1 * i;
    const ModeTrajectories traj = solve_eigen(sys, u0, {0.0, 1.0});
    for (int i = 0; i < set.size(); ++i) {
      const double want = u0(i) * std::exp(-ou_eigenvalue(set[i], spec.lambda_A));
      st.require(std::abs(traj.values(1, i) - want) <= 1e-10 * std::max(1.0, std::abs(want)),
                 "mode decay e^{-lambda t} at index " + std::to_string(i));
    }
  });
}

inline SuiteResult suite_reference_decay() {
  return detail::guarded_suite("reference-decay", [](detail::SuiteState& st) {
    DriftModel model;
    model.kind = DriftKind::Heat;  // zero forcing
    const double nu = 0.1;
    FDGrid grid;
    grid.P = 99;
    grid.dt = 1e-3;
    grid.scheme = FDScheme::CrankNicolsonIMEX;
    const std::vector<double> times{0.0, 0.1, 0.2};
    const SolutionSurface s = solve_deterministic(
        model, nu, [](double xi) { return std::sin(M_PI * xi); }, grid, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t j = 0; j < s.points.size(); ++j) {
        const double want = std::exp(-nu * M_PI * M_PI * times[i]) * std::sin(M_PI * s.points[j]);
        worst = std::max(worst, std::abs(s.values(static_cast<Eigen::Index>(i),
                                                  static_cast<Eigen::Index>(j)) -
                                         want));
      }
    }
    st.require(worst <= 2e-4, "heat decay error " + std::to_string(worst) + " exceeds 2e-4");
  });
}

inline SuiteResult suite_mc_decay() {
  return detail::guarded_suite("mc-decay", [](detail::SuiteState& st) {
    McConfig cfg;
    cfg.kind = DriftKind::Heat;
    cfg.nu = 0.3;
    cfg.K = 3;
    cfg.dt = 0.05;
    cfg.paths = 1;
    cfg.noise = false;
    SpectralField X0 = project_field([](double xi) { return std::sin(M_PI * xi); }, 3);
    const std::vector<double> times{0.0, 0.25, 0.5};
    const std::vector<double> pts{0.25, 0.5, 0.8};
    const SolutionSurface s = simulate_mean(cfg, X0, Functional{FunctionalKind::PointEvaluation, 0.5},
                                            times, pts);
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t p = 0; p < pts.size(); ++p) {
        double want = 0.0;
        for (int k = 1; k <= 3; ++k) {
          const double lam = cfg.nu * M_PI * M_PI * k * k;
          want += X0.beta[static_cast<std::size_t>(k - 1)] * std::exp(-lam * times[i]) *
                  basis_eval(k, pts[p]);
        }
        st.require(std::abs(s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) -
                            want) <= 1e-12,
                   "noise-free mean must decay exactly mode by mode");
      }
    }
    // Fixed-seed reproducibility with noise on.
    cfg.noise = true;
    cfg.paths = 64;
    cfg.seed = 99;
    const SolutionSurface a = simulate_mean(cfg, X0, Functional{}, times, pts);
    const SolutionSurface b = simulate_mean(cfg, X0, Functional{}, times, pts);
    st.require(a.values == b.values && a.stderrs == b.stderrs,
               "fixed seed must reproduce bit-identical estimates");
  });
}

inline SuiteResult suite_compare_metrics() {
  return detail::guarded_suite("compare-metrics", [](detail::SuiteState& st) {
    SolutionSurface b;
    b.times = {0.0, 0.5, 1.0, 1.5};
    b.points = {0.0, 0.25, 0.5, 0.75, 1.0};
    b.values.resize(4, 5);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 5; ++j) {
        b.values(i, j) = std::exp(-b.times[static_cast<std::size_t>(i)]) *
                         std::sin(M_PI * b.points[static_cast<std::size_t>(j)]);
      }
    }
    const CompareReport same = compare(b, b);
    st.require(same.l2 == 0.0 && same.sup == 0.0, "identical surfaces must compare to zero");
    SolutionSurface a = b;
    a.values *= 1.1;
    const CompareReport scaled = compare(a, b);
    st.require_close(scaled.l2, 0.1, 1e-12, "uniform 10% inflation relative error");
    st.require_close(scaled.per_time.back().second, scaled.l2, 1e-15,
                     "last cumulative entry equals the total error");
    for (std::size_t i = 1; i < scaled.per_time.size(); ++i) {
      st.require(scaled.per_time[i].second > scaled.per_time[i - 1].second,
                 "cumulative error profile must increase while errors persist");
    }
  });
}

inline std::vector<SuiteResult> run_validate(bool perturb_hermite = false) {
  std::vector<SuiteResult> out;
  out.push_back(suite_hermite_orthonormality(perturb_hermite));
  out.push_back(suite_hermite_derivative());
  out.push_back(suite_hermite_recurrence());
  out.push_back(suite_gaussian_pairing());
  out.push_back(suite_covariance_kernel());
  out.push_back(suite_index_sets());
  out.push_back(suite_basis_tensors());
  out.push_back(suite_green_identity());
  out.push_back(suite_galerkin_solver());
  out.push_back(suite_ou_decay());
  out.push_back(suite_reference_decay());
  out.push_back(suite_mc_decay());
  out.push_back(suite_compare_metrics());
  return out;
}

}  // namespace wchaos
