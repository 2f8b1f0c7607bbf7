#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "wchaos/errors.hpp"
#include "wchaos/hermite.hpp"
#include "wchaos/multiindex.hpp"
#include "wchaos/parallel.hpp"
#include "wchaos/spectral_basis.hpp"

namespace wchaos {

enum class DriftKind { Heat, Fisher, Burgers };

// Treatment of the quadratic part of the drift when it is projected onto the
// truncated noise coordinates.
//
// Linearized (default): the product beta_l beta_k is replaced by its
// first-order expansion around the frozen base field b,
//   beta_l beta_k -> b_l beta_k + b_k beta_l - b_l b_k,
// where the live factors beta_k = xi_k / sigma_k are substituted exactly for
// k <= M and coordinates beyond the truncation keep their frozen value.  The
// resulting drift is affine in the noise coordinates, so the chaos hierarchy
// couples only downward and the first-moment dynamics track the mean-field
// PDE up to the linearization error.
//
// Exact: every factor with index <= M stays live (beta_k = xi_k / sigma_k),
// which reproduces the full quadratic substitution.  This keeps the
// fluctuation feedback of the invariant measure in the mean equation, so it
// deviates from the deterministic mean-field reference by O(1) stationary
// variance terms; it is retained for studying that gap, not for matching the
// reference surface.
enum class QuadraticMode { Linearized, Exact };

using ForcingFunction = std::function<double(double)>;

struct DriftModel {
  DriftKind kind = DriftKind::Heat;
  ForcingFunction forcing;   // additive source, Heat only
  SpectralField base_field;  // freezing centre for quadratic terms
  QuadraticMode mode = QuadraticMode::Linearized;
};

// <f, e_k> by composite Gauss-Legendre panels (panel count adapts to the
// oscillation of e_k unless overridden).
inline double forcing_inner_product(const std::function<double(double)>& f, int k, int panels = 0) {
  if (k < 1) throw ConfigError("basis mode index must be positive");
  if (!f) return 0.0;
  if (panels <= 0) panels = std::max(16, 2 * k);
  static thread_local QuadratureRule panel_rule = gauss_legendre_01(16);
  double acc = 0.0;
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = p * h;
    for (std::size_t q = 0; q < panel_rule.nodes.size(); ++q) {
      const double xi = left + h * panel_rule.nodes[q];
      acc += h * panel_rule.weights[q] * f(xi) * basis_eval(k, xi);
    }
  }
  return acc;
}

// <e_l e_k, e_j> in closed form.  With I(a, j) := integral_0^1 cos(a pi xi)
// sin(j pi xi) dxi = (2j/pi) / (j^2 - a^2) when a + j is odd and 0 otherwise,
// the product-to-sum identity gives
//   <e_l e_k, e_j> = sqrt(2) [ I(|l-k|, j) - I(l+k, j) ].
inline double triple_product(int l, int k, int j) {
  if (l < 1 || k < 1 || j < 1) throw ConfigError("basis mode index must be positive");
  auto I = [](int a, int j_) -> double {
    if ((a + j_) % 2 == 0) return 0.0;
    return (2.0 * j_ / std::numbers::pi) / (static_cast<double>(j_) * j_ - static_cast<double>(a) * a);
  };
  return std::numbers::sqrt2 * (I(std::abs(l - k), j) - I(l + k, j));
}

// <(e_l e_k)', e_j> in closed form.  From e_l e_k' expanded by product-to-sum
// and integral_0^1 sin(a pi xi) sin(j pi xi) dxi = delta_{a,j}/2 (a > 0):
//   <e_l e_k', e_j> = (pi sqrt2 / 2) k [ delta_{l+k,j} + s(l-k, j) ],
// s(a, j) = sign(a) delta_{|a|,j}, plus the l <-> k mirror for e_l' e_k.
inline double derivative_triple_product(int l, int k, int j) {
  if (l < 1 || k < 1 || j < 1) throw ConfigError("basis mode index must be positive");
  auto s = [](int a, int j_) -> double {
    if (a == 0) return 0.0;
    if (std::abs(a) != j_) return 0.0;
    return a > 0 ? 1.0 : -1.0;
  };
  auto d = [](int a, int j_) -> double { return a == j_ ? 1.0 : 0.0; };
  const double term_k = k * (d(l + k, j) + s(l - k, j));
  const double term_l = l * (d(l + k, j) + s(k - l, j));
  return 0.5 * std::numbers::pi * std::numbers::sqrt2 * (term_k + term_l);
}

struct CoefficientMatrix {
  Eigen::MatrixXd values;
  IndexSet set;
};

namespace detail {

// Cached 1-D pairings pt(i, j, p) = integral P_i P_j x^p dmu, p = 0, 1, 2,
// realized through the supplied Gauss-Hermite rule.
struct PairingTable {
  int max_degree;
  Eigen::MatrixXd p0, p1, p2;

  PairingTable(int max_degree_, const QuadratureRule& rule) : max_degree(max_degree_) {
    const int D = max_degree + 1;
    p0.resize(D, D);
    p1.resize(D, D);
    p2.resize(D, D);
    // Selection rules keep structural zeros exact instead of quadrature-noise
    // sized: the integrand P_i P_j x^p is odd when i + j + p is odd, and
    // x^p P_j only spans degrees within p of j.
    auto cell = [&](int i, int j, int p) -> double {
      if ((i + j + p) % 2 != 0) return 0.0;
      if (std::abs(i - j) > p) return 0.0;
      return gaussian_pairing(i, j, p, rule);
    };
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) {
        p0(i, j) = cell(i, j, 0);
        p1(i, j) = cell(i, j, 1);
        p2(i, j) = cell(i, j, 2);
      }
    }
  }

  double get(int i, int j, int p) const {
    switch (p) {
      case 0: return p0(i, j);
      case 1: return p1(i, j);
      default: return p2(i, j);
    }
  }
};

// Shared machinery for the per-entry drift coefficients
//   C_{n,m} = integral <B(x), D_x H_n> H_m dmu.
// The Frechet derivative contributes sigma_j sqrt(n_j) P_{n_j - 1}(xi_j) in
// direction e_j; the drift components <B, e_j> are polynomials of degree <= 2
// in the live coordinates, so every entry factorizes into 1-D pairings.
struct DriftAssembler {
  const OperatorSpectrum& spec;
  DriftKind kind;
  QuadraticMode mode;
  PairingTable pt;
  int M;
  int Kb;                        // base-field truncation for frozen factors
  std::vector<double> beta0;     // frozen coefficients, length Kb
  std::vector<double> f_k;       // heat forcing projections, length M

  // Linearized weights: g_full[j][k] = sum_{l<=Kb} b_l T(l, k+1, j+1) for
  // k+1 <= max(M, Kb); c_lin[j] collects every constant term of the
  // linearized quadratic operator.
  std::vector<std::vector<double>> g_full;
  std::vector<double> c_lin;

  // Exact-mode weights: w_mix[j][l] = 2 sum_{k>M} b_k T(l, k, j) for live l,
  // c_frozen[j] = sum_{l,k>M} b_l b_k T(l, k, j).
  std::vector<std::vector<double>> w_mix;
  std::vector<double> c_frozen;

  DriftAssembler(const OperatorSpectrum& spectrum, const DriftModel& model,
                 const QuadratureRule& rule, int pairing_degree)
      : spec(spectrum),
        kind(model.kind),
        mode(model.mode),
        pt(model.kind == DriftKind::Heat ? 0 : pairing_degree, rule),
        M(spectrum.M),
        Kb(model.base_field.truncation()) {
    beta0 = model.base_field.beta;
    if (kind == DriftKind::Heat) {
      f_k.resize(static_cast<std::size_t>(M), 0.0);
      for (int k = 1; k <= M; ++k) {
        f_k[static_cast<std::size_t>(k - 1)] = forcing_inner_product(model.forcing, k);
      }
      return;
    }
    const bool derivative_tensor = kind == DriftKind::Burgers;
    auto tensor = [&](int l, int k, int j) {
      return derivative_tensor ? derivative_triple_product(l, k, j) : triple_product(l, k, j);
    };
    const int Kq = std::max(M, Kb);
    auto b0 = [&](int k) { return k <= Kb ? beta0[static_cast<std::size_t>(k - 1)] : 0.0; };
    g_full.assign(static_cast<std::size_t>(M), std::vector<double>(static_cast<std::size_t>(Kq), 0.0));
    c_lin.assign(static_cast<std::size_t>(M), 0.0);
    w_mix.assign(static_cast<std::size_t>(M), std::vector<double>(static_cast<std::size_t>(M), 0.0));
    c_frozen.assign(static_cast<std::size_t>(M), 0.0);
    for (int j = 1; j <= M; ++j) {
      auto& gj = g_full[static_cast<std::size_t>(j - 1)];
      for (int k = 1; k <= Kq; ++k) {
        double acc = 0.0;
        for (int l = 1; l <= Kb; ++l) acc += b0(l) * tensor(l, k, j);
        gj[static_cast<std::size_t>(k - 1)] = acc;
      }
      // Linearized constant: 2 sum_{k>M} b_k g[j][k] - sum_k b_k g[j][k].
      double tail = 0.0, full = 0.0;
      for (int k = 1; k <= Kq; ++k) {
        const double term = b0(k) * gj[static_cast<std::size_t>(k - 1)];
        full += term;
        if (k > M) tail += term;
      }
      c_lin[static_cast<std::size_t>(j - 1)] = 2.0 * tail - full;
      // Exact-mode splits.
      auto& wj = w_mix[static_cast<std::size_t>(j - 1)];
      for (int l = 1; l <= M; ++l) {
        double acc = 0.0;
        for (int k = M + 1; k <= Kb; ++k) acc += b0(k) * tensor(l, k, j);
        wj[static_cast<std::size_t>(l - 1)] = 2.0 * acc;
      }
      double froz = 0.0;
      for (int l = M + 1; l <= Kb; ++l) {
        for (int k = M + 1; k <= Kb; ++k) froz += b0(l) * b0(k) * tensor(l, k, j);
      }
      c_frozen[static_cast<std::size_t>(j - 1)] = froz;
    }
  }

  double sigma(int k) const { return spec.sigma[static_cast<std::size_t>(k - 1)]; }

  double heat_entry(const MultiIndex& n, const MultiIndex& m) const {
    // Nonzero only when m = n - unit_k: value sigma_k sqrt(n_k) <f, e_k>.
    int k = -1;
    for (int i = 0; i < M; ++i) {
      if (n[i] == m[i]) continue;
      if (k >= 0 || n[i] - m[i] != 1) return 0.0;
      k = i;
    }
    if (k < 0) return 0.0;
    return sigma(k + 1) * std::sqrt(static_cast<double>(n[k])) * f_k[static_cast<std::size_t>(k)];
  }

  double quadratic_entry(const MultiIndex& n, const MultiIndex& m) const {
    // Overall sign and scale of the quadratic operator inside the drift
    // bracket: Fisher has B = x - x^2 (linear part handled separately, the
    // quadratic enters with -1); Burgers has B = (1/2) d/dxi (x^2).
    const bool fisher = kind == DriftKind::Fisher;
    const double quad_scale = fisher ? -1.0 : 0.5;

    std::vector<int> diffs;
    for (int i = 0; i < M; ++i) {
      if (n[i] != m[i]) diffs.push_back(i);
    }
    const std::size_t max_active = mode == QuadraticMode::Linearized ? 2 : 3;
    if (diffs.size() > max_active) return 0.0;
    auto diffs_within = [&](std::initializer_list<int> active) {
      for (int d : diffs) {
        bool found = false;
        for (int a : active) {
          if (a == d) { found = true; break; }
        }
        if (!found) return false;
      }
      return true;
    };

    double acc = 0.0;
    for (int j0 = 0; j0 < M; ++j0) {
      const int j = j0 + 1;
      const int nj = n[j0];
      if (nj == 0) continue;
      const double rn = std::sqrt(static_cast<double>(nj));
      auto pd = [&](int p) { return rn * pt.get(m[j0], nj - 1, p); };
      auto pair_at = [&](int i0, int p) { return pt.get(m[i0], n[i0], p); };

      if (fisher && diffs_within({j0})) acc += sigma(j) * (1.0 / sigma(j)) * pd(1);

      if (mode == QuadraticMode::Linearized) {
        const auto& gj = g_full[static_cast<std::size_t>(j0)];
        if (diffs_within({j0})) {
          // Live diagonal 2 g[j][j] xi_j / sigma_j and the constant part.
          acc += quad_scale * sigma(j) * (2.0 * gj[static_cast<std::size_t>(j0)] / sigma(j)) * pd(1);
          acc += quad_scale * sigma(j) * c_lin[static_cast<std::size_t>(j0)] * pd(0);
        }
        for (int k0 = 0; k0 < M; ++k0) {
          if (k0 == j0 || !diffs_within({j0, k0})) continue;
          acc += quad_scale * sigma(j) * (2.0 * gj[static_cast<std::size_t>(k0)] / sigma(k0 + 1)) *
                 pd(0) * pair_at(k0, 1);
        }
      } else {
        // Exact substitution: live-live, live-frozen, frozen-frozen.
        if (diffs_within({j0})) {
          acc += quad_scale * sigma(j) * c_frozen[static_cast<std::size_t>(j0)] * pd(0);
          acc += quad_scale * sigma(j) *
                 (w_mix[static_cast<std::size_t>(j0)][static_cast<std::size_t>(j0)] / sigma(j)) * pd(1);
          acc += quad_scale * tensor_entry(j, j, j) / sigma(j) * pd(2);
        }
        for (int l0 = 0; l0 < M; ++l0) {
          if (l0 == j0 || !diffs_within({j0, l0})) continue;
          const int l = l0 + 1;
          acc += quad_scale * sigma(j) *
                 (w_mix[static_cast<std::size_t>(j0)][static_cast<std::size_t>(l0)] / sigma(l)) *
                 pd(0) * pair_at(l0, 1);
          // l = k != j live diagonal.
          acc += quad_scale * sigma(j) * (tensor_entry(l, l, j) / (sigma(l) * sigma(l))) *
                 pd(0) * pair_at(l0, 2);
          // l = j, k != j live pair (ordered, both orders).
          acc += quad_scale * (2.0 * tensor_entry(j, l, j) / sigma(l)) * pd(1) * pair_at(l0, 1);
        }
        for (int l0 = 0; l0 < M; ++l0) {
          for (int k0 = l0 + 1; k0 < M; ++k0) {
            if (l0 == j0 || k0 == j0 || !diffs_within({j0, l0, k0})) continue;
            acc += quad_scale * sigma(j) *
                   (2.0 * tensor_entry(l0 + 1, k0 + 1, j) / (sigma(l0 + 1) * sigma(k0 + 1))) *
                   pd(0) * pair_at(l0, 1) * pair_at(k0, 1);
          }
        }
      }
    }
    return acc;
  }

  double tensor_entry(int l, int k, int j) const {
    return kind == DriftKind::Burgers ? derivative_triple_product(l, k, j) : triple_product(l, k, j);
  }

  double entry(const MultiIndex& n, const MultiIndex& m) const {
    return kind == DriftKind::Heat ? heat_entry(n, m) : quadratic_entry(n, m);
  }

  // Superset of the targets m with entry(n, m) possibly nonzero, used for the
  // forward-reachability reduction.  Only valid for drifts that are affine in
  // the live coordinates (heat, or linearized quadratic models), where the
  // chaos level never increases along an edge.
  std::vector<MultiIndex> successors(const MultiIndex& n) const {
    std::vector<MultiIndex> out;
    if (kind != DriftKind::Heat && mode == QuadraticMode::Exact) {
      throw NumericalError("structural reduction is not available for the exact quadratic mode");
    }
    auto push = [&](MultiIndex m) {
      for (int i = 0; i < M; ++i) {
        if (m[i] < 0) return;
      }
      out.push_back(std::move(m));
    };
    if (kind == DriftKind::Heat) {
      for (int k = 0; k < M; ++k) {
        if (n[k] == 0) continue;
        MultiIndex m = n;
        m[k] -= 1;
        push(std::move(m));
      }
      return out;
    }
    push(n);  // diagonal
    for (int j = 0; j < M; ++j) {
      if (n[j] == 0) continue;
      MultiIndex m1 = n;
      m1[j] -= 2;
      push(std::move(m1));
      MultiIndex m2 = n;
      m2[j] -= 1;
      push(m2);
      for (int k = 0; k < M; ++k) {
        if (k == j) continue;
        MultiIndex mp = m2;
        mp[k] += 1;
        push(std::move(mp));
        MultiIndex mm = m2;
        mm[k] -= 1;
        push(std::move(mm));
      }
    }
    return out;
  }
};

inline int pairing_degree_for(const IndexSet& set) {
  int deg = 0;
  for (const auto& n : set.indices) {
    for (int v : n.n) deg = std::max(deg, v);
  }
  return deg;
}

}  // namespace detail

// Single-entry drift coefficients (production closed forms / factorized
// pairings).  These rebuild the frozen-field weights per call; bulk assembly
// should go through assemble_coefficients.
inline double heat_coefficient(const MultiIndex& n, const MultiIndex& m, const OperatorSpectrum& spec,
                               const std::function<double(double)>& forcing) {
  DriftModel model;
  model.kind = DriftKind::Heat;
  model.forcing = forcing;
  QuadratureRule rule = gauss_hermite(2);  // heat path never touches pairings
  detail::DriftAssembler a(spec, model, rule, 0);
  return a.heat_entry(n, m);
}

// Heat entry via the full factorized quadrature sum
//   sum_k sigma_k <f, e_k> sqrt(n_k) prod_i pairing(m_i, n_i - delta_ik, 0),
// the independent route the delta shortcut must reproduce.
inline double heat_coefficient_quadrature(const MultiIndex& n, const MultiIndex& m,
                                          const OperatorSpectrum& spec,
                                          const std::function<double(double)>& forcing,
                                          const QuadratureRule& rule) {
  double acc = 0.0;
  for (int k = 1; k <= spec.M; ++k) {
    if (n[k - 1] == 0) continue;
    double prod = std::sqrt(static_cast<double>(n[k - 1]));
    for (int i = 1; i <= spec.M; ++i) {
      const int ni = n[i - 1] - (i == k ? 1 : 0);
      prod *= gaussian_pairing(m[i - 1], ni, 0, rule);
      if (prod == 0.0) break;
    }
    if (prod == 0.0) continue;
    acc += spec.sigma[static_cast<std::size_t>(k - 1)] * forcing_inner_product(forcing, k) * prod;
  }
  return acc;
}

inline double fisher_coefficient(const MultiIndex& n, const MultiIndex& m, const OperatorSpectrum& spec,
                                 const SpectralField& base, const QuadratureRule& rule,
                                 QuadraticMode mode = QuadraticMode::Linearized) {
  DriftModel model;
  model.kind = DriftKind::Fisher;
  model.base_field = base;
  model.mode = mode;
  const int deg = std::max(*std::max_element(n.n.begin(), n.n.end()),
                           *std::max_element(m.n.begin(), m.n.end()));
  detail::DriftAssembler a(spec, model, rule, deg);
  return a.quadratic_entry(n, m);
}

inline double burgers_coefficient(const MultiIndex& n, const MultiIndex& m, const OperatorSpectrum& spec,
                                  const SpectralField& base, const QuadratureRule& rule,
                                  QuadraticMode mode = QuadraticMode::Linearized) {
  DriftModel model;
  model.kind = DriftKind::Burgers;
  model.base_field = base;
  model.mode = mode;
  const int deg = std::max(*std::max_element(n.n.begin(), n.n.end()),
                           *std::max_element(m.n.begin(), m.n.end()));
  detail::DriftAssembler a(spec, model, rule, deg);
  return a.quadratic_entry(n, m);
}

// Dense drift coefficient matrix over the index set: values(i, j) = C_{n_j, m_i}
// stored as [row = target m][col = source n], matching the Galerkin system
// du_m/dt = -lambda_m u_m + sum_n C_{n,m} u_n.  Entries are computed
// independently into disjoint slots, so the result is bit-identical for every
// thread count and assembly order.
inline CoefficientMatrix assemble_coefficients(const IndexSet& set, const DriftModel& model,
                                               const OperatorSpectrum& spectrum,
                                               const QuadratureRule& rule, unsigned threads = 1) {
  const int dim = set.size();
  if (dim > 2000) {
    throw ConfigError("dense assembly capped at 2000 indices; reduce the set before assembling");
  }
  detail::DriftAssembler assembler(spectrum, model, rule, std::max(1, detail::pairing_degree_for(set)));
  CoefficientMatrix cm;
  cm.set = set;
  cm.values.resize(dim, dim);
  detail::parallel_for_chunks(static_cast<std::size_t>(dim), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t row = lo; row < hi; ++row) {
      const MultiIndex& m = set[static_cast<int>(row)];
      for (int col = 0; col < dim; ++col) {
        cm.values(static_cast<Eigen::Index>(row), col) = assembler.entry(set[col], m);
      }
    }
  });
  return cm;
}

}  // namespace wchaos
