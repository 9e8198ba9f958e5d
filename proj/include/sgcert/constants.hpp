#pragma once

// Regularity constants of a coefficient system:
//   lambda_m = max_{0<|alpha|<=m} sum_i sup |d^alpha b_i|      (drift)
//   nu_m(i)  = {0, 0, (1/2)sup|a_i''|, sup|a_i'''| + (3/2)sup|a_i''|}
//   nu~_3(i) = nu_3(i) - (1/2)sup|a_i'''|
//   mu_m     = max_i nu_m(i)
// together with the exponential bound factors they enter.  Sup norms are
// grid maxima and therefore lower bounds of the true supremum; every
// downstream check compares an estimate against e^{c t} * norm, so a
// too-small constant only makes those checks stricter.

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgcert/coefficient_system.hpp"
#include "sgcert/lowdisc.hpp"
#include "sgcert/poly.hpp"

namespace sgcert {

struct SupNormOptions {
  int points_per_axis = 101;
  long long tensor_grid_cap = 20'000'000;  // switch to sampling beyond this
  int sample_count = 100'000;
  int corner_axis_cap = 10;  // enumerate 2^min(d,cap) corners
};

/// Max of |p| over a tensor grid on [0,1]^arity containing all boundary
/// points; exact for affine p.  High arities fall back to low-discrepancy
/// samples plus corner enumeration.
inline double sup_norm(const PolyExpr& p, int grid_points_per_axis,
                       const SupNormOptions& opt = {}) {
  if (grid_points_per_axis < 2)
    throw std::invalid_argument("sup_norm: need at least 2 grid points per axis");
  const int d = p.arity();
  if (p.is_zero()) return 0.0;

  // affine polynomials peak at a corner; evaluate the maximizing corner directly
  if (p.is_affine()) {
    double pos = 0.0, neg = 0.0;  // max of p and of -p over the cube
    for (const auto& [e, c] : p.terms()) {
      if (exponents_order(e) == 0) {
        pos += c;
        neg -= c;
      } else {
        pos += std::max(0.0, c);
        neg += std::max(0.0, -c);
      }
    }
    return std::max(pos, neg);
  }

  double best = 0.0;
  std::vector<double> x(static_cast<size_t>(d), 0.0);

  long long total = 1;
  bool overflow = false;
  for (int k = 0; k < d; ++k) {
    total *= grid_points_per_axis;
    if (total > opt.tensor_grid_cap) { overflow = true; break; }
  }

  if (!overflow && d <= 6) {
    std::vector<int> idx(static_cast<size_t>(d), 0);
    const int n = grid_points_per_axis;
    for (;;) {
      for (int k = 0; k < d; ++k)
        x[static_cast<size_t>(k)] = static_cast<double>(idx[static_cast<size_t>(k)]) / (n - 1);
      best = std::max(best, std::abs(p.eval(x)));
      int k = 0;
      while (k < d && ++idx[static_cast<size_t>(k)] == n) {
        idx[static_cast<size_t>(k)] = 0;
        ++k;
      }
      if (k == d) break;
    }
    return best;
  }

  // sampled mode: low-discrepancy interior points plus cube corners
  const auto alphas = weyl_alphas(d);
  for (int k = 0; k < opt.sample_count; ++k) {
    const auto pt = weyl_point(alphas, static_cast<uint64_t>(k));
    best = std::max(best, std::abs(p.eval(pt)));
  }
  const int corner_axes = std::min(d, opt.corner_axis_cap);
  const uint64_t n_corners = 1ull << corner_axes;
  for (uint64_t mask = 0; mask < n_corners; ++mask) {
    for (int k = 0; k < d; ++k)
      x[static_cast<size_t>(k)] = (k < corner_axes && ((mask >> k) & 1ull)) ? 1.0 : 0.0;
    best = std::max(best, std::abs(p.eval(x)));
  }
  return best;
}

struct ConstantsReport {
  std::array<double, 4> lambda{0.0, 0.0, 0.0, 0.0};  // lambda_0 := 0
  std::array<double, 4> mu{0.0, 0.0, 0.0, 0.0};
  struct CoordinateNu {
    std::array<double, 4> nu{0.0, 0.0, 0.0, 0.0};
    double nu_tilde3 = 0.0;
  };
  std::vector<CoordinateNu> nu_per_coordinate;
  int univariate_grid = 0;
  int multivariate_grid = 0;
};

struct ConstantsOptions {
  int univariate_points = 1001;
  int multivariate_points = 101;
  SupNormOptions sup;
};

namespace detail {

/// Multiindices alpha with 1 <= |alpha| <= max_order dominated by some term
/// exponent of some drift polynomial; all other alpha give zero derivatives.
inline std::set<Exponents> derivative_candidates(const CoefficientSystem& sys,
                                                 int max_order) {
  std::set<Exponents> out;
  Exponents alpha(static_cast<size_t>(sys.dim), 0);
  for (const auto& b : sys.drift) {
    for (const auto& [e, c] : b.terms()) {
      // depth-first enumeration of alpha <= e with |alpha| <= max_order
      std::vector<size_t> positive;
      for (size_t k = 0; k < e.size(); ++k)
        if (e[k] > 0) positive.push_back(k);
      // recursive lambda over the positive axes
      auto rec = [&](auto&& self, size_t pi, int budget) -> void {
        if (pi == positive.size()) {
          if (exponents_order(alpha) > 0) out.insert(alpha);
          return;
        }
        const size_t k = positive[pi];
        const int cap = std::min(budget, e[k]);
        for (int v = 0; v <= cap; ++v) {
          alpha[k] = v;
          self(self, pi + 1, budget - v);
        }
        alpha[k] = 0;
      };
      rec(rec, 0, max_order);
    }
  }
  return out;
}

}  // namespace detail

inline ConstantsReport compute_constants(const CoefficientSystem& sys,
                                         const ConstantsOptions& opt = {}) {
  sys.check_shape();
  ConstantsReport rep;
  rep.univariate_grid = opt.univariate_points;
  rep.multivariate_grid = opt.multivariate_points;

  // drift constants
  std::array<double, 4> by_order{0.0, 0.0, 0.0, 0.0};  // max over |alpha| = m
  SupNormOptions sup_opt = opt.sup;
  sup_opt.points_per_axis = opt.multivariate_points;
  for (const Exponents& alpha : detail::derivative_candidates(sys, 3)) {
    const int order = exponents_order(alpha);
    double total = 0.0;
    for (const auto& b : sys.drift) {
      const PolyExpr der = b.partial(alpha);
      if (der.is_zero()) continue;
      total += sup_norm(der, opt.multivariate_points, sup_opt);
    }
    by_order[static_cast<size_t>(order)] =
        std::max(by_order[static_cast<size_t>(order)], total);
  }
  rep.lambda[0] = 0.0;
  rep.lambda[1] = by_order[1];
  rep.lambda[2] = std::max(rep.lambda[1], by_order[2]);
  rep.lambda[3] = std::max(rep.lambda[2], by_order[3]);

  // diffusion constants, per coordinate
  rep.nu_per_coordinate.resize(static_cast<size_t>(sys.dim));
  for (int i = 0; i < sys.dim; ++i) {
    const PolyExpr& a = sys.sqdiff[static_cast<size_t>(i)];
    const PolyExpr a2 = a.partial(1).partial(1);
    const PolyExpr a3 = a2.partial(1);
    const double s2 = sup_norm(a2, opt.univariate_points, opt.sup);
    const double s3 = sup_norm(a3, opt.univariate_points, opt.sup);
    auto& nu = rep.nu_per_coordinate[static_cast<size_t>(i)];
    nu.nu = {0.0, 0.0, 0.5 * s2, s3 + 1.5 * s2};
    nu.nu_tilde3 = nu.nu[3] - 0.5 * s3;
    rep.mu[2] = std::max(rep.mu[2], nu.nu[2]);
    rep.mu[3] = std::max(rep.mu[3], nu.nu[3]);
  }
  return rep;
}

enum class BoundKind { Full, DriftOnly, DiffusionOnly, SplitProduct };

inline BoundKind bound_kind_from_string(const std::string& s) {
  if (s == "full") return BoundKind::Full;
  if (s == "drift-only") return BoundKind::DriftOnly;
  if (s == "diffusion-only") return BoundKind::DiffusionOnly;
  if (s == "split-product") return BoundKind::SplitProduct;
  throw std::invalid_argument("unknown bound kind: " + s);
}

/// Exponential factor multiplying ||f||_{C^m} in the corresponding estimate.
inline double bound_factor(const ConstantsReport& rep, int m, double t,
                           BoundKind kind) {
  if (m < 0 || m > 3) throw std::invalid_argument("bound_factor: m must be 0..3");
  if (t < 0.0) throw std::invalid_argument("bound_factor: t must be >= 0");
  const double lam = rep.lambda[static_cast<size_t>(m)];
  const double mu = rep.mu[static_cast<size_t>(m)];
  switch (kind) {
    case BoundKind::Full:
      return std::exp((m * m * lam + mu) * t);
    case BoundKind::DriftOnly: {
      static constexpr std::array<double, 4> scale{0.0, 1.0, 4.0, 13.0};
      return std::exp(scale[static_cast<size_t>(m)] * lam * t);
    }
    case BoundKind::DiffusionOnly:
      return std::exp(mu * t);
    case BoundKind::SplitProduct: {
      const double drift_scale = m * m + (m == 3 ? 4.0 : 0.0);
      return std::exp((drift_scale * lam + mu) * t);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace sgcert
