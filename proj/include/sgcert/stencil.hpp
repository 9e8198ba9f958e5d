#pragma once

// Finite-difference weight generation (Fornberg's recurrence) and the small
// stencils used for Monte Carlo derivative estimation and grid norms.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sgcert {

/// Weights w_j with sum_j w_j f(x_j) ~ f^(m)(z) of maximal order for the
/// given nodes.  Classic Fornberg recurrence.
inline std::vector<double> fornberg_weights(double z, const std::vector<double>& x,
                                            int m) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < m) throw std::invalid_argument("fornberg_weights: need > m nodes");
  std::vector<std::vector<double>> c(
      static_cast<size_t>(n + 1), std::vector<double>(static_cast<size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = x[static_cast<size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<size_t>(i)][static_cast<size_t>(k)] =
              c1 *
              (k * c[static_cast<size_t>(i - 1)][static_cast<size_t>(k - 1)] -
               c5 * c[static_cast<size_t>(i - 1)][static_cast<size_t>(k)]) /
              c2;
        c[static_cast<size_t>(i)][0] = -c1 * c5 * c[static_cast<size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<size_t>(j)][static_cast<size_t>(k)] =
            (c4 * c[static_cast<size_t>(j)][static_cast<size_t>(k)] -
             k * c[static_cast<size_t>(j)][static_cast<size_t>(k - 1)]) /
            c3;
      c[static_cast<size_t>(j)][0] = c4 * c[static_cast<size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<size_t>(n + 1));
  for (int j = 0; j <= n; ++j) w[static_cast<size_t>(j)] = c[static_cast<size_t>(j)][static_cast<size_t>(m)];
  return w;
}

/// Integer-offset stencil for f^(order) with spacing h already folded in.
struct AxisStencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

namespace detail {

inline AxisStencil stencil_from_offsets(const std::vector<int>& offsets, int order,
                                        double h) {
  std::vector<double> nodes(offsets.size());
  for (size_t j = 0; j < offsets.size(); ++j) nodes[j] = offsets[j];
  std::vector<double> w = fornberg_weights(0.0, nodes, order);
  const double hk = std::pow(h, order);
  AxisStencil s{offsets, w};
  for (double& v : s.weights) v /= hk;
  return s;
}

}  // namespace detail

/// Minimal second-order central stencil (offsets within +-2 for order 3).
inline AxisStencil central_stencil(int order, double h) {
  switch (order) {
    case 0: return {{0}, {1.0}};
    case 1: return detail::stencil_from_offsets({-1, 1}, 1, h);
    case 2: return detail::stencil_from_offsets({-1, 0, 1}, 2, h);
    case 3: return detail::stencil_from_offsets({-2, -1, 1, 2}, 3, h);
    default: throw std::invalid_argument("central_stencil: order must be 0..3");
  }
}

/// One-sided second-order stencil; direction +1 reaches right, -1 left.
inline AxisStencil one_sided_stencil(int order, double h, int direction) {
  if (order == 0) return {{0}, {1.0}};
  if (order < 0 || order > 3)
    throw std::invalid_argument("one_sided_stencil: order must be 0..3");
  std::vector<int> offsets;
  for (int j = 0; j <= order + 1; ++j) offsets.push_back(direction >= 0 ? j : -j);
  return detail::stencil_from_offsets(offsets, order, h);
}

/// Central stencil when it fits inside [lo, hi] around x, else one-sided.
inline AxisStencil boundary_aware_stencil(int order, double h, double x,
                                          double lo = 0.0, double hi = 1.0) {
  const int reach = (order >= 3) ? 2 : 1;
  if (x - reach * h >= lo && x + reach * h <= hi) return central_stencil(order, h);
  const int direction = (x - reach * h < lo) ? +1 : -1;
  return one_sided_stencil(order, h, direction);
}

/// Weights over a window of `width` consecutive grid nodes for the
/// derivative at in-window position `pos` (unit spacing, scale by 1/h^k).
inline std::vector<double> window_weights(int width, int pos, int order) {
  std::vector<double> nodes(static_cast<size_t>(width));
  for (int j = 0; j < width; ++j) nodes[static_cast<size_t>(j)] = j - pos;
  return fornberg_weights(0.0, nodes, order);
}

}  // namespace sgcert
