#pragma once

// Deterministic low-discrepancy point sets (additive Weyl recurrence with
// square-root-of-prime increments).  Used wherever a check needs "scattered
// but reproducible" sample points.

#include <cmath>
#include <cstdint>
#include <vector>

namespace sgcert {

inline std::vector<double> weyl_alphas(int dim) {
  std::vector<double> a;
  a.reserve(dim);
  int found = 0;
  for (int n = 2; found < dim; ++n) {
    bool prime = n >= 2;
    for (int q = 2; q * q <= n; ++q)
      if (n % q == 0) { prime = false; break; }
    if (!prime) continue;
    double r = std::sqrt(static_cast<double>(n));
    a.push_back(r - std::floor(r));
    ++found;
  }
  return a;
}

/// k-th point of the d-dimensional Weyl sequence mapped into
/// [lo, hi]^d (componentwise).
inline std::vector<double> weyl_point(const std::vector<double>& alphas,
                                      uint64_t k, double lo = 0.0,
                                      double hi = 1.0) {
  std::vector<double> x(alphas.size());
  for (size_t j = 0; j < alphas.size(); ++j) {
    double v = 0.5 + static_cast<double>(k + 1) * alphas[j];
    v -= std::floor(v);
    x[j] = lo + (hi - lo) * v;
  }
  return x;
}

inline std::vector<std::vector<double>> weyl_points(int dim, int count,
                                                    double lo = 0.0,
                                                    double hi = 1.0) {
  const auto alphas = weyl_alphas(dim);
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) pts.push_back(weyl_point(alphas, k, lo, hi));
  return pts;
}

}  // namespace sgcert
