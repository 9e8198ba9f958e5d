#pragma once

// Values on a uniform tensor grid over [0,1]^d with multilinear
// interpolation, discrete partial derivatives (5-point Fornberg windows,
// one-sided at the boundary), and discrete C^m norms.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgcert/poly.hpp"
#include "sgcert/stencil.hpp"

namespace sgcert {

struct GridSpec {
  std::vector<int> pts;  // nodes per axis, each >= 2

  static GridSpec uniform(int dim, int points_per_axis) {
    if (dim < 1 || points_per_axis < 2)
      throw std::invalid_argument("GridSpec: bad dimensions");
    GridSpec g;
    g.pts.assign(static_cast<size_t>(dim), points_per_axis);
    return g;
  }

  int dim() const { return static_cast<int>(pts.size()); }

  size_t total() const {
    size_t n = 1;
    for (int p : pts) n *= static_cast<size_t>(p);
    return n;
  }

  double node(int axis, int idx) const {
    return static_cast<double>(idx) / (pts[static_cast<size_t>(axis)] - 1);
  }

  double spacing(int axis) const {
    return 1.0 / (pts[static_cast<size_t>(axis)] - 1);
  }

  bool operator==(const GridSpec&) const = default;
};

/// All node coordinates in flat (row-major, last axis fastest) order.
inline std::vector<std::vector<double>> grid_nodes(const GridSpec& spec) {
  std::vector<std::vector<double>> nodes;
  nodes.reserve(spec.total());
  std::vector<int> idx(static_cast<size_t>(spec.dim()), 0);
  for (size_t flat = 0; flat < spec.total(); ++flat) {
    std::vector<double> x(static_cast<size_t>(spec.dim()));
    for (int k = 0; k < spec.dim(); ++k)
      x[static_cast<size_t>(k)] = spec.node(k, idx[static_cast<size_t>(k)]);
    nodes.push_back(std::move(x));
    int k = spec.dim() - 1;
    while (k >= 0 && ++idx[static_cast<size_t>(k)] == spec.pts[static_cast<size_t>(k)]) {
      idx[static_cast<size_t>(k)] = 0;
      --k;
    }
  }
  return nodes;
}

class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(GridSpec spec)
      : spec_(std::move(spec)), values_(spec_.total(), 0.0) {
    init_strides();
  }

  static GridFunction sample(const GridSpec& spec,
                             const std::function<double(const std::vector<double>&)>& f) {
    GridFunction g(spec);
    std::vector<int> idx(static_cast<size_t>(spec.dim()), 0);
    std::vector<double> x(static_cast<size_t>(spec.dim()), 0.0);
    for (size_t flat = 0; flat < g.values_.size(); ++flat) {
      for (int k = 0; k < spec.dim(); ++k)
        x[static_cast<size_t>(k)] = spec.node(k, idx[static_cast<size_t>(k)]);
      g.values_[flat] = f(x);
      g.advance(idx);
    }
    return g;
  }

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  size_t flat_index(const std::vector<int>& idx) const {
    size_t f = 0;
    for (int k = 0; k < spec_.dim(); ++k)
      f += static_cast<size_t>(idx[static_cast<size_t>(k)]) * strides_[static_cast<size_t>(k)];
    return f;
  }

  double& at(const std::vector<int>& idx) { return values_[flat_index(idx)]; }
  double at(const std::vector<int>& idx) const { return values_[flat_index(idx)]; }

  /// Multilinear interpolation; never overshoots the nodal range.
  double interpolate(const std::vector<double>& x) const {
    const int d = spec_.dim();
    if (static_cast<int>(x.size()) != d)
      throw std::invalid_argument("GridFunction::interpolate: dimension mismatch");
    std::vector<int> base(static_cast<size_t>(d));
    std::vector<double> frac(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
      const int n = spec_.pts[static_cast<size_t>(k)];
      double u = x[static_cast<size_t>(k)] * (n - 1);
      int j = static_cast<int>(std::floor(u));
      j = std::max(0, std::min(j, n - 2));
      base[static_cast<size_t>(k)] = j;
      frac[static_cast<size_t>(k)] = std::min(1.0, std::max(0.0, u - j));
    }
    double acc = 0.0;
    const uint32_t corners = 1u << d;
    std::vector<int> idx(static_cast<size_t>(d));
    for (uint32_t mask = 0; mask < corners; ++mask) {
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        const bool hi = (mask >> k) & 1u;
        w *= hi ? frac[static_cast<size_t>(k)] : 1.0 - frac[static_cast<size_t>(k)];
        idx[static_cast<size_t>(k)] = base[static_cast<size_t>(k)] + (hi ? 1 : 0);
      }
      if (w != 0.0) acc += w * at(idx);
    }
    return acc;
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_diff(const GridFunction& other) const {
    if (!(spec_ == other.spec_))
      throw std::invalid_argument("GridFunction::max_abs_diff: spec mismatch");
    double m = 0.0;
    for (size_t i = 0; i < values_.size(); ++i)
      m = std::max(m, std::abs(values_[i] - other.values_[i]));
    return m;
  }

  /// Discrete d^alpha via 5-node Fornberg windows applied axis by axis.
  GridFunction discrete_partial(const Exponents& alpha) const {
    if (static_cast<int>(alpha.size()) != spec_.dim())
      throw std::invalid_argument("discrete_partial: multiindex length mismatch");
    GridFunction out = *this;
    for (int axis = 0; axis < spec_.dim(); ++axis)
      for (int r = 0; r < alpha[static_cast<size_t>(axis)]; ++r)
        out = out.axis_derivative(axis, 1);
    return out;
  }

  struct CmNorm {
    double value = 0.0;
    std::map<Exponents, double> per_alpha;
  };

  /// max over |alpha| <= m of the sup of the discrete d^alpha values.
  CmNorm discrete_cm_norm(int m) const {
    CmNorm out;
    Exponents alpha(static_cast<size_t>(spec_.dim()), 0);
    enumerate_alphas(alpha, 0, m, [&](const Exponents& a) {
      const double s = discrete_partial(a).sup_norm();
      out.per_alpha[a] = s;
      out.value = std::max(out.value, s);
    });
    return out;
  }

  /// Iterate 1D fibers along `axis`; `body(base_flat, stride, count)`.
  void for_each_line(int axis,
                     const std::function<void(size_t, size_t, int)>& body) const {
    const int d = spec_.dim();
    const size_t stride = strides_[static_cast<size_t>(axis)];
    const int count = spec_.pts[static_cast<size_t>(axis)];
    std::vector<int> idx(static_cast<size_t>(d), 0);
    for (;;) {
      body(flat_index(idx), stride, count);
      int k = d - 1;
      for (; k >= 0; --k) {
        if (k == axis) continue;
        if (++idx[static_cast<size_t>(k)] < spec_.pts[static_cast<size_t>(k)]) break;
        idx[static_cast<size_t>(k)] = 0;
      }
      if (k < 0) break;
    }
  }

 private:
  /// One application of the order-`order` derivative along an axis.
  GridFunction axis_derivative(int axis, int order) const {
    const int n = spec_.pts[static_cast<size_t>(axis)];
    const int width = std::min(5, n);
    if (width <= order)
      throw std::invalid_argument("axis_derivative: grid too coarse");
    const double h = spec_.spacing(axis);
    // weights per in-window position, unit spacing
    std::vector<std::vector<double>> wtab(static_cast<size_t>(width));
    for (int pos = 0; pos < width; ++pos)
      wtab[static_cast<size_t>(pos)] = window_weights(width, pos, order);
    const double hk = std::pow(h, order);

    GridFunction out(spec_);
    std::vector<double> line(static_cast<size_t>(n));
    for_each_line(axis, [&](size_t base, size_t stride, int count) {
      for (int i = 0; i < count; ++i)
        line[static_cast<size_t>(i)] = values_[base + static_cast<size_t>(i) * stride];
      for (int i = 0; i < count; ++i) {
        int start = std::max(0, std::min(i - width / 2, count - width));
        const int pos = i - start;
        double acc = 0.0;
        const auto& w = wtab[static_cast<size_t>(pos)];
        for (int j = 0; j < width; ++j)
          acc += w[static_cast<size_t>(j)] * line[static_cast<size_t>(start + j)];
        out.values_[base + static_cast<size_t>(i) * stride] = acc / hk;
      }
    });
    return out;
  }

  template <typename F>
  static void enumerate_alphas(Exponents& alpha, size_t axis, int budget, F&& body) {
    if (axis == alpha.size()) {
      body(alpha);
      return;
    }
    for (int v = 0; v <= budget; ++v) {
      alpha[axis] = v;
      enumerate_alphas(alpha, axis + 1, budget - v, body);
    }
    alpha[axis] = 0;
  }

  void advance(std::vector<int>& idx) const {
    int k = spec_.dim() - 1;
    while (k >= 0) {
      if (++idx[static_cast<size_t>(k)] < spec_.pts[static_cast<size_t>(k)]) return;
      idx[static_cast<size_t>(k)] = 0;
      --k;
    }
  }

  void init_strides() {
    const int d = spec_.dim();
    strides_.assign(static_cast<size_t>(d), 1);
    for (int k = d - 2; k >= 0; --k)
      strides_[static_cast<size_t>(k)] =
          strides_[static_cast<size_t>(k + 1)] *
          static_cast<size_t>(spec_.pts[static_cast<size_t>(k + 1)]);
  }

  GridSpec spec_;
  std::vector<double> values_;
  std::vector<size_t> strides_;
};

// ---------------------------------------------------------------------------
// Cubic interpolation (not-a-knot splines), d <= 2.  Used where composed
// grid functions feed higher-order finite differences; the O(h^4) pointwise
// error keeps derivative noise below the check tolerances, which multilinear
// interpolation cannot do.
// ---------------------------------------------------------------------------

class CubicSpline1D {
 public:
  CubicSpline1D() = default;

  /// Node values on the uniform grid {0, h, ..., 1}, n >= 4 nodes.
  explicit CubicSpline1D(const std::vector<double>& y) { fit(y); }

  void fit(const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    if (n < 4) throw std::invalid_argument("CubicSpline1D: need >= 4 nodes");
    y_ = y;
    h_ = 1.0 / (n - 1);
    m_.assign(static_cast<size_t>(n), 0.0);

    // Solve for second derivatives M with not-a-knot ends:
    // M_0 - 2 M_1 + M_2 = 0 and M_{n-3} - 2 M_{n-2} + M_{n-1} = 0.
    // Interior rows: M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1}-2y_i+y_{i-1})/h^2.
    const int m = n - 2;  // unknowns M_1..M_{n-2}
    std::vector<double> diag(static_cast<size_t>(m)), upper(static_cast<size_t>(m)),
        lower(static_cast<size_t>(m)), rhs(static_cast<size_t>(m));
    for (int i = 1; i <= n - 2; ++i) {
      const int r = i - 1;
      diag[static_cast<size_t>(r)] = 4.0;
      lower[static_cast<size_t>(r)] = 1.0;
      upper[static_cast<size_t>(r)] = 1.0;
      rhs[static_cast<size_t>(r)] =
          6.0 * (y[static_cast<size_t>(i + 1)] - 2.0 * y[static_cast<size_t>(i)] +
                 y[static_cast<size_t>(i - 1)]) /
          (h_ * h_);
    }
    // substitute M_0 = 2M_1 - M_2 into the first row and mirror at the end
    diag[0] += 2.0 * 1.0;   // +2 M_1
    upper[0] += -1.0;       // -M_2
    diag[static_cast<size_t>(m - 1)] += 2.0;
    lower[static_cast<size_t>(m - 1)] += -1.0;

    // Thomas solve
    for (int r = 1; r < m; ++r) {
      const double w = lower[static_cast<size_t>(r)] / diag[static_cast<size_t>(r - 1)];
      diag[static_cast<size_t>(r)] -= w * upper[static_cast<size_t>(r - 1)];
      rhs[static_cast<size_t>(r)] -= w * rhs[static_cast<size_t>(r - 1)];
    }
    std::vector<double> sol(static_cast<size_t>(m));
    sol[static_cast<size_t>(m - 1)] =
        rhs[static_cast<size_t>(m - 1)] / diag[static_cast<size_t>(m - 1)];
    for (int r = m - 2; r >= 0; --r)
      sol[static_cast<size_t>(r)] = (rhs[static_cast<size_t>(r)] -
                                     upper[static_cast<size_t>(r)] *
                                         sol[static_cast<size_t>(r + 1)]) /
                                    diag[static_cast<size_t>(r)];
    for (int i = 1; i <= n - 2; ++i) m_[static_cast<size_t>(i)] = sol[static_cast<size_t>(i - 1)];
    m_[0] = 2.0 * m_[1] - m_[2];
    m_[static_cast<size_t>(n - 1)] =
        2.0 * m_[static_cast<size_t>(n - 2)] - m_[static_cast<size_t>(n - 3)];
  }

  double operator()(double x) const {
    const int n = static_cast<int>(y_.size());
    double u = x / h_;
    int j = static_cast<int>(std::floor(u));
    j = std::max(0, std::min(j, n - 2));
    const double xl = j * h_, xr = (j + 1) * h_;
    const double A = (xr - x) / h_, B = (x - xl) / h_;
    return A * y_[static_cast<size_t>(j)] + B * y_[static_cast<size_t>(j + 1)] +
           ((A * A * A - A) * m_[static_cast<size_t>(j)] +
            (B * B * B - B) * m_[static_cast<size_t>(j + 1)]) *
               (h_ * h_) / 6.0;
  }

 private:
  std::vector<double> y_;
  std::vector<double> m_;
  double h_ = 0.0;
};

/// Smooth (cubic) evaluation of a GridFunction; supports d in {1, 2}.
class SmoothGridEval {
 public:
  explicit SmoothGridEval(const GridFunction& g) : grid_(&g) {
    const int d = g.spec().dim();
    if (d > 2)
      throw std::invalid_argument("SmoothGridEval: cubic mode supports d <= 2");
    if (d == 1) {
      spline1d_.fit(g.values());
    } else {
      const int n0 = g.spec().pts[0];
      const int n1 = g.spec().pts[1];
      rows_.reserve(static_cast<size_t>(n0));
      std::vector<double> row(static_cast<size_t>(n1));
      for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j)
          row[static_cast<size_t>(j)] =
              g.values()[static_cast<size_t>(i) * static_cast<size_t>(n1) +
                         static_cast<size_t>(j)];
        rows_.emplace_back(row);
      }
    }
  }

  double operator()(const std::vector<double>& x) const {
    const int d = grid_->spec().dim();
    if (d == 1) return spline1d_(x[0]);
    std::vector<double> column(rows_.size());
    for (size_t i = 0; i < rows_.size(); ++i) column[i] = rows_[i](x[1]);
    CubicSpline1D s(column);
    return s(x[0]);
  }

 private:
  const GridFunction* grid_;
  CubicSpline1D spline1d_;
  std::vector<CubicSpline1D> rows_;
};

}  // namespace sgcert
