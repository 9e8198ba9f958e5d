#pragma once

// Deterministic drift flow y(t,x) with its first and second variational
// systems integrated jointly, the drift semigroup T^1 f = f o y, and the
// empirical Gronwall checks
//   sum_i |dy_i/dx_j|        <= e^{lambda_1 t}
//   sum_i |d2y_i/dx_k dx_j|  <= (1/2)(e^{2 lambda_2 t} - 1) e^{lambda_2 t}.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sgcert/coefficient_system.hpp"
#include "sgcert/constants.hpp"
#include "sgcert/grid_function.hpp"
#include "sgcert/lowdisc.hpp"
#include "sgcert/ode.hpp"
#include "sgcert/parallel.hpp"
#include "sgcert/test_function.hpp"

namespace sgcert {

/// Drift field with precompiled first and second partials (zero entries
/// skipped so affine families cost nothing in the Hessian pass).
struct DriftJet {
  int dim = 0;
  std::vector<CompiledPoly> b;
  std::vector<std::vector<CompiledPoly>> grad;               // [i][k]
  std::vector<std::vector<std::vector<CompiledPoly>>> hess;  // [i][l][m], l<=m

  explicit DriftJet(const CoefficientSystem& sys, int order) : dim(sys.dim) {
    b.reserve(static_cast<size_t>(dim));
    for (const auto& bi : sys.drift) b.emplace_back(bi);
    if (order >= 1) {
      grad.resize(static_cast<size_t>(dim));
      for (int i = 0; i < dim; ++i) {
        grad[static_cast<size_t>(i)].reserve(static_cast<size_t>(dim));
        for (int k = 1; k <= dim; ++k)
          grad[static_cast<size_t>(i)].emplace_back(sys.drift[static_cast<size_t>(i)].partial(k));
      }
    }
    if (order >= 2) {
      hess.resize(static_cast<size_t>(dim));
      for (int i = 0; i < dim; ++i) {
        auto& hi = hess[static_cast<size_t>(i)];
        hi.resize(static_cast<size_t>(dim));
        for (int l = 1; l <= dim; ++l) {
          const PolyExpr dl = sys.drift[static_cast<size_t>(i)].partial(l);
          for (int m = l; m <= dim; ++m)
            hi[static_cast<size_t>(l - 1)].emplace_back(dl.partial(m));
        }
      }
    }
  }

  const CompiledPoly& hess_entry(int i, int l, int m) const {
    if (l > m) std::swap(l, m);
    return hess[static_cast<size_t>(i)][static_cast<size_t>(l)][static_cast<size_t>(m - l)];
  }
};

struct FlowResult {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> jac;   // [i*d + j] when order >= 1
  std::vector<double> hess;  // [(i*d + k)*d + j] when order >= 2
  OdeStats stats;
  double clamp_accum = 0.0;

  double jac_at(int i, int j, int d) const { return jac[static_cast<size_t>(i * d + j)]; }
  double hess_at(int i, int k, int j, int d) const {
    return hess[static_cast<size_t>((i * d + k) * d + j)];
  }
};

/// Integrates the state together with the requested variational systems,
/// reusing a precompiled jet (the grid/ensemble entry point).
inline FlowResult flow_with_jet(const DriftJet& jet, const std::vector<double>& x,
                                double t, int order = 0, double tol = 1e-9) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("flow: order must be 0, 1 or 2");
  if (t < 0.0) throw std::invalid_argument("flow: t must be >= 0");
  if (static_cast<int>(x.size()) != jet.dim)
    throw std::invalid_argument("flow: point dimension mismatch");
  for (double v : x)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("flow: start point outside [0,1]^d");

  const int d = jet.dim;
  const size_t ny = static_cast<size_t>(d);
  const size_t nj = order >= 1 ? static_cast<size_t>(d) * static_cast<size_t>(d) : 0;
  const size_t nh = order >= 2 ? nj * static_cast<size_t>(d) : 0;

  std::vector<double> state(ny + nj + nh, 0.0);
  for (int i = 0; i < d; ++i) state[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
  for (int i = 0; order >= 1 && i < d; ++i)
    state[ny + static_cast<size_t>(i * d + i)] = 1.0;

  FlowResult out;
  out.t = t;
  out.x = x;

  std::vector<double> gbuf(nj), hbuf;
  if (order >= 2) hbuf.resize(static_cast<size_t>(d) * static_cast<size_t>(d));

  auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& ds) {
    const double* y = s.data();
    for (int i = 0; i < d; ++i)
      ds[static_cast<size_t>(i)] = jet.b[static_cast<size_t>(i)].eval(y);
    if (order >= 1) {
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          gbuf[static_cast<size_t>(i * d + k)] =
              jet.grad[static_cast<size_t>(i)][static_cast<size_t>(k)].empty()
                  ? 0.0
                  : jet.grad[static_cast<size_t>(i)][static_cast<size_t>(k)].eval(y);
      const double* J = s.data() + ny;
      double* dJ = ds.data() + ny;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double acc = 0.0;
          for (int k = 0; k < d; ++k)
            acc += gbuf[static_cast<size_t>(i * d + k)] * J[static_cast<size_t>(k * d + j)];
          dJ[static_cast<size_t>(i * d + j)] = acc;
        }
      if (order >= 2) {
        const double* H = s.data() + ny + nj;
        double* dH = ds.data() + ny + nj;
        for (int i = 0; i < d; ++i) {
          bool any_hess = false;
          for (int l = 0; l < d && !any_hess; ++l)
            for (int m = l; m < d && !any_hess; ++m)
              if (!jet.hess_entry(i, l, m).empty()) any_hess = true;
          if (any_hess) {
            for (int l = 0; l < d; ++l)
              for (int m = 0; m < d; ++m)
                hbuf[static_cast<size_t>(l * d + m)] =
                    jet.hess_entry(i, l, m).empty() ? 0.0
                                                    : jet.hess_entry(i, l, m).eval(y);
          }
          for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j) {
              double acc = 0.0;
              if (any_hess) {
                for (int m = 0; m < d; ++m) {
                  if (J[static_cast<size_t>(m * d + k)] == 0.0) continue;
                  double inner = 0.0;
                  for (int l = 0; l < d; ++l)
                    inner += hbuf[static_cast<size_t>(l * d + m)] *
                             J[static_cast<size_t>(l * d + j)];
                  acc += inner * J[static_cast<size_t>(m * d + k)];
                }
              }
              for (int l = 0; l < d; ++l)
                acc += gbuf[static_cast<size_t>(i * d + l)] *
                       H[static_cast<size_t>((l * d + k) * d + j)];
              dH[static_cast<size_t>((i * d + k) * d + j)] = acc;
            }
        }
      }
    }
  };

  OdeOptions opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol;
  opts.initial_step = std::min(1e-2, t > 0 ? t : 1e-2);
  double clamp_accum = 0.0;
  auto post = [&](std::vector<double>& s) {
    for (int i = 0; i < d; ++i) {
      double& v = s[static_cast<size_t>(i)];
      if (v < 0.0) {
        clamp_accum += -v;
        v = 0.0;
      } else if (v > 1.0) {
        clamp_accum += v - 1.0;
        v = 1.0;
      }
    }
  };
  out.stats = integrate_dopri5(rhs, state, 0.0, t, opts, post);
  out.clamp_accum = clamp_accum;

  out.y.assign(state.begin(), state.begin() + static_cast<long>(ny));
  if (order >= 1)
    out.jac.assign(state.begin() + static_cast<long>(ny),
                   state.begin() + static_cast<long>(ny + nj));
  if (order >= 2) out.hess.assign(state.begin() + static_cast<long>(ny + nj), state.end());
  return out;
}

inline FlowResult flow(const CoefficientSystem& sys, const std::vector<double>& x,
                       double t, int order = 0, double tol = 1e-9) {
  sys.check_shape();
  const DriftJet jet(sys, order);
  return flow_with_jet(jet, x, t, order, tol);
}

enum class InterpMode { Multilinear, Cubic };

/// T^1_t applied on a grid: output node values f(y(t, node)).
inline GridFunction apply_T1(const CoefficientSystem& sys, const TestFunction& f,
                             double t, const GridSpec& grid, double tol = 1e-9,
                             int workers = 0) {
  GridFunction out(grid);
  const DriftJet jet(sys, 0);
  const std::vector<std::vector<double>> nodes = grid_nodes(grid);
  parallel_for(nodes.size(), workers, [&](uint64_t begin, uint64_t end) {
    for (uint64_t i = begin; i < end; ++i) {
      const FlowResult fr = flow_with_jet(jet, nodes[i], t, 0, tol);
      out.values()[i] = f.eval(fr.y);
    }
  });
  return out;
}

/// Same, with a grid payload: values g(y(t, node)) under the chosen
/// interpolation.  Multilinear keeps the sup norm nonincreasing exactly;
/// cubic keeps interpolation error O(h^4) for derivative-norm checks.
inline GridFunction apply_T1(const CoefficientSystem& sys, const GridFunction& g,
                             double t, double tol = 1e-9,
                             InterpMode mode = InterpMode::Multilinear,
                             int workers = 0) {
  const GridSpec& grid = g.spec();
  GridFunction out(grid);
  std::optional<SmoothGridEval> smooth;
  if (mode == InterpMode::Cubic) smooth.emplace(g);

  const DriftJet jet(sys, 0);
  const std::vector<std::vector<double>> nodes = grid_nodes(grid);
  parallel_for(nodes.size(), workers, [&](uint64_t begin, uint64_t end) {
    for (uint64_t i = begin; i < end; ++i) {
      const FlowResult fr = flow_with_jet(jet, nodes[i], t, 0, tol);
      out.values()[i] = (mode == InterpMode::Cubic) ? (*smooth)(fr.y)
                                                    : g.interpolate(fr.y);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Gronwall checks (drift variational bounds)
// ---------------------------------------------------------------------------

struct GronwallRow {
  std::string bound;        // "C1" or "C2"
  double observed = 0.0;    // worst sum over sampled points
  double theoretical = 0.0; // Gronwall bound
  double ratio = 0.0;
  std::vector<double> worst_point;
  bool vacuous = false;     // 0/0 case (zero drift)
  bool pass = false;
};

struct GronwallReport {
  double t = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;
  std::vector<GronwallRow> rows;
  bool pass = true;
};

/// Evaluates the variational bounds at low-discrepancy sample points.
inline GronwallReport check_gronwall(const CoefficientSystem& sys,
                                     const ConstantsReport& constants, double t,
                                     int order, int sample_points,
                                     double tol_margin = 1e-6, double tol = 1e-10,
                                     int workers = 0) {
  if (order < 1 || order > 2)
    throw std::invalid_argument("check_gronwall: order must be 1 or 2");
  GronwallReport rep;
  rep.t = t;
  rep.lambda1 = constants.lambda[1];
  rep.lambda2 = constants.lambda[2];
  const int d = sys.dim;

  const auto pts = weyl_points(d, sample_points);
  const DriftJet jet(sys, order);
  std::vector<double> worst1(pts.size(), 0.0), worst2(pts.size(), 0.0);
  parallel_for(pts.size(), workers, [&](uint64_t begin, uint64_t end) {
    for (uint64_t n = begin; n < end; ++n) {
      const FlowResult fr = flow_with_jet(jet, pts[n], t, order, tol);
      double w1 = 0.0;
      for (int j = 0; j < d; ++j) {
        double colsum = 0.0;
        for (int i = 0; i < d; ++i) colsum += std::abs(fr.jac_at(i, j, d));
        w1 = std::max(w1, colsum);
      }
      worst1[n] = w1;
      if (order >= 2) {
        double w2 = 0.0;
        for (int k = 0; k < d; ++k)
          for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += std::abs(fr.hess_at(i, k, j, d));
            w2 = std::max(w2, s);
          }
        worst2[n] = w2;
      }
    }
  });

  auto push_row = [&](const std::string& name, const std::vector<double>& worst,
                      double bound) {
    GronwallRow row;
    row.bound = name;
    size_t arg = 0;
    for (size_t n = 0; n < worst.size(); ++n)
      if (worst[n] > worst[arg]) arg = n;
    row.observed = worst.empty() ? 0.0 : worst[arg];
    row.theoretical = bound;
    row.worst_point = worst.empty() ? std::vector<double>{} : pts[arg];
    if (bound <= 1e-300) {
      row.vacuous = true;
      row.ratio = 0.0;
      row.pass = row.observed <= tol_margin;
    } else {
      row.ratio = row.observed / bound;
      row.pass = row.ratio <= 1.0 + tol_margin;
    }
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(std::move(row));
  };

  push_row("C1", worst1, std::exp(rep.lambda1 * t));
  if (order >= 2)
    push_row("C2", worst2,
             0.5 * (std::exp(2.0 * rep.lambda2 * t) - 1.0) * std::exp(rep.lambda2 * t));
  return rep;
}

}  // namespace sgcert
