#pragma once

// The full semigroup T_t f = E[f(X_t^x)]: Monte Carlo evaluation, common
// random number finite differences for d^alpha(T_t f), empirical C^m norms,
// Trotter composition (T^1_{t/n} T^2_{t/n})^n on grids, the generator
// G = G_1 + G_2, and the certificate comparing the estimated norm against
// e^{(m^2 lambda_m + mu_m) t} ||f||_{C^m}.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgcert/constants.hpp"
#include "sgcert/drift_flow.hpp"
#include "sgcert/grid_function.hpp"
#include "sgcert/lowdisc.hpp"
#include "sgcert/sde.hpp"
#include "sgcert/stencil.hpp"
#include "sgcert/tensor_diffusion.hpp"
#include "sgcert/test_function.hpp"

namespace sgcert {

struct MeanSE {
  double value = 0.0;
  double se = 0.0;
};

namespace detail {

inline std::function<double(const double*)> terminal_functional(const TestFunction& f) {
  if (f.is_polynomial()) {
    CompiledPoly cp(f.poly());
    return [cp](const double* x) { return cp.eval(x); };
  }
  const double scale = f.cos_product_scale();
  const int d = f.dim();
  return [scale, d](const double* x) {
    double v = scale;
    for (int i = 0; i < d; ++i) v *= std::cos(std::numbers::pi * x[i]);
    return v;
  };
}

inline MeanSE mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double mu = s / n;
  double m2 = 0.0;
  for (double x : v) m2 += (x - mu) * (x - mu);
  const double var = v.size() > 1 ? m2 / (n - 1.0) : 0.0;
  return {mu, std::sqrt(var / n)};
}

}  // namespace detail

/// Sample mean and standard error of f over terminal states.
inline MeanSE mc_estimate(const CoefficientSystem& sys, const TestFunction& f,
                          const std::vector<double>& x, const SdeOptions& opt) {
  const CompiledSystem cs = CompiledSystem::from(sys);
  const auto functional = detail::terminal_functional(f);
  std::vector<double> vals(opt.n_paths);
  simulate_paths(cs, {x}, opt,
                 [&](uint64_t p, const double* st) { vals[p] = functional(st); });
  return detail::mean_se(vals);
}

// ---------------------------------------------------------------------------
// Finite-difference derivative estimation under common random numbers
// ---------------------------------------------------------------------------

namespace detail {

struct ProbeStencil {
  std::vector<std::vector<double>> points;
  struct Combo {
    Exponents alpha;
    std::vector<std::pair<size_t, double>> terms;  // (point index, weight)
  };
  std::vector<Combo> combos;
};

/// Tensor stencil for all requested multiindices around x, sharing points.
/// Per-axis stencils are central and switch to one-sided near the boundary.
inline ProbeStencil build_probe_stencil(const std::vector<double>& x,
                                        const std::vector<Exponents>& alphas,
                                        double h) {
  ProbeStencil st;
  std::map<std::vector<int>, size_t> index_of;
  const int d = static_cast<int>(x.size());

  for (const Exponents& alpha : alphas) {
    std::vector<std::pair<std::vector<int>, double>> acc{{std::vector<int>(static_cast<size_t>(d), 0), 1.0}};
    for (int axis = 0; axis < d; ++axis) {
      const int order = alpha[static_cast<size_t>(axis)];
      if (order == 0) continue;
      const AxisStencil s = boundary_aware_stencil(order, h, x[static_cast<size_t>(axis)]);
      std::vector<std::pair<std::vector<int>, double>> next;
      next.reserve(acc.size() * s.offsets.size());
      for (const auto& [off, w] : acc)
        for (size_t j = 0; j < s.offsets.size(); ++j) {
          if (s.weights[j] == 0.0) continue;
          std::vector<int> o = off;
          o[static_cast<size_t>(axis)] = s.offsets[j];
          next.emplace_back(std::move(o), w * s.weights[j]);
        }
      acc = std::move(next);
    }
    ProbeStencil::Combo combo;
    combo.alpha = alpha;
    for (auto& [off, w] : acc) {
      auto it = index_of.find(off);
      size_t idx;
      if (it == index_of.end()) {
        idx = st.points.size();
        index_of.emplace(off, idx);
        std::vector<double> pt = x;
        for (int axis = 0; axis < d; ++axis)
          pt[static_cast<size_t>(axis)] += h * off[static_cast<size_t>(axis)];
        st.points.push_back(std::move(pt));
      } else {
        idx = it->second;
      }
      combo.terms.emplace_back(idx, w);
    }
    st.combos.push_back(std::move(combo));
  }
  return st;
}

/// Runs the batch and returns one MeanSE per combo.  Under CRN all stencil
/// points share one noise lineage and the estimator is the per-path
/// combination; without CRN each point gets an independent lineage and the
/// errors add in quadrature (kept for the variance-reduction regression
/// test).
inline std::vector<MeanSE> evaluate_probe(const CompiledSystem& cs,
                                          const std::function<double(const double*)>& f,
                                          const ProbeStencil& st,
                                          const SdeOptions& opt, bool crn = true) {
  const size_t np = st.points.size();
  std::vector<MeanSE> out;
  out.reserve(st.combos.size());

  if (opt.t == 0.0) {
    for (const auto& combo : st.combos) {
      double v = 0.0;
      for (const auto& [idx, w] : combo.terms) v += w * f(st.points[idx].data());
      out.push_back({v, 0.0});
    }
    return out;
  }

  const int d = cs.dim;
  if (crn) {
    std::vector<std::vector<double>> fvals(np, std::vector<double>(opt.n_paths));
    simulate_paths(cs, st.points, opt, [&](uint64_t p, const double* states) {
      for (size_t s = 0; s < np; ++s)
        fvals[s][p] = f(states + s * static_cast<size_t>(d));
    });
    std::vector<double> combo_vals(opt.n_paths);
    for (const auto& combo : st.combos) {
      for (uint64_t p = 0; p < opt.n_paths; ++p) {
        double c = 0.0;
        for (const auto& [idx, w] : combo.terms) c += w * fvals[idx][p];
        combo_vals[p] = c;
      }
      out.push_back(mean_se(combo_vals));
    }
    return out;
  }

  // independent lineages per stencil point
  std::vector<MeanSE> point_stats(np);
  for (size_t s = 0; s < np; ++s) {
    SdeOptions o = opt;
    o.seed = splitmix64(opt.seed ^ (0x5851f42d4c957f2dull + s));
    std::vector<double> vals(o.n_paths);
    simulate_paths(cs, {st.points[s]}, o,
                   [&](uint64_t p, const double* states) { vals[p] = f(states); });
    point_stats[s] = mean_se(vals);
  }
  for (const auto& combo : st.combos) {
    double v = 0.0, var = 0.0;
    for (const auto& [idx, w] : combo.terms) {
      v += w * point_stats[idx].value;
      var += w * w * point_stats[idx].se * point_stats[idx].se;
    }
    out.push_back({v, std::sqrt(var)});
  }
  return out;
}

}  // namespace detail

/// Central (one-sided near the boundary) finite difference of T_t f along
/// the multiindex alpha, all stencil points driven by the same noise.
inline MeanSE fd_derivative(const CoefficientSystem& sys, const TestFunction& f,
                            const std::vector<double>& x, const Exponents& alpha,
                            double h, const SdeOptions& opt, bool crn = true) {
  if (exponents_order(alpha) > 3)
    throw std::invalid_argument("fd_derivative: |alpha| must be <= 3");
  if (h <= 0.0) throw std::invalid_argument("fd_derivative: h must be > 0");
  const auto st = detail::build_probe_stencil(x, {alpha}, h);
  for (const auto& pt : st.points)
    for (double v : pt)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("fd_derivative: stencil leaves the cube; reduce h");
  const CompiledSystem cs = CompiledSystem::from(sys);
  return detail::evaluate_probe(cs, detail::terminal_functional(f), st, opt, crn)[0];
}

// ---------------------------------------------------------------------------
// Empirical C^m norm
// ---------------------------------------------------------------------------

struct CmNormEntry {
  Exponents alpha;
  std::vector<double> point;
  double value = 0.0;
  double se = 0.0;
};

struct CmNormEstimate {
  int m = 0;
  double t = 0.0;
  double h = 0.0;
  std::vector<CmNormEntry> entries;
  size_t max_index = 0;
  bool sampled_alphas = false;  // d > 3: pure multiindices + sampled mixed
  bool sampled_sup = true;      // the sup is probed, hence a lower bound
  bool partial = false;         // stopped early on budget

  double estimate() const { return entries.empty() ? 0.0 : std::abs(entries[max_index].value); }
  double estimate_se() const { return entries.empty() ? 0.0 : entries[max_index].se; }
};

/// Interior probe layout: small tensor grids up to d = 3, then the cube
/// center plus 2d + 32 low-discrepancy points.
inline std::vector<std::vector<double>> default_probe_points(int d) {
  const double lo = 0.1, hi = 0.9;
  std::vector<std::vector<double>> pts;
  if (d <= 3) {
    const int per_axis = (d == 1) ? 9 : (d == 2 ? 5 : 4);
    std::vector<int> idx(static_cast<size_t>(d), 0);
    for (;;) {
      std::vector<double> x(static_cast<size_t>(d));
      for (int k = 0; k < d; ++k)
        x[static_cast<size_t>(k)] =
            lo + (hi - lo) * idx[static_cast<size_t>(k)] / (per_axis - 1);
      pts.push_back(std::move(x));
      int k = 0;
      while (k < d && ++idx[static_cast<size_t>(k)] == per_axis) {
        idx[static_cast<size_t>(k)] = 0;
        ++k;
      }
      if (k == d) break;
    }
    return pts;
  }
  pts.push_back(std::vector<double>(static_cast<size_t>(d), 0.5));
  for (auto& p : weyl_points(d, 2 * d + 32, lo, hi)) pts.push_back(std::move(p));
  return pts;
}

/// Multiindex set for the norm: everything up to order m when d <= 3, else
/// all pure derivatives plus `mixed_samples` deterministic mixed picks.
inline std::vector<Exponents> cm_multiindex_set(int d, int m, int mixed_samples,
                                                uint64_t seed, bool* sampled) {
  std::vector<Exponents> alphas;
  Exponents zero(static_cast<size_t>(d), 0);
  alphas.push_back(zero);
  if (sampled) *sampled = false;
  if (d <= 3) {
    Exponents alpha(static_cast<size_t>(d), 0);
    std::function<void(size_t, int)> rec = [&](size_t axis, int budget) {
      if (axis == alpha.size()) {
        if (exponents_order(alpha) > 0) alphas.push_back(alpha);
        return;
      }
      for (int v = 0; v <= budget; ++v) {
        alpha[axis] = v;
        rec(axis + 1, budget - v);
      }
      alpha[axis] = 0;
    };
    rec(0, m);
    return alphas;
  }
  if (sampled) *sampled = m >= 2;
  for (int i = 0; i < d; ++i)
    for (int k = 1; k <= m; ++k) {
      Exponents a = zero;
      a[static_cast<size_t>(i)] = k;
      alphas.push_back(a);
    }
  if (m >= 2) {
    uint64_t state = seed;
    std::map<Exponents, bool> seen;
    int produced = 0;
    int guard = 0;
    while (produced < mixed_samples && guard++ < 100 * mixed_samples) {
      state = detail::splitmix64(state);
      const int i = static_cast<int>(state % static_cast<uint64_t>(d));
      state = detail::splitmix64(state);
      int j = static_cast<int>(state % static_cast<uint64_t>(d));
      if (j == i) j = (j + 1) % d;
      Exponents a = zero;
      state = detail::splitmix64(state);
      const int extra = (m >= 3 && (state & 1ull)) ? 1 : 0;
      a[static_cast<size_t>(i)] = 1 + extra;
      a[static_cast<size_t>(j)] = 1;
      if (exponents_order(a) > m) a[static_cast<size_t>(i)] = 1;
      if (!seen[a]) {
        seen[a] = true;
        alphas.push_back(a);
        ++produced;
      }
    }
  }
  return alphas;
}

struct CmNormOptions {
  double h = 0.0;                      // 0: resolve from the SE-balance rule
  std::vector<std::vector<double>> probes;  // empty: default layout
  int mixed_alpha_samples = -1;        // d > 3; -1 means 2d
  uint64_t max_path_steps = UINT64_MAX;
  bool crn = true;
};

/// The h default balances stencil truncation against noise amplification:
/// h = clamp(max(1e-2, (3 SE0 / ||f||)^{1/(order+1)}), 1e-2, 0.04), with SE0
/// a pilot estimate of the plain MC error.
inline double resolve_fd_step(double se0, double f_scale, int order) {
  if (order == 0) return 1e-2;
  const double ratio = f_scale > 0.0 ? 3.0 * se0 / f_scale : 0.0;
  double h = std::max(1e-2, std::pow(ratio, 1.0 / (order + 1)));
  return std::min(h, 0.04);
}

inline CmNormEstimate cm_norm_estimate(const CoefficientSystem& sys,
                                       const TestFunction& f, int m, double t,
                                       const SdeOptions& sim,
                                       const CmNormOptions& opt = {}) {
  if (m < 0 || m > 3)
    throw std::invalid_argument("cm_norm_estimate: m must be 0..3");
  const int d = sys.dim;
  CmNormEstimate est;
  est.m = m;
  est.t = t;

  const CompiledSystem cs = CompiledSystem::from(sys);
  const auto functional = detail::terminal_functional(f);

  SdeOptions run = sim;
  run.t = t;

  double h = opt.h;
  if (h <= 0.0) {
    double se0 = 0.0;
    if (t > 0.0) {
      SdeOptions pilot = run;
      pilot.n_paths = std::max<uint64_t>(1000, run.n_paths / 10);
      const std::vector<double> center(static_cast<size_t>(d), 0.5);
      std::vector<double> vals(pilot.n_paths);
      simulate_paths(cs, {center}, pilot,
                     [&](uint64_t p, const double* st) { vals[p] = functional(st); });
      const MeanSE pilot_stat = detail::mean_se(vals);
      se0 = pilot_stat.se *
            std::sqrt(static_cast<double>(pilot.n_paths) / static_cast<double>(run.n_paths));
    }
    double f_scale = 1.0;
    if (auto cf = f.cm_norm_closed_form(0)) f_scale = std::max(*cf, 1e-12);
    h = resolve_fd_step(se0, f_scale, std::max(1, m));
  }
  est.h = h;

  const int mixed = opt.mixed_alpha_samples >= 0 ? opt.mixed_alpha_samples : 2 * d;
  bool sampled_alphas = false;
  const std::vector<Exponents> alphas =
      cm_multiindex_set(d, m, mixed, sim.seed ^ 0xa5a5a5a5ull, &sampled_alphas);
  est.sampled_alphas = sampled_alphas;

  std::vector<std::vector<double>> probes =
      opt.probes.empty() ? default_probe_points(d) : opt.probes;
  est.sampled_sup = true;

  const uint64_t n_steps = t > 0.0 ? sde_step_count(t, run.dt) : 0;
  uint64_t spent = 0;
  for (const auto& probe : probes) {
    const detail::ProbeStencil st = detail::build_probe_stencil(probe, alphas, h);
    const uint64_t cost = static_cast<uint64_t>(st.points.size()) * run.n_paths * n_steps;
    if (spent > 0 && spent + cost > opt.max_path_steps) {
      est.partial = true;
      break;
    }
    spent += cost;
    const std::vector<MeanSE> stats = detail::evaluate_probe(cs, functional, st, run, opt.crn);
    for (size_t a = 0; a < alphas.size(); ++a) {
      CmNormEntry entry;
      entry.alpha = alphas[a];
      entry.point = probe;
      entry.value = stats[a].value;
      entry.se = stats[a].se;
      est.entries.push_back(std::move(entry));
    }
  }
  for (size_t i = 0; i < est.entries.size(); ++i)
    if (std::abs(est.entries[i].value) > std::abs(est.entries[est.max_index].value))
      est.max_index = i;
  return est;
}

// ---------------------------------------------------------------------------
// Trotter composition and the generator
// ---------------------------------------------------------------------------

struct TrotterOptions {
  double dt_target = 1e-3;   // PDE step target for T^2
  double flow_tol = 1e-9;    // ODE tolerance for T^1
  InterpMode interp = InterpMode::Multilinear;
  int workers = 0;
};

struct TrotterResult {
  GridFunction g;
  std::vector<double> sup_after_half_step;  // 2n entries (T^2 then T^1 per step)
};

/// (T^1_{t/n} T^2_{t/n})^n f on the grid; T^2 acts first within each step.
inline TrotterResult trotter_compose(const CoefficientSystem& sys,
                                     const GridFunction& f, double t, int n,
                                     const TrotterOptions& opt = {}) {
  if (n < 1) throw std::invalid_argument("trotter_compose: n must be >= 1");
  if (f.spec().dim() > 4)
    throw std::invalid_argument("trotter_compose: grid mode supports d <= 4");
  const double tau = t / n;

  // the flow map for one substep is the same every step; cache it per node
  const DriftJet jet(sys, 0);
  const auto nodes = grid_nodes(f.spec());
  std::vector<std::vector<double>> flowed(nodes.size());
  const bool drift_zero = sys.drift_is_zero();
  if (!drift_zero) {
    parallel_for(nodes.size(), opt.workers, [&](uint64_t begin, uint64_t end) {
      for (uint64_t i = begin; i < end; ++i)
        flowed[i] = flow_with_jet(jet, nodes[i], tau, 0, opt.flow_tol).y;
    });
  }

  TrotterResult out{f, {}};
  T2Options t2;
  t2.dt_target = opt.dt_target;
  for (int step = 0; step < n; ++step) {
    out.g = apply_T2_grid(sys, out.g, tau, t2);
    out.sup_after_half_step.push_back(out.g.sup_norm());
    if (!drift_zero) {
      GridFunction next(f.spec());
      std::optional<SmoothGridEval> smooth;
      if (opt.interp == InterpMode::Cubic) smooth.emplace(out.g);
      parallel_for(nodes.size(), opt.workers, [&](uint64_t begin, uint64_t end) {
        for (uint64_t i = begin; i < end; ++i)
          next.values()[i] = (opt.interp == InterpMode::Cubic)
                                 ? (*smooth)(flowed[i])
                                 : out.g.interpolate(flowed[i]);
      });
      out.g = std::move(next);
    }
    out.sup_after_half_step.push_back(out.g.sup_norm());
  }
  return out;
}

struct GeneratorValue {
  double g = 0.0;   // G f(x) = G1 + G2
  double g1 = 0.0;  // drift part  sum_i b_i df/dx_i
  double g2 = 0.0;  // diffusion part (1/2) sum_i a_i(x_i) d2f/dx_i^2
};

inline GeneratorValue generator_apply(const CoefficientSystem& sys,
                                      const TestFunction& f,
                                      const std::vector<double>& x) {
  sys.check_shape();
  if (static_cast<int>(x.size()) != sys.dim)
    throw std::invalid_argument("generator_apply: point dimension mismatch");
  GeneratorValue out;
  const int d = sys.dim;
  for (int i = 0; i < d; ++i) {
    Exponents alpha(static_cast<size_t>(d), 0);
    alpha[static_cast<size_t>(i)] = 1;
    const double fi = f.partial_eval(alpha, x);
    if (!sys.drift[static_cast<size_t>(i)].is_zero())
      out.g1 += sys.drift[static_cast<size_t>(i)].eval(x) * fi;
    alpha[static_cast<size_t>(i)] = 2;
    const double fii = f.partial_eval(alpha, x);
    const double xi = x[static_cast<size_t>(i)];
    out.g2 += 0.5 * sys.sqdiff[static_cast<size_t>(i)].eval(&xi, 1) * fii;
  }
  out.g = out.g1 + out.g2;
  return out;
}

// ---------------------------------------------------------------------------
// Certification against the main estimate
// ---------------------------------------------------------------------------

struct CertifyOptions {
  SdeOptions sim;        // t inside is ignored; pass t to certify
  CmNormOptions norm;
  int f_norm_grid = 101;  // per-axis grid for the exact ||f||_{C^m}
};

struct CertificateReport {
  int m = 0;
  double t = 0.0;
  std::string f_desc;
  ConstantsReport constants;
  double f_norm = 0.0;
  double factor = 0.0;
  double bound = 0.0;
  CmNormEstimate estimate;
  bool pass = false;
  double margin = 0.0;  // bound - worst (|value| - 3 se)
};

/// Exact C^m norm of the payload: closed form for cosine products, grid
/// maxima of the exact symbolic partials for polynomials (a lower bound of
/// the true norm, which only tightens the certificate).
inline double exact_cm_norm(const TestFunction& f, int m, int grid_points = 101) {
  if (auto cf = f.cm_norm_closed_form(m)) return *cf;
  const PolyExpr& p = f.poly();
  const int d = p.arity();
  double best = 0.0;
  Exponents alpha(static_cast<size_t>(d), 0);
  std::function<void(size_t, int)> rec = [&](size_t axis, int budget) {
    if (axis == alpha.size()) {
      const PolyExpr der = p.partial(alpha);
      if (!der.is_zero()) best = std::max(best, sup_norm(der, grid_points));
      return;
    }
    for (int v = 0; v <= budget; ++v) {
      alpha[axis] = v;
      rec(axis + 1, budget - v);
    }
    alpha[axis] = 0;
  };
  rec(0, m);
  return best;
}

/// Theorem-style certificate for m in {0,1,2}: pass iff every sampled entry
/// satisfies |value| - 3 SE <= e^{(m^2 lambda_m + mu_m) t} ||f||_{C^m}.
inline CertificateReport certify(const CoefficientSystem& sys, const TestFunction& f,
                                 int m, double t, const CertifyOptions& opt) {
  if (m < 0 || m > 2)
    throw std::invalid_argument("certify: m must be 0, 1 or 2");
  CertificateReport rep;
  rep.m = m;
  rep.t = t;
  rep.f_desc = f.describe();
  rep.constants = compute_constants(sys);
  rep.factor = bound_factor(rep.constants, m, t, BoundKind::Full);
  rep.f_norm = exact_cm_norm(f, m, opt.f_norm_grid);
  rep.bound = rep.factor * rep.f_norm;
  rep.estimate = cm_norm_estimate(sys, f, m, t, opt.sim, opt.norm);

  rep.pass = true;
  double worst = -1e300;
  for (const auto& e : rep.estimate.entries) {
    const double lower = std::abs(e.value) - 3.0 * e.se;
    worst = std::max(worst, lower);
    if (lower > rep.bound) rep.pass = false;
  }
  rep.margin = rep.bound - worst;
  return rep;
}

}  // namespace sgcert
