#pragma once

// Full-truncation Euler-Maruyama on [0,1]^d:
//   X_{k+1}(i) = clamp(X_k(i) + b_i(X_k) dt + sqrt(a_i(X_k(i))^+) sqrt(dt) Z_k(i))
// Noise is counter-based per (coordinate stream, path, step), so ensembles
// are bitwise reproducible for a fixed root seed regardless of worker count,
// and several start points can be advanced in lockstep under common random
// numbers.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgcert/coefficient_system.hpp"
#include "sgcert/parallel.hpp"
#include "sgcert/poly.hpp"
#include "sgcert/rng.hpp"

namespace sgcert {

struct SdeOptions {
  double t = 1.0;
  double dt = 1e-3;
  uint64_t n_paths = 10000;
  uint64_t seed = 12345;
  int workers = 0;  // 0: hardware concurrency
};

inline uint64_t sde_step_count(double t, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("sde: dt must be > 0");
  if (t < 0.0) throw std::invalid_argument("sde: t must be >= 0");
  if (t == 0.0) return 0;
  const double raw = t / dt;
  uint64_t n = static_cast<uint64_t>(std::llround(raw));
  if (n == 0 || std::abs(static_cast<double>(n) - raw) > 1e-9 * raw)
    n = static_cast<uint64_t>(std::ceil(raw - 1e-12));
  return std::max<uint64_t>(n, 1);
}

struct CompiledSystem {
  int dim = 0;
  std::vector<CompiledPoly> drift;
  std::vector<CompiledPoly> sqdiff;
  bool drift_zero = true;

  static CompiledSystem from(const CoefficientSystem& sys) {
    sys.check_shape();
    CompiledSystem cs;
    cs.dim = sys.dim;
    cs.drift_zero = sys.drift_is_zero();
    for (const auto& b : sys.drift) cs.drift.emplace_back(b);
    for (const auto& a : sys.sqdiff) cs.sqdiff.emplace_back(a);
    return cs;
  }
};

namespace detail {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace detail

/// Advances `n_starts` copies of the SDE in lockstep under shared noise and
/// hands the final states of each path to `consume(path, states)` where
/// states is laid out [start * dim + i].  `consume` must be safe for
/// concurrent calls on distinct paths.
inline void simulate_paths(
    const CompiledSystem& cs, const std::vector<std::vector<double>>& starts,
    const SdeOptions& opt,
    const std::function<void(uint64_t, const double*)>& consume) {
  const int d = cs.dim;
  const size_t ns = starts.size();
  for (const auto& x0 : starts) {
    if (static_cast<int>(x0.size()) != d)
      throw std::invalid_argument("simulate_paths: start point dimension mismatch");
    for (double v : x0)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("simulate_paths: start point outside [0,1]^d");
  }
  const uint64_t n_steps = sde_step_count(opt.t, opt.dt);
  const double dt = n_steps == 0 ? 0.0 : opt.t / static_cast<double>(n_steps);
  const double sq_dt = std::sqrt(dt);

  std::vector<NoiseStream> noise;
  noise.reserve(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) noise.push_back(NoiseStream{opt.seed, static_cast<uint64_t>(i)});

  parallel_for(opt.n_paths, opt.workers, [&](uint64_t begin, uint64_t end) {
    std::vector<double> st(ns * static_cast<size_t>(d));
    std::vector<double> z(static_cast<size_t>(d));
    std::vector<double> bvec(static_cast<size_t>(d));
    for (uint64_t p = begin; p < end; ++p) {
      for (size_t s = 0; s < ns; ++s)
        for (int i = 0; i < d; ++i)
          st[s * static_cast<size_t>(d) + static_cast<size_t>(i)] = starts[s][static_cast<size_t>(i)];
      for (uint64_t k = 0; k < n_steps; ++k) {
        for (int i = 0; i < d; ++i)
          z[static_cast<size_t>(i)] = noise[static_cast<size_t>(i)].gaussian(p, k);
        for (size_t s = 0; s < ns; ++s) {
          double* x = st.data() + s * static_cast<size_t>(d);
          if (!cs.drift_zero)
            for (int i = 0; i < d; ++i)
              bvec[static_cast<size_t>(i)] = cs.drift[static_cast<size_t>(i)].eval(x);
          for (int i = 0; i < d; ++i) {
            const double xi = x[i];
            double a = cs.sqdiff[static_cast<size_t>(i)].eval(&xi);
            if (a < 0.0) a = 0.0;
            double v = xi + std::sqrt(a) * sq_dt * z[static_cast<size_t>(i)];
            if (!cs.drift_zero) v += bvec[static_cast<size_t>(i)] * dt;
            x[i] = detail::clamp01(v);
          }
        }
      }
      consume(p, st.data());
    }
  });
}

struct EnsembleND {
  std::vector<double> x0;
  double t = 0.0;
  double dt_eff = 0.0;
  uint64_t n_paths = 0;
  uint64_t seed = 0;
  std::vector<double> terminal;  // [path * d + i]
  std::vector<double> mean, variance, se_mean, se_var, absorbed_fraction;

  int dim() const { return static_cast<int>(x0.size()); }

  void summarize() {
    const int d = dim();
    mean.assign(static_cast<size_t>(d), 0.0);
    variance.assign(static_cast<size_t>(d), 0.0);
    se_mean.assign(static_cast<size_t>(d), 0.0);
    se_var.assign(static_cast<size_t>(d), 0.0);
    absorbed_fraction.assign(static_cast<size_t>(d), 0.0);
    const double n = static_cast<double>(n_paths);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (uint64_t p = 0; p < n_paths; ++p)
        s += terminal[p * static_cast<size_t>(d) + static_cast<size_t>(i)];
      const double mu = s / n;
      double m2 = 0.0, m4 = 0.0, absorbed = 0.0;
      for (uint64_t p = 0; p < n_paths; ++p) {
        const double v = terminal[p * static_cast<size_t>(d) + static_cast<size_t>(i)];
        const double e = v - mu;
        m2 += e * e;
        m4 += e * e * e * e;
        if (v == 0.0 || v == 1.0) absorbed += 1.0;
      }
      const double var = n_paths > 1 ? m2 / (n - 1.0) : 0.0;
      mean[static_cast<size_t>(i)] = mu;
      variance[static_cast<size_t>(i)] = var;
      se_mean[static_cast<size_t>(i)] = std::sqrt(var / n);
      const double mu4 = m4 / n;
      const double v2 = m2 / n;
      const double var_of_var = std::max(0.0, mu4 - v2 * v2);
      se_var[static_cast<size_t>(i)] = std::sqrt(var_of_var / n);
      absorbed_fraction[static_cast<size_t>(i)] = absorbed / n;
    }
  }
};

/// Terminal states of the full SDE from a single start point.
inline EnsembleND simulate_ensemble(const CoefficientSystem& sys,
                                    const std::vector<double>& x0,
                                    const SdeOptions& opt) {
  const CompiledSystem cs = CompiledSystem::from(sys);
  EnsembleND ens;
  ens.x0 = x0;
  ens.t = opt.t;
  const uint64_t n_steps = sde_step_count(opt.t, opt.dt);
  ens.dt_eff = n_steps == 0 ? 0.0 : opt.t / static_cast<double>(n_steps);
  ens.n_paths = opt.n_paths;
  ens.seed = opt.seed;
  ens.terminal.assign(opt.n_paths * static_cast<size_t>(cs.dim), 0.0);
  const int d = cs.dim;
  simulate_paths(cs, {x0}, opt, [&](uint64_t p, const double* st) {
    for (int i = 0; i < d; ++i)
      ens.terminal[p * static_cast<size_t>(d) + static_cast<size_t>(i)] = st[i];
  });
  ens.summarize();
  return ens;
}

}  // namespace sgcert
