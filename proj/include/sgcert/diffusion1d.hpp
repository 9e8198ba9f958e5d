#pragma once

// One-dimensional square-root diffusion dY = sqrt(a(Y)) dW on [0,1]:
//   * full-truncation Euler path simulation (boundary absorbing since a
//     vanishes there and the diffusive part has no drift),
//   * deterministic semigroup propagation of du/dt = (1/2) a(x) u'' by
//     Crank-Nicolson with Rannacher startup, positivity-capped steps,
//   * the resolvent solve (lambda - A_h)^{-1}.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgcert/constants.hpp"
#include "sgcert/grid_function.hpp"
#include "sgcert/parallel.hpp"
#include "sgcert/poly.hpp"
#include "sgcert/rng.hpp"
#include "sgcert/sde.hpp"

namespace sgcert {

struct Path1D {
  double dt = 0.0;
  std::vector<double> values;
  std::optional<uint64_t> absorbed_at;
};

/// Single path with the full trajectory retained.
inline Path1D simulate_path_1d(const PolyExpr& a, double x0, double t, double dt,
                               const NoiseStream& noise, uint64_t path_index) {
  if (x0 < 0.0 || x0 > 1.0)
    throw std::invalid_argument("simulate_path_1d: x0 outside [0,1]");
  const CompiledPoly ca(a);
  const uint64_t n_steps = sde_step_count(t, dt);
  const double dt_eff = n_steps == 0 ? 0.0 : t / static_cast<double>(n_steps);
  const double sq_dt = std::sqrt(dt_eff);

  Path1D path;
  path.dt = dt_eff;
  path.values.reserve(n_steps + 1);
  path.values.push_back(x0);
  double y = x0;
  if (y == 0.0 || y == 1.0) path.absorbed_at = 0;
  for (uint64_t k = 0; k < n_steps; ++k) {
    if (!path.absorbed_at) {
      double av = ca.eval(&y);
      if (av < 0.0) av = 0.0;
      y = detail::clamp01(y + std::sqrt(av) * sq_dt * noise.gaussian(path_index, k));
      if (y == 0.0 || y == 1.0) path.absorbed_at = k + 1;
    }
    path.values.push_back(y);
  }
  return path;
}

struct Ensemble1D {
  double x0 = 0.0;
  double t = 0.0;
  double dt_eff = 0.0;
  uint64_t n_paths = 0;
  uint64_t seed = 0;
  std::vector<double> terminal;
  double mean = 0.0, variance = 0.0, se_mean = 0.0, se_var = 0.0;
  double absorbed_fraction = 0.0;
};

/// Terminal-value ensemble (paths are not stored).
inline Ensemble1D simulate_1d(const PolyExpr& a, double x0, double t, double dt,
                              uint64_t n_paths, const NoiseStream& noise,
                              int workers = 0) {
  if (x0 < 0.0 || x0 > 1.0)
    throw std::invalid_argument("simulate_1d: x0 outside [0,1]");
  const CompiledPoly ca(a);
  const uint64_t n_steps = sde_step_count(t, dt);
  const double dt_eff = n_steps == 0 ? 0.0 : t / static_cast<double>(n_steps);
  const double sq_dt = std::sqrt(dt_eff);

  Ensemble1D ens;
  ens.x0 = x0;
  ens.t = t;
  ens.dt_eff = dt_eff;
  ens.n_paths = n_paths;
  ens.seed = noise.seed;
  ens.terminal.assign(n_paths, 0.0);

  parallel_for(n_paths, workers, [&](uint64_t begin, uint64_t end) {
    for (uint64_t p = begin; p < end; ++p) {
      double y = x0;
      for (uint64_t k = 0; k < n_steps; ++k) {
        if (y == 0.0 || y == 1.0) break;  // absorbed: a vanishes there
        double av = ca.eval(&y);
        if (av < 0.0) av = 0.0;
        y = detail::clamp01(y + std::sqrt(av) * sq_dt * noise.gaussian(p, k));
      }
      ens.terminal[p] = y;
    }
  });

  const double n = static_cast<double>(n_paths);
  double s = 0.0;
  for (double v : ens.terminal) s += v;
  ens.mean = s / n;
  double m2 = 0.0, m4 = 0.0, absorbed = 0.0;
  for (double v : ens.terminal) {
    const double e = v - ens.mean;
    m2 += e * e;
    m4 += e * e * e * e;
    if (v == 0.0 || v == 1.0) absorbed += 1.0;
  }
  ens.variance = n_paths > 1 ? m2 / (n - 1.0) : 0.0;
  ens.se_mean = std::sqrt(ens.variance / n);
  const double v2 = m2 / n;
  ens.se_var = std::sqrt(std::max(0.0, m4 / n - v2 * v2) / n);
  ens.absorbed_fraction = absorbed / n;
  return ens;
}

// ---------------------------------------------------------------------------
// Deterministic propagation
// ---------------------------------------------------------------------------

class Propagator1D {
 public:
  struct Stats {
    uint64_t steps = 0;
    double dt_eff = 0.0;
    double sup_ratio = 0.0;  // ||out||_inf / ||in||_inf
  };

  Propagator1D(const PolyExpr& a, int n_cells, double dt_target = 1e-3)
      : n_(n_cells), dt_target_(dt_target) {
    if (n_cells < 4) throw std::invalid_argument("Propagator1D: need >= 4 cells");
    if (dt_target <= 0.0)
      throw std::invalid_argument("Propagator1D: dt_target must be > 0");
    h_ = 1.0 / n_;
    a_nodes_.resize(static_cast<size_t>(n_ + 1));
    double amax = 0.0;
    for (int i = 0; i <= n_; ++i) {
      const double x = static_cast<double>(i) / n_;
      a_nodes_[static_cast<size_t>(i)] = a.eval(std::vector<double>{x});
      amax = std::max(amax, a_nodes_[static_cast<size_t>(i)]);
    }
    // explicit half of Crank-Nicolson keeps nonnegative rows iff
    // dt <= 2 h^2 / max a; reduce the step until that holds
    positivity_cap_ = amax > 0.0 ? 2.0 * h_ * h_ / amax
                                 : std::numeric_limits<double>::infinity();
  }

  int n_nodes() const { return n_ + 1; }
  double node(int i) const { return static_cast<double>(i) / n_; }
  double spacing() const { return h_; }
  const std::vector<double>& a_nodes() const { return a_nodes_; }
  double positivity_cap() const { return positivity_cap_; }

  /// A_h phi = (1/2) a(x_i) (phi_{i-1} - 2 phi_i + phi_{i+1}) / h^2 with
  /// identity (frozen) boundary rows; annihilates constants exactly.
  std::vector<double> apply_generator(const std::vector<double>& phi) const {
    check_size(phi);
    std::vector<double> out(phi.size(), 0.0);
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int i = 1; i < n_; ++i) {
      const double diff = phi[static_cast<size_t>(i - 1)] - 2.0 * phi[static_cast<size_t>(i)] +
                          phi[static_cast<size_t>(i + 1)];
      out[static_cast<size_t>(i)] = 0.5 * a_nodes_[static_cast<size_t>(i)] * diff * inv_h2;
    }
    // boundary rows stay zero: a vanishes at the ends, so du/dt = 0 there
    return out;
  }

  /// Crank-Nicolson with two implicit-Euler half-steps first (Rannacher).
  std::vector<double> propagate(const std::vector<double>& phi, double t,
                                Stats* stats = nullptr) const {
    check_size(phi);
    if (t < 0.0) throw std::invalid_argument("propagate: t must be >= 0");
    std::vector<double> u = phi;
    if (t == 0.0) {
      if (stats) *stats = Stats{0, 0.0, 1.0};
      return u;
    }
    const double cap = std::min(dt_target_, positivity_cap_);
    const uint64_t n_steps =
        std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(t / cap - 1e-12)));
    const double dt = t / static_cast<double>(n_steps);

    const double sup_in = sup(u);
    // Rannacher startup: replace the first CN step by two IE half-steps
    implicit_euler_step(u, 0.5 * dt);
    implicit_euler_step(u, 0.5 * dt);
    for (uint64_t k = 1; k < n_steps; ++k) crank_nicolson_step(u, dt);
    if (stats) {
      stats->steps = n_steps + 1;
      stats->dt_eff = dt;
      stats->sup_ratio = sup_in > 0.0 ? sup(u) / sup_in : 0.0;
    }
    return u;
  }

  /// Solves (lambda - A_h) u = phi; boundary rows give u = phi / lambda.
  std::vector<double> resolvent(const std::vector<double>& phi, double lambda) const {
    check_size(phi);
    if (lambda <= 0.0)
      throw std::invalid_argument("resolvent: lambda must be > 0");
    const size_t m = phi.size();
    std::vector<double> diag(m), lower(m, 0.0), upper(m, 0.0), rhs = phi;
    const double inv_h2 = 1.0 / (h_ * h_);
    for (size_t i = 0; i < m; ++i) {
      const double ai = a_nodes_[i];
      diag[i] = lambda + ai * inv_h2;
      if (i > 0 && i < m - 1) {
        lower[i] = -0.5 * ai * inv_h2;
        upper[i] = -0.5 * ai * inv_h2;
      }
    }
    // boundary a vanishes for admissible profiles; rows stay diagonal
    thomas_solve(lower, diag, upper, rhs);
    return rhs;
  }

 private:
  void check_size(const std::vector<double>& phi) const {
    if (static_cast<int>(phi.size()) != n_ + 1)
      throw std::invalid_argument("Propagator1D: expected " + std::to_string(n_ + 1) +
                                  " node values");
  }

  static double sup(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  // theta-step: solve (I - theta dt A) u' = u + (1-theta) dt A u
  void theta_step(std::vector<double>& u, double dt, double theta) const {
    const size_t m = u.size();
    std::vector<double> rhs(m);
    const double we = (1.0 - theta) * dt;
    if (we != 0.0) {
      const std::vector<double> au = apply_generator(u);
      for (size_t i = 0; i < m; ++i) rhs[i] = u[i] + we * au[i];
    } else {
      rhs = u;
    }
    const double wi = theta * dt;
    std::vector<double> diag(m, 1.0), lower(m, 0.0), upper(m, 0.0);
    const double inv_h2 = 1.0 / (h_ * h_);
    for (size_t i = 1; i + 1 < m; ++i) {
      const double c = 0.5 * wi * a_nodes_[i] * inv_h2;
      diag[i] = 1.0 + 2.0 * c;
      lower[i] = -c;
      upper[i] = -c;
    }
    thomas_solve(lower, diag, upper, rhs);
    u = std::move(rhs);
  }

  void implicit_euler_step(std::vector<double>& u, double dt) const {
    theta_step(u, dt, 1.0);
  }

  void crank_nicolson_step(std::vector<double>& u, double dt) const {
    theta_step(u, dt, 0.5);
  }

  static void thomas_solve(std::vector<double> lower, std::vector<double> diag,
                           std::vector<double> upper, std::vector<double>& rhs) {
    const size_t m = rhs.size();
    for (size_t i = 1; i < m; ++i) {
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    rhs[m - 1] /= diag[m - 1];
    for (size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }

  int n_;
  double dt_target_;
  double h_ = 0.0;
  std::vector<double> a_nodes_;
  double positivity_cap_ = 0.0;
};

// ---------------------------------------------------------------------------
// Discrete norms and the nu-bound check
// ---------------------------------------------------------------------------

/// Discrete C^m norm of node values on the uniform grid over [0,1].
inline double discrete_cm_norm_1d(const std::vector<double>& values, int m) {
  GridFunction g(GridSpec{{static_cast<int>(values.size())}});
  g.values() = values;
  return g.discrete_cm_norm(m).value;
}

struct NuCheckRow {
  std::string phi;
  int m = 0;
  double norm_in = 0.0;
  double norm_out = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct NuCheckReport {
  double t = 0.0;
  std::array<double, 4> nu{};
  std::vector<NuCheckRow> rows;
  bool pass = true;
};

/// Propagates each phi and compares the discrete C^m norm against
/// e^{nu_m t} times the input norm.
inline NuCheckReport check_nu_bounds(const PolyExpr& a, double t, int m,
                                     const std::vector<std::pair<std::string, std::vector<double>>>& phis,
                                     int n_cells, double dt_target = 1e-3,
                                     double tolerance = 1e-3) {
  if (m < 0 || m > 3)
    throw std::invalid_argument("check_nu_bounds: m must be 0..3");
  NuCheckReport rep;
  rep.t = t;
  const PolyExpr a2 = a.partial(1).partial(1);
  const PolyExpr a3 = a2.partial(1);
  const double s2 = sup_norm(a2, 1001);
  const double s3 = sup_norm(a3, 1001);
  rep.nu = {0.0, 0.0, 0.5 * s2, s3 + 1.5 * s2};

  Propagator1D prop(a, n_cells, dt_target);
  for (const auto& [name, phi] : phis) {
    NuCheckRow row;
    row.phi = name;
    row.m = m;
    row.norm_in = discrete_cm_norm_1d(phi, m);
    const std::vector<double> out = prop.propagate(phi, t);
    row.norm_out = discrete_cm_norm_1d(out, m);
    row.bound = std::exp(rep.nu[static_cast<size_t>(m)] * t) * row.norm_in;
    row.ratio = row.bound > 0.0 ? row.norm_out / row.bound : 0.0;
    row.pass = row.norm_out <= row.bound * (1.0 + tolerance) ||
               (row.bound == 0.0 && row.norm_out <= tolerance);
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace sgcert
