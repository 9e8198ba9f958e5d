#pragma once

// Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
// The coefficients are the standard DOPRI5 tableau; step control is the
// usual order-5 PI-free controller with safety factor 0.9.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgcert {

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 1e-3;
  uint64_t max_steps = 10'000'000;
};

struct OdeStats {
  uint64_t accepted = 0;
  uint64_t rejected = 0;
  double min_step = 0.0;
};

class OdeStepUnderflow : public std::runtime_error {
 public:
  explicit OdeStepUnderflow(double t)
      : std::runtime_error("ODE step size underflow at t = " + std::to_string(t)),
        time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Integrates y' = rhs(t, y) from t0 to t1 in place.  post_step (optional)
/// runs after every accepted step, e.g. to clamp the state.
inline OdeStats integrate_dopri5(
    const std::function<void(double, const std::vector<double>&, std::vector<double>&)>& rhs,
    std::vector<double>& y, double t0, double t1, const OdeOptions& opt = {},
    const std::function<void(std::vector<double>&)>& post_step = nullptr) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats stats;
  const size_t n = y.size();
  if (t1 <= t0) return stats;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> tmp(n), ynew(n);

  double t = t0;
  double h = std::min(opt.initial_step, t1 - t0);
  stats.min_step = h;
  bool have_k1 = false;

  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw std::runtime_error("integrate_dopri5: step budget exhausted");
    h = std::min(h, t1 - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t1))) throw OdeStepUnderflow(t);

    if (!have_k1) rhs(t, y, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
      const double scale =
          opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
    }

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      have_k1 = true;
      if (post_step) {
        post_step(y);
        have_k1 = false;  // state may have moved; refresh k1
      }
      ++stats.accepted;
      stats.min_step = std::min(stats.min_step, h);
    } else {
      ++stats.rejected;
      have_k1 = true;  // k1 still matches y
    }
    const double factor =
        (err == 0.0) ? 5.0
                     : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    h *= factor;
  }
  return stats;
}

}  // namespace sgcert
