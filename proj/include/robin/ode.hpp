#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//
// Steps are clamped so that every requested output abscissa is hit exactly;
// no dense-output interpolation is involved in reported values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "robin/error.hpp"

namespace robin::ode {

struct Options {
  double rtol = 1e-12;
  double atol = 1e-14;
  double initial_step = 0.0;  // 0 selects a step from the output spacing
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 50'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
};

template <std::size_t K>
using State = std::array<double, K>;

/// Integrates y' = rhs(t, y) from (t0, y0) through the increasing abscissae in
/// `outputs`, calling observe(index, t, y) at each. `observe` returns false to
/// stop early. Returns the number of outputs delivered.
template <std::size_t K, class Rhs, class Observe>
std::size_t integrate(Rhs&& rhs, double t0, State<K> y0, std::span<const double> outputs, const Options& opt,
                      Observe&& observe, Stats* stats = nullptr) {
  // Dormand-Prince coefficients.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  State<K> y = y0;
  State<K> k1 = rhs(t, y);
  double h = opt.initial_step;
  if (h <= 0.0) h = outputs.empty() ? 1e-6 : std::max((outputs.front() - t0) * 0.5, 1e-12 * std::abs(t0) + 1e-300);

  long steps = 0;
  std::size_t delivered = 0;
  for (std::size_t idx = 0; idx < outputs.size(); ++idx) {
    const double target = outputs[idx];
    while (t < target) {
      if (++steps > opt.max_steps) throw Error(ErrorKind::NoConvergence, "ODE step budget exhausted");
      if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
      bool last = false;
      const double h_free = h;
      if (t + h >= target) {
        h = target - t;
        last = true;
      }
      State<K> tmp, k2, k3, k4, k5, k6, k7, y_new, err;
      for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      k2 = rhs(t + c2 * h, tmp);
      for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = rhs(t + c3 * h, tmp);
      for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = rhs(t + c4 * h, tmp);
      for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = rhs(t + c5 * h, tmp);
      for (std::size_t i = 0; i < K; ++i) {
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      k6 = rhs(t + h, tmp);
      for (std::size_t i = 0; i < K; ++i) {
        y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      }
      const double t_new = last ? target : t + h;
      k7 = rhs(t_new, y_new);
      double norm = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        norm += (err[i] / sc) * (err[i] / sc);
      }
      norm = std::sqrt(norm / K);
      if (!std::isfinite(norm)) {
        h *= 0.1;
        if (stats) ++stats->rejected;
        continue;
      }
      const double factor = std::clamp(0.9 * std::pow(std::max(norm, 1e-10), -0.2), 0.2, 5.0);
      if (norm <= 1.0) {
        t = t_new;
        y = y_new;
        k1 = k7;  // first-same-as-last
        if (stats) ++stats->accepted;
        // A step shortened to land on an output does not shrink the next one.
        h = last ? std::max(h_free, h * factor) : h * factor;
      } else {
        h *= std::max(factor, 0.2);
        if (stats) ++stats->rejected;
      }
    }
    ++delivered;
    if (!observe(idx, t, y)) break;
  }
  return delivered;
}

}  // namespace robin::ode
