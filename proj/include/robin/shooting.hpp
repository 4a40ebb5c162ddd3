#pragma once

#include <iosfwd>
#include <vector>

#include "robin/radial.hpp"

namespace robin {

struct ProfileOptions {
  double r_min = 1e-4;
  double r_max = 1e4;
  int samples_per_decade = 2000;
  double rtol = 1e-12;
  double atol = 1e-14;
  /// Relative tolerance of the two tail limits at r_max.
  double tail_tolerance = 0.01;
  /// Throw tail-not-converged when either tail check fails. Off by default:
  /// the approach to the tail limit is oscillatory with algebraic decay, so a
  /// finite r_max can miss the tolerance while the profile is still accurate.
  bool require_tail = false;
};

/// Value and derivative of the entire-space profile at one radius.
struct ProfilePoint {
  double u = 0.0;
  double du = 0.0;
};

/// Positive radial solution U of -Delta U = U^p on R^N with U(0) = 1, U'(0) = 0,
/// sampled log-uniformly on [r_min, r_max]. Immutable once built.
class ShootingProfile {
 public:
  double p() const { return p_; }
  int dimension() const { return dimension_; }
  /// a = 2/(p-1).
  double decay_exponent() const { return a_; }
  /// b = a(N-2-a).
  double tail_coefficient() const { return b_; }
  /// b^{1/(p-1)}, the limit of r^a U(r).
  double tail_limit() const { return limit_; }
  double r_min() const { return r_.front(); }
  double r_max() const { return r_.back(); }

  /// r^a U(r) / b^{1/(p-1)} - 1 at r_max.
  double tail_value_deviation() const { return tail_value_dev_; }
  /// -r^{a+1} U'(r) / (a b^{1/(p-1)}) - 1 at r_max.
  double tail_slope_deviation() const { return tail_slope_dev_; }

  /// (U, U') at any r >= 0: the origin series below r_min, cubic Hermite
  /// interpolation in (log r, log U) on the samples, the tail law beyond r_max.
  ProfilePoint evaluate(double r) const;

  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return u_; }
  const std::vector<double>& derivatives() const { return du_; }

  /// Degree-6 origin series 1 - r^2/(2N) + p r^4/(8N(N+2)) + c6 r^6 and its derivative.
  static ProfilePoint origin_series(double r, double p, int dimension);

 private:
  friend ShootingProfile integrate_profile(double, int, const ProfileOptions&);
  double p_ = 0.0;
  int dimension_ = 3;
  double a_ = 0.0;
  double b_ = 0.0;
  double limit_ = 0.0;
  double tail_value_dev_ = 0.0;
  double tail_slope_dev_ = 0.0;
  std::vector<double> r_, log_r_, u_, du_;
};

/// Integrates U'' + (N-1)/r U' + U^p = 0 from r_min using the origin series.
/// Requires N >= 3 and p > (N+2)/(N-2).
ShootingProfile integrate_profile(double p, int dimension, const ProfileOptions& options = {});

/// h(delta) = delta U'(delta) + beta U(delta); U_delta'(1) + beta U_delta(1) = delta^a h(delta).
double robin_mismatch(const ShootingProfile& profile, double delta, double beta);

/// Residual of U_delta'' + (N-1)/r U_delta' + U_delta^p at r, with U_delta'' from a
/// centered difference of the interpolated derivative. Used to check scaling.
double scaled_profile_ode_residual(const ShootingProfile& profile, double delta, double r);

struct ShootOptions {
  int intervals = 2048;
  double bracket_lo = 1e-3;
  double bracket_hi = 1e3;
  double bracket_lo_limit = 1e-9;
  double bracket_hi_limit = 1e9;
  /// Log-spaced probes per decade used to locate the first sign change.
  int scan_per_decade = 50;
};

struct ShootResult {
  double p = 0.0;
  int dimension = 3;
  double beta = 0.0;
  double delta_hat = 0.0;
  /// |h(delta_hat)|.
  double mismatch = 0.0;
  /// |U_delta'(1) + beta U_delta(1)| = delta^a |h(delta_hat)|.
  double residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int bisection_steps = 0;
  /// u(r) = delta^a U(delta r) on the unit-ball grid.
  RadialSolution solution;

  double sup_norm() const { return solution.sup_norm(); }
};

/// Root of h on an expanded bracket, then the assembled solution on [0, 1].
/// Requires 0 < beta < 2/(p-1).
ShootResult find_delta_hat(const ShootingProfile& profile, double beta, const ShootOptions& options = {});

/// Number of sign changes of h on log-spaced probes over [lo, hi]; ignores the
/// existence window (diagnostic).
int count_sign_changes(const ShootingProfile& profile, double beta, double lo, double hi, int per_decade = 50);

/// CSV `r,U,dU`, one row per sample.
void write_profile_csv(std::ostream& out, const ShootingProfile& profile);
/// JSON object {p, N, beta, delta_hat, residual, sup_norm}.
std::string shoot_result_json(const ShootResult& result);

}  // namespace robin
