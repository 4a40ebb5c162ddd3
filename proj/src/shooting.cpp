#include "robin/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "robin/error.hpp"
#include "robin/ode.hpp"

namespace robin {

namespace {

// Below this radius the truncated series is more accurate than the sampled
// profile, whose second derivative is lost to roundoff near u = 1.
constexpr double kSeriesRadius = 1e-2;

}  // namespace

ProfilePoint ShootingProfile::origin_series(double r, double p, int dimension) {
  const double c2 = -1.0 / (2.0 * dimension);
  const double c4 = p / (8.0 * dimension * (dimension + 2.0));
  const double c6 = -(p * c4 + 0.5 * p * (p - 1.0) * c2 * c2) / (6.0 * (dimension + 4.0));
  const double r2 = r * r;
  return {1.0 + r2 * (c2 + r2 * (c4 + r2 * c6)), r * (2.0 * c2 + r2 * (4.0 * c4 + 6.0 * c6 * r2))};
}

ShootingProfile integrate_profile(double p, int dimension, const ProfileOptions& options) {
  if (dimension < 3) throw Error(ErrorKind::InvalidParameter, "slow-decay profiles need N >= 3");
  const double critical = (dimension + 2.0) / (dimension - 2.0);
  if (!(p > critical)) {
    throw Error(ErrorKind::InvalidParameter, "profile requires a supercritical exponent p > (N+2)/(N-2)");
  }
  if (!(options.r_min > 0.0) || !(options.r_max > options.r_min) || options.samples_per_decade < 1) {
    throw Error(ErrorKind::InvalidParameter, "profile needs 0 < r_min < r_max and samples_per_decade >= 1");
  }

  ShootingProfile prof;
  prof.p_ = p;
  prof.dimension_ = dimension;
  prof.a_ = 2.0 / (p - 1.0);
  prof.b_ = prof.a_ * (dimension - 2.0 - prof.a_);
  prof.limit_ = std::pow(prof.b_, 1.0 / (p - 1.0));

  const double x0 = std::log(options.r_min);
  const double x1 = std::log(options.r_max);
  const double decades = (x1 - x0) / std::log(10.0);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * options.samples_per_decade)) + 1);
  std::vector<double> radii(n);
  for (int k = 0; k < n; ++k) radii[k] = std::exp(x0 + (x1 - x0) * k / (n - 1));
  radii.front() = options.r_min;
  radii.back() = options.r_max;

  const double n1 = dimension - 1.0;
  auto rhs = [p, n1](double r, const ode::State<2>& y) -> ode::State<2> {
    return {y[1], -n1 / r * y[1] - std::pow(std::max(y[0], 0.0), p)};
  };
  const ProfilePoint start = ShootingProfile::origin_series(options.r_min, p, dimension);

  prof.r_.reserve(n);
  prof.u_.reserve(n);
  prof.du_.reserve(n);
  prof.r_.push_back(options.r_min);
  prof.u_.push_back(start.u);
  prof.du_.push_back(start.du);

  ode::Options ode_opt;
  ode_opt.rtol = options.rtol;
  ode_opt.atol = options.atol;
  ode_opt.initial_step = options.r_min * 1e-2;
  bool crossed = false;
  ode::integrate<2>(rhs, options.r_min, {start.u, start.du}, std::span<const double>(radii).subspan(1), ode_opt,
                    [&](std::size_t, double r, const ode::State<2>& y) {
                      if (!(y[0] > 0.0)) {
                        crossed = true;
                        return false;
                      }
                      prof.r_.push_back(r);
                      prof.u_.push_back(y[0]);
                      prof.du_.push_back(y[1]);
                      return true;
                    });
  if (crossed) throw Error(ErrorKind::ProfileCrossedZero, "U reached zero at r = " + std::to_string(prof.r_.back()));

  prof.log_r_.resize(prof.r_.size());
  for (std::size_t k = 0; k < prof.r_.size(); ++k) prof.log_r_[k] = std::log(prof.r_[k]);

  const double rm = prof.r_.back();
  prof.tail_value_dev_ = std::pow(rm, prof.a_) * prof.u_.back() / prof.limit_ - 1.0;
  prof.tail_slope_dev_ = -std::pow(rm, prof.a_ + 1.0) * prof.du_.back() / (prof.a_ * prof.limit_) - 1.0;
  if (options.require_tail && (std::abs(prof.tail_value_dev_) > options.tail_tolerance ||
                               std::abs(prof.tail_slope_dev_) > options.tail_tolerance)) {
    throw Error(ErrorKind::TailNotConverged, "tail deviations at r_max are " + std::to_string(prof.tail_value_dev_) +
                                                 " (value) and " + std::to_string(prof.tail_slope_dev_) +
                                                 " (slope); increase r_max");
  }
  return prof;
}

ProfilePoint ShootingProfile::evaluate(double r) const {
  if (r < std::max(r_.front(), kSeriesRadius)) return origin_series(r, p_, dimension_);
  if (r > r_.back()) {
    const double u = limit_ * std::pow(r, -a_);
    return {u, -a_ * u / r};
  }
  const double x = std::log(r);
  auto it = std::upper_bound(log_r_.begin(), log_r_.end(), x);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - log_r_.begin()) - 1));
  if (k + 1 >= log_r_.size()) k = log_r_.size() - 2;

  const double xa = log_r_[k], xb = log_r_[k + 1];
  const double dx = xb - xa;
  const double ya = std::log(u_[k]), yb = std::log(u_[k + 1]);
  const double sa = r_[k] * du_[k] / u_[k];
  const double sb = r_[k + 1] * du_[k + 1] / u_[k + 1];
  const double t = (x - xa) / dx;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double y = h00 * ya + h10 * dx * sa + h01 * yb + h11 * dx * sb;
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1, d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double slope = (d00 * ya + d01 * yb) / dx + d10 * sa + d11 * sb;
  const double u = std::exp(y);
  return {u, u * slope / r};
}

double robin_mismatch(const ShootingProfile& profile, double delta, double beta) {
  const ProfilePoint pt = profile.evaluate(delta);
  return delta * pt.du + beta * pt.u;
}

double scaled_profile_ode_residual(const ShootingProfile& profile, double delta, double r) {
  const double a = profile.decay_exponent();
  const double scale = std::pow(delta, a);
  const double step = 1e-5 * r;
  auto du = [&](double s) { return scale * delta * profile.evaluate(delta * s).du; };
  const double u = scale * profile.evaluate(delta * r).u;
  const double d2u = (du(r + step) - du(r - step)) / (2.0 * step);
  return d2u + (profile.dimension() - 1.0) / r * du(r) + std::pow(u, profile.p());
}

int count_sign_changes(const ShootingProfile& profile, double beta, double lo, double hi, int per_decade) {
  const int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  int changes = 0;
  double prev = robin_mismatch(profile, lo, beta);
  for (int k = 1; k < n; ++k) {
    const double d = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    const double cur = robin_mismatch(profile, d, beta);
    if ((prev > 0.0) != (cur > 0.0)) ++changes;
    prev = cur;
  }
  return changes;
}

ShootResult find_delta_hat(const ShootingProfile& profile, double beta, const ShootOptions& options) {
  const double a = profile.decay_exponent();
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidParameter, "beta must be positive");
  if (!(beta < a)) {
    throw Error(ErrorKind::OutsideExistenceWindow,
                "radial existence via the slow-decay profile needs 0 < beta < 2/(p-1) = " + std::to_string(a));
  }
  auto h = [&](double d) { return robin_mismatch(profile, d, beta); };

  double lo = options.bracket_lo;
  double hi = options.bracket_hi;
  double h_lo = h(lo);
  double h_hi = h(hi);
  while (!(h_lo > 0.0 && h_hi < 0.0)) {
    const bool can_lo = lo / 10.0 >= options.bracket_lo_limit * (1.0 - 1e-12);
    const bool can_hi = hi * 10.0 <= options.bracket_hi_limit * (1.0 + 1e-12);
    if (!can_lo && !can_hi) {
      throw Error(ErrorKind::NoSignChange, "h(" + std::to_string(lo) + ") = " + std::to_string(h_lo) + ", h(" +
                                               std::to_string(hi) + ") = " + std::to_string(h_hi));
    }
    if (!(h_lo > 0.0) && can_lo) h_lo = h(lo /= 10.0);
    if (!(h_hi < 0.0) && can_hi) h_hi = h(hi *= 10.0);
    if (!(h_lo > 0.0) && !can_lo) break;
    if (!(h_hi < 0.0) && !can_hi) break;
  }
  if (!(h_lo > 0.0 && h_hi < 0.0)) {
    throw Error(ErrorKind::NoSignChange, "h(" + std::to_string(lo) + ") = " + std::to_string(h_lo) + ", h(" +
                                             std::to_string(hi) + ") = " + std::to_string(h_hi));
  }

  // Narrow to the first sign change so the smallest root is selected.
  {
    const int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * options.scan_per_decade)) + 1);
    double prev_d = lo;
    for (int k = 1; k < n; ++k) {
      const double d = (k == n - 1) ? hi : lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
      if (!(h(d) > 0.0)) {
        lo = prev_d;
        hi = d;
        break;
      }
      prev_d = d;
    }
  }

  ShootResult result;
  result.p = profile.p();
  result.dimension = profile.dimension();
  result.beta = beta;
  result.bracket_lo = lo;
  result.bracket_hi = hi;

  double left = lo, right = hi;
  int steps = 0;
  while (steps < 200) {
    const double mid = std::sqrt(left * right);
    if (!(mid > left && mid < right)) break;
    ++steps;
    const double hm = h(mid);
    if (hm == 0.0) {
      left = right = mid;
      break;
    }
    (hm > 0.0 ? left : right) = mid;
  }
  const double h_left = std::abs(h(left));
  const double h_right = std::abs(h(right));
  result.delta_hat = h_left <= h_right ? left : right;
  result.mismatch = std::min(h_left, h_right);
  result.bisection_steps = steps;
  result.residual = std::pow(result.delta_hat, a) * result.mismatch;
  if (!(result.mismatch <= 1e-12 * std::max(1.0, beta))) {
    throw Error(ErrorKind::NoConvergence, "bisection stalled at |h| = " + std::to_string(result.mismatch));
  }

  const RadialGrid grid = RadialGrid::make(1.0, options.intervals);
  RadialSolution& sol = result.solution;
  sol.grid = grid;
  sol.p = profile.p();
  sol.beta = beta;
  sol.dimension = profile.dimension();
  sol.iterations = steps;
  const double scale = std::pow(result.delta_hat, a);
  sol.u.resize(grid.size());
  sol.u[0] = scale;
  for (int i = 1; i < grid.size(); ++i) sol.u[i] = scale * profile.evaluate(result.delta_hat * grid.node(i)).u;
  const auto f = radial_residual(grid, sol.u, sol.p, beta, sol.dimension);
  sol.raw_residual_norm = 0.0;
  for (double v : f) sol.raw_residual_norm = std::max(sol.raw_residual_norm, std::abs(v));
  sol.residual_norm = radial_scaled_residual(grid, sol.u, sol.p, beta, sol.dimension);
  sol.robin_residual = robin_residual(grid, sol.u, beta);
  if (!is_positive(sol.u)) throw Error(ErrorKind::NonpositiveSolution, "assembled solution is not positive");
  return result;
}

void write_profile_csv(std::ostream& out, const ShootingProfile& profile) {
  out << "r,U,dU\n";
  char buf[96];
  for (std::size_t k = 0; k < profile.radii().size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", profile.radii()[k], profile.values()[k],
                  profile.derivatives()[k]);
    out << buf;
  }
}

std::string shoot_result_json(const ShootResult& result) {
  nlohmann::ordered_json j;
  j["p"] = result.p;
  j["N"] = result.dimension;
  j["beta"] = result.beta;
  j["delta_hat"] = result.delta_hat;
  j["residual"] = result.residual;
  j["sup_norm"] = result.sup_norm();
  return j.dump(2);
}

}  // namespace robin
