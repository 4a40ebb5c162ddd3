#include <cmath>
#include <sstream>

#include "doctest.h"
#include "robin/error.hpp"
#include "robin/ode.hpp"
#include "robin/shooting.hpp"

using namespace robin;

namespace {

const ShootingProfile& profile36() {
  static const ShootingProfile p = integrate_profile(6.0, 3);
  return p;
}

// The same profile carried far enough out for the tail constants to settle.
const ShootingProfile& long_profile36() {
  static const ShootingProfile p = [] {
    ProfileOptions o;
    o.r_max = 1e8;
    o.samples_per_decade = 500;
    return integrate_profile(6.0, 3, o);
  }();
  return p;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("profile constants") {
  const auto& p = profile36();
  CHECK(p.decay_exponent() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.tail_coefficient() == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(p.tail_limit() == doctest::Approx(std::pow(0.24, 0.2)).epsilon(1e-15));
  CHECK(p.tail_limit() == doctest::Approx(0.751696).epsilon(1e-6));
}

TEST_CASE("origin behaviour") {
  const auto& p = profile36();
  // Integrated samples against the series up to r = 0.02.
  for (std::size_t i = 0; i < p.radii().size() && p.radii()[i] <= 0.02; ++i) {
    const ProfilePoint series = ShootingProfile::origin_series(p.radii()[i], 6.0, 3);
    REQUIRE(std::abs(p.values()[i] - series.u) <= 1e-13);
    REQUIRE(std::abs(p.derivatives()[i] - series.du) <= 1e-11 * p.radii()[i]);
  }
  // Lane-Emden coefficients for N = 3: 1 - r^2/6 + n r^4/120 - n(8n-5) r^6/15120.
  const double r = 0.1;
  const double lane_emden = 1 - r * r / 6 + 6 * std::pow(r, 4) / 120 - 6 * 43 * std::pow(r, 6) / 15120;
  CHECK(ShootingProfile::origin_series(r, 6.0, 3).u == doctest::Approx(lane_emden).epsilon(1e-15));
  CHECK(std::abs(p.evaluate(0.01).u - (1.0 - 1e-4 / 6.0)) <= 1e-9);
  CHECK(p.evaluate(0.0).u == 1.0);
  CHECK(p.evaluate(0.0).du == 0.0);
}

TEST_CASE("profile is positive and decreasing") {
  const auto& p = profile36();
  for (std::size_t i = 0; i < p.radii().size(); ++i) {
    REQUIRE(p.values()[i] > 0.0);
    REQUIRE(p.derivatives()[i] < 0.0);
  }
}

TEST_CASE("tail limits") {
  const auto& p = long_profile36();
  const double r = p.r_max();
  const ProfilePoint q = p.evaluate(r);
  const double a = p.decay_exponent();
  // Both tails oscillate inside an envelope decaying like r^-0.1; their ratio settles first.
  CHECK(std::abs(std::pow(r, a + 1) * q.du + a * p.tail_limit()) <= 0.05 * a * p.tail_limit());
  CHECK(std::abs(p.tail_slope_deviation()) <= 0.05);
  CHECK(std::abs(-r * q.du / (a * q.u) - 1.0) <= 0.01);
  // The value tail approaches its limit with slowly decaying oscillations.
  CHECK(std::abs(p.tail_value_deviation()) <= 0.05);
  CHECK(std::abs(p.tail_value_deviation()) < std::abs(profile36().tail_value_deviation()));
}

TEST_CASE("tail law beyond the sampled range") {
  const auto& p = profile36();
  const double r = 10 * p.r_max();
  const ProfilePoint q = p.evaluate(r);
  CHECK(q.u == doctest::Approx(p.tail_limit() * std::pow(r, -0.4)).epsilon(1e-14));
  CHECK(q.du == doctest::Approx(-0.4 * q.u / r).epsilon(1e-14));
}

TEST_CASE("robin mismatch signs") {
  const auto& p = profile36();
  for (double beta : {0.05, 0.2, 0.35}) {
    CHECK(robin_mismatch(p, 1e-8, beta) == doctest::Approx(beta).epsilon(1e-6));
    CHECK(robin_mismatch(p, p.r_max(), beta) < 0.0);
  }
  const auto& lp = long_profile36();
  const double d = lp.r_max();
  CHECK(std::abs(robin_mismatch(lp, d, 0.4)) <= 0.02 * lp.tail_limit() * std::pow(d, -0.4));
}

TEST_CASE("root at beta = 0.2") {
  const ShootResult s = find_delta_hat(profile36(), 0.2);
  CHECK(s.mismatch <= 1e-12 * 1.0);
  CHECK(s.residual <= 1e-10);
  CHECK(s.delta_hat > 0.0);
  CHECK(s.bracket_lo <= s.delta_hat);
  CHECK(s.delta_hat <= s.bracket_hi);
  CHECK(is_positive(s.solution.u));
  CHECK(is_nonincreasing(s.solution.u));

  // Interior rows of the finite-difference residual on the sampled solution.
  const auto f = radial_residual(s.solution.grid, s.solution.u, 6.0, 0.2, 3);
  double worst = 0.0;
  for (int i = 0; i < s.solution.grid.intervals; ++i) worst = std::max(worst, std::abs(f[i]));
  CHECK(worst <= 1e-6);
  CHECK(std::abs(s.solution.robin_residual) <= 1e-6);
}

TEST_CASE("existence window") {
  CHECK(kind_of([] { find_delta_hat(profile36(), 0.4); }) == ErrorKind::OutsideExistenceWindow);
  CHECK(kind_of([] { find_delta_hat(profile36(), 0.5); }) == ErrorKind::OutsideExistenceWindow);
  CHECK(kind_of([] { find_delta_hat(profile36(), 0.0); }) == ErrorKind::InvalidParameter);

  const double a = 0.4;
  for (double f : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    CAPTURE(f);
    CHECK(count_sign_changes(profile36(), f * a, 1e-3, 1e3) >= 1);
    CHECK_NOTHROW(find_delta_hat(profile36(), f * a));
  }
  for (double f : {1.05, 1.5}) {
    MESSAGE("beta = " << f << " a: " << count_sign_changes(profile36(), f * a, 1e-3, 1e3)
                      << " sign changes over [1e-3, 1e3]");
  }
}

TEST_CASE("small beta limit") {
  const ShootResult s = find_delta_hat(profile36(), 1e-3);
  const double ratio = s.sup_norm() / std::pow(3e-3, 0.2);
  CHECK(std::abs(ratio - 1.0) <= 0.05);
}

TEST_CASE("scaling identity") {
  const auto& p = profile36();
  for (double delta : {1e-3, 0.1, 0.9, 10.0, 1e3}) {
    for (double r : {0.01, 0.3, 0.5, 1.0}) {
      CAPTURE(delta);
      CAPTURE(r);
      const double scale = std::pow(delta, 0.4);
      const ProfilePoint q = p.evaluate(delta * r);
      const double size = std::pow(scale * q.u, 6.0) + 2.0 / r * std::abs(scale * delta * q.du);
      CHECK(std::abs(scaled_profile_ode_residual(p, delta, r)) <= 1e-6 * size);
    }
  }
}

TEST_CASE("scaled profile matches a direct integration") {
  // U_delta solves the same equation with U_delta(0) = delta^a.
  const auto& p = profile36();
  for (double delta : {0.05, 0.9, 7.0}) {
    const double c = std::pow(delta, 0.4);
    const double r0 = 1e-4;
    // Series about 0 for the solution with value c: c - c^p r^2/6 + p c^{2p-1} r^4/120.
    const double u0 = c - std::pow(c, 6) * r0 * r0 / 6 + 6 * std::pow(c, 11) * std::pow(r0, 4) / 120;
    const double du0 = -std::pow(c, 6) * r0 / 3 + 6 * std::pow(c, 11) * std::pow(r0, 3) / 30;
    const std::vector<double> rs{0.1, 0.5, 1.0};
    ode::integrate<2>(
        [](double r, const ode::State<2>& y) {
          return ode::State<2>{y[1], -2.0 / r * y[1] - std::pow(std::max(y[0], 0.0), 6)};
        },
        r0, {u0, du0}, rs, ode::Options{},
        [&](std::size_t, double r, const ode::State<2>& y) {
          const ProfilePoint q = p.evaluate(delta * r);
          CHECK(c * q.u == doctest::Approx(y[0]).epsilon(1e-8));
          CHECK(c * delta * q.du == doctest::Approx(y[1]).epsilon(1e-7));
          return true;
        });
  }
}

TEST_CASE("profile preconditions") {
  CHECK(kind_of([] { integrate_profile(5.0, 3); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { integrate_profile(6.0, 2); }) == ErrorKind::InvalidParameter);
  ProfileOptions strict;
  strict.require_tail = true;
  CHECK(kind_of([&] { integrate_profile(6.0, 3, strict); }) == ErrorKind::TailNotConverged);
  CHECK_NOTHROW(integrate_profile(3.0, 5));
}

TEST_CASE("exports") {
  std::ostringstream csv;
  write_profile_csv(csv, profile36());
  CHECK(csv.str().rfind("r,U,dU\n", 0) == 0);
  const std::string json = shoot_result_json(find_delta_hat(profile36(), 0.2));
  for (const char* key : {"\"p\"", "\"N\"", "\"beta\"", "\"delta_hat\"", "\"residual\"", "\"sup_norm\""}) {
    CHECK(json.find(key) != std::string::npos);
  }
}
