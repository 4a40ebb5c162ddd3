#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "robin/error.hpp"
#include "robin/radial.hpp"

using namespace robin;

namespace {

double torsion(double r, double R, int n, double beta) { return (R * R - r * r) / (2 * n) + R / (n * beta); }

// Dense copy of the radial operator -Delta_h; `dirichlet` drops the last node.
Eigen::MatrixXd radial_matrix(const RadialGrid& g, int n, double beta, bool dirichlet) {
  const int m = g.intervals;
  const int size = dirichlet ? m : m + 1;
  const double h = g.spacing();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  a(0, 0) = 2.0 * n / (h * h);
  if (size > 1) a(0, 1) = -2.0 * n / (h * h);
  for (int i = 1; i < m; ++i) {
    const double r = g.node(i);
    a(i, i) = 2.0 / (h * h);
    a(i, i - 1) = -1.0 / (h * h) + (n - 1) / (2 * r * h);
    if (i + 1 < size) a(i, i + 1) = -1.0 / (h * h) - (n - 1) / (2 * r * h);
  }
  if (!dirichlet) {
    a(m, m) = 2.0 / (h * h) + beta * (2.0 / h + (n - 1) / g.radius);
    a(m, m - 1) = -2.0 / (h * h);
  }
  return a;
}

double smallest_real_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i) best = std::min(best, es.eigenvalues()[i].real());
  return best;
}

}  // namespace

TEST_CASE("torsion closed form") {
  const RadialSolution s = solve_radial(0.0, 0.1, 2, 1.0, 2048);
  double err = 0.0;
  for (int i = 0; i < s.grid.size(); ++i) {
    const double r = s.grid.node(i);
    err = std::max(err, std::abs(s.u[i] - ((1 - r * r) / 4 + 1 / 0.2)));
  }
  CHECK(err <= 1e-6);
  CHECK(s.residual_norm <= 1e-12);
  CHECK(std::abs(s.robin_residual) <= 1e-9);
}

TEST_CASE("torsion in other dimensions and radii") {
  for (int n : {2, 3, 5}) {
    for (double R : {0.5, 2.0}) {
      const double beta = 0.3;
      const RadialSolution s = solve_radial(0.0, beta, n, R, 256);
      for (int i = 0; i < s.grid.size(); ++i) {
        CHECK(std::abs(s.u[i] - torsion(s.grid.node(i), R, n, beta)) <= 1e-9 * torsion(0, R, n, beta));
      }
    }
  }
}

TEST_CASE("residual of exact and special profiles") {
  const auto g = RadialGrid::make(1.0, 512);
  std::vector<double> u(g.size());
  for (int i = 0; i < g.size(); ++i) u[i] = torsion(g.node(i), 1.0, 2, 0.1);
  const auto f = radial_residual(g, u, 0.0, 0.1, 2);
  double worst = 0.0;
  for (double v : f) worst = std::max(worst, std::abs(v));
  CHECK(worst <= 1e-6);

  std::vector<double> zero(g.size(), 0.0);
  for (double v : radial_residual(g, zero, 2.0, 0.1, 2)) CHECK(v == 0.0);
  CHECK_FALSE(is_positive(zero));

  const double p = 3.0, beta = 0.05;
  const double d = std::pow(beta * 2.0, 1.0 / (p - 1.0));
  std::vector<double> c(g.size(), d);
  const auto fc = radial_residual(g, c, p, beta, 2);
  for (int i = 0; i < g.intervals; ++i) CHECK(fc[i] == -std::pow(d, p));
  const double h = g.spacing();
  CHECK(fc.back() == doctest::Approx(beta * d * (2.0 / h + 1.0) - std::pow(d, p)).epsilon(1e-12));
}

TEST_CASE("leading-order limits") {
  const RadialSolution s3 = solve_radial(3.0, 1e-3, 2, 1.0, 2048);
  const double ratio = s3.sup_norm() / std::sqrt(2e-3);
  CHECK(ratio >= 0.95);
  CHECK(ratio <= 1.05);

  const RadialSolution s12 = solve_radial(0.5, 1e-3, 2, 1.0, 2048);
  CHECK(s12.u.back() >= 0.25e6);
  CHECK(s12.initial_guess == doctest::Approx(std::pow(2e-3, -2.0)));
}

TEST_CASE("solutions are positive and nonincreasing") {
  for (double p : {0.0, 0.25, 0.5, 0.9, 1.5, 3.0, 5.0}) {
    for (double beta : {0.3, 0.01}) {
      for (int n : {2, 3}) {
        CAPTURE(p);
        CAPTURE(beta);
        CAPTURE(n);
        const RadialSolution s = solve_radial(p, beta, n, 1.0, 512);
        CHECK(is_positive(s.u));
        CHECK(is_nonincreasing(s.u));
        CHECK(s.residual_norm <= 1e-12);
      }
    }
  }
}

TEST_CASE("flux identity with the summation-by-parts weights") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int n : {2, 3, 4, 5}) {
    const auto g = RadialGrid::make(1.3, 300);
    const double beta = 0.7;
    const auto w = radial_weights(g, n, RadialQuadrature::FluxConsistent);
    std::vector<double> u(g.size());
    for (double& v : u) v = unif(rng);
    // With p = 0 the residual is -Delta_h u - 1.
    const auto f = radial_residual(g, u, 0.0, beta, n);
    double lhs = 0.0, total = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      lhs += w[i] * (f[i] + 1.0);
      total += w[i];
    }
    const double rhs = beta * std::pow(g.radius, n - 1) * u.back();
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    CHECK(total == doctest::Approx(std::pow(g.radius, n) / n).epsilon(1e-4));
  }
}

TEST_CASE("quadrature rules on polynomials") {
  const auto g = RadialGrid::make(1.0, 64);
  for (int n : {2, 3}) {
    const auto simpson = radial_weights(g, n, RadialQuadrature::Simpson);
    const auto trap = radial_weights(g, n, RadialQuadrature::Trapezoid);
    double s = 0.0, t = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      s += simpson[i] * g.node(i);
      t += trap[i];
    }
    CHECK(s == doctest::Approx(1.0 / (n + 1)).epsilon(1e-12));
    CHECK(t == doctest::Approx(1.0 / n).epsilon(1e-3));
  }
  CHECK_THROWS_AS(radial_weights(RadialGrid::make(1.0, 33), 2, RadialQuadrature::Simpson), Error);
}

TEST_CASE("flux identity on solved problems") {
  for (double p : {0.0, 0.5, 3.0}) {
    const RadialSolution s = solve_radial(p, 0.02, 2, 1.0, 1024);
    const auto w = radial_weights(s.grid, 2, RadialQuadrature::FluxConsistent);
    double c = 0.0;
    for (int i = 0; i < s.grid.size(); ++i) c += w[i] * std::pow(s.u[i], p);
    const double lhs = 0.02 * s.u.back();
    CHECK(std::abs(lhs - c) <= 1e-10 * std::max({1.0, lhs, c}));
  }
}

TEST_CASE("p = 1 is rejected") {
  try {
    solve_radial(1.0, 0.1, 2, 1.0, 256);
    FAIL("accepted p = 1");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PEqualsOne);
  }
  CHECK_THROWS_AS(solve_radial(0.5, 0.0, 2, 1.0, 256), Error);
  CHECK_THROWS_AS(solve_radial(0.5, 0.1, 2, 1.0, 8), Error);
  NewtonConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("warm start reaches the same solution") {
  const RadialSolution a = solve_radial(3.0, 0.02, 2, 1.0, 512);
  const RadialSolution b = solve_radial(3.0, 0.015, 2, 1.0, 512, {}, std::span<const double>(a.u));
  const RadialSolution c = solve_radial(3.0, 0.015, 2, 1.0, 512);
  for (int i = 0; i < b.grid.size(); ++i) CHECK(b.u[i] == doctest::Approx(c.u[i]).epsilon(1e-10));
  CHECK(b.initial_guess == 0.0);
}

TEST_CASE("eigenvalue bounds") {
  const RadialEigenResult e = solve_radial_eigen(2, 1.0, 0.01, 2048);
  CHECK(e.lambda <= 0.02);
  CHECK(e.lambda / 0.01 >= 0.95 * 2);
  CHECK(is_positive(e.eigenfunction.u));
  CHECK(*std::max_element(e.eigenfunction.u.begin(), e.eigenfunction.u.end()) == doctest::Approx(1.0));

  const RadialEigenResult small = solve_radial_eigen(2, 1.0, 1e-3, 2048);
  CHECK(*std::min_element(small.eigenfunction.u.begin(), small.eigenfunction.u.end()) >= 0.99);

  for (double beta : {1e-3, 0.1, 1.0, 10.0}) {
    for (int n : {2, 3}) CHECK(solve_radial_eigen(n, 1.0, beta, 512).lambda <= beta * n * (1 + 1e-12));
  }
}

TEST_CASE("eigenvalue against dense oracles") {
  const auto g = RadialGrid::make(1.0, 256);
  for (double beta : {0.05, 1.0, 20.0}) {
    const double ref = smallest_real_eigenvalue(radial_matrix(g, 2, beta, false));
    CHECK(solve_radial_eigen(2, 1.0, beta, 256).lambda == doctest::Approx(ref).epsilon(1e-9));
  }
  const double dirichlet = smallest_real_eigenvalue(radial_matrix(g, 2, 0.0, true));
  const double lam = solve_radial_eigen(2, 1.0, 1e6, 256).lambda;
  CHECK(std::abs(lam - dirichlet) <= 0.01 * dirichlet);
}

TEST_CASE("eigenvalue converges at second order to the Bessel root") {
  // u = J0(k r) with k J1(k) = beta J0(k) on the unit disk.
  const double beta = 1.0;
  double lo = 0.1, hi = 2.0;
  auto f = [&](double k) { return k * std::cyl_bessel_j(1.0, k) - beta * std::cyl_bessel_j(0.0, k); };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  const double exact = lo * lo;
  double prev = 0.0;
  for (int m : {64, 128, 256, 512}) {
    const double err = std::abs(solve_radial_eigen(2, 1.0, beta, m).lambda - exact);
    if (prev > 0.0) {
      CHECK(prev / err >= 3.5);
      CHECK(prev / err <= 4.5);
    }
    prev = err;
  }
}

TEST_CASE("csv export") {
  const RadialSolution s = solve_radial(0.0, 1.0, 2, 1.0, 16);
  std::ostringstream out;
  write_radial_csv(out, s);
  const std::string text = out.str();
  CHECK(text.rfind("r,u\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 18);
}
