#include "robin/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "robin/error.hpp"

namespace robin {

namespace {

// Row i couples u_{i-1}, u_i, u_{i+1} with coefficients lower[i], diag[i], upper[i].
struct Tridiagonal {
  std::vector<double> lower, diag, upper;
  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  Tridiagonal transposed() const {
    Tridiagonal t(diag.size());
    t.diag = diag;
    for (std::size_t i = 1; i < diag.size(); ++i) {
      t.lower[i] = upper[i - 1];
      t.upper[i - 1] = lower[i];
    }
    return t;
  }
};

// Thomas sweep; no pivoting.
std::vector<double> solve(const Tridiagonal& a, std::vector<double> rhs) {
  const std::size_t n = a.diag.size();
  std::vector<double> c(n, 0.0);
  double denom = a.diag[0];
  c[0] = a.upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = a.diag[i] - a.lower[i] * c[i - 1];
    c[i] = a.upper[i] / denom;
    rhs[i] = (rhs[i] - a.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

// -Delta_h with the Robin row, without the nonlinear term.
Tridiagonal laplacian(const RadialGrid& grid, double beta, int dimension) {
  const int m = grid.intervals;
  const double h = grid.spacing();
  const double h2 = h * h;
  const double n1 = dimension - 1.0;
  Tridiagonal a(m + 1);
  a.diag[0] = 2.0 * dimension / h2;
  a.upper[0] = -2.0 * dimension / h2;
  for (int i = 1; i < m; ++i) {
    const double adv = n1 / (2.0 * h * grid.node(i));
    a.lower[i] = -1.0 / h2 + adv;
    a.diag[i] = 2.0 / h2;
    a.upper[i] = -1.0 / h2 - adv;
  }
  a.lower[m] = -2.0 / h2;
  a.diag[m] = 2.0 / h2 + beta * (2.0 / h + n1 / grid.radius);
  return a;
}

inline double power_source(double u, double p, double floor) { return p == 0.0 ? 1.0 : std::pow(std::max(u, floor), p); }

inline double power_derivative(double u, double p, double floor) {
  return p == 0.0 ? 0.0 : p * std::pow(std::max(u, floor), p - 1.0);
}

// Residual rows plus, optionally, the per-row magnitude used for scaling.
// Second differences are formed from first differences of neighbours, which
// are exact in floating point when the values are close.
void evaluate(const RadialGrid& grid, std::span<const double> u, double p, double beta, int dimension, double floor,
              std::vector<double>& f, std::vector<double>* scale) {
  const int m = grid.intervals;
  const double h = grid.spacing();
  const double h2 = h * h;
  const double n1 = dimension - 1.0;
  f.assign(m + 1, 0.0);
  if (scale) scale->assign(m + 1, 0.0);

  {
    const double lap = 2.0 * dimension * (u[1] - u[0]) / h2;
    const double src = power_source(u[0], p, floor);
    f[0] = -lap - src;
    if (scale) (*scale)[0] = 2.0 * dimension * (std::abs(u[1]) + std::abs(u[0])) / h2 + std::abs(src);
  }
  for (int i = 1; i < m; ++i) {
    const double fwd = (u[i + 1] - u[i]) / h2;
    const double bwd = (u[i] - u[i - 1]) / h2;
    const double adv = n1 / grid.node(i) * (u[i + 1] - u[i - 1]) / (2.0 * h);
    const double src = power_source(u[i], p, floor);
    f[i] = -(fwd - bwd) - adv - src;
    if (scale) {
      const double c = n1 / (2.0 * h * grid.node(i));
      (*scale)[i] = std::abs(1.0 / h2 + c) * std::abs(u[i + 1]) + 2.0 / h2 * std::abs(u[i]) +
                    std::abs(1.0 / h2 - c) * std::abs(u[i - 1]) + std::abs(src);
    }
  }
  {
    const double diff = 2.0 * (u[m] - u[m - 1]) / h2;
    const double robin = beta * u[m] * (2.0 / h + n1 / grid.radius);
    const double src = power_source(u[m], p, floor);
    f[m] = diff + robin - src;
    if (scale) {
      (*scale)[m] = 2.0 / h2 * (std::abs(u[m]) + std::abs(u[m - 1])) + std::abs(robin) + std::abs(src);
    }
  }
}

double scaled_norm(const std::vector<double>& f, const std::vector<double>& scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = std::max(scale[i], std::numeric_limits<double>::min());
    worst = std::max(worst, std::abs(f[i]) / s);
  }
  return worst;
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_common(double beta, int dimension, double radius, int intervals) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidParameter, "beta must be positive");
  if (dimension < 2) throw Error(ErrorKind::InvalidParameter, "dimension must be >= 2");
  RadialGrid::make(radius, intervals);
}

}  // namespace

RadialGrid RadialGrid::make(double radius, int intervals) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorKind::InvalidParameter, "radius must be positive");
  if (intervals < 16) throw Error(ErrorKind::InvalidParameter, "radial grid needs at least 16 intervals");
  return RadialGrid{radius, intervals};
}

void NewtonConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidParameter, "Newton tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorKind::InvalidParameter, "Newton needs at least one iteration");
  if (!(step_tolerance > 0.0)) throw Error(ErrorKind::InvalidParameter, "Newton step tolerance must be positive");
  if (max_halvings < 0) throw Error(ErrorKind::InvalidParameter, "max_halvings must be non-negative");
}

double RadialSolution::sup_norm() const { return max_norm(u); }

std::vector<double> radial_residual(const RadialGrid& grid, std::span<const double> u, double p, double beta,
                                    int dimension, double positivity_floor) {
  if (static_cast<int>(u.size()) != grid.size()) throw Error(ErrorKind::InvalidParameter, "u must have M+1 entries");
  std::vector<double> f;
  evaluate(grid, u, p, beta, dimension, positivity_floor, f, nullptr);
  return f;
}

double radial_scaled_residual(const RadialGrid& grid, std::span<const double> u, double p, double beta, int dimension,
                              double positivity_floor) {
  if (static_cast<int>(u.size()) != grid.size()) throw Error(ErrorKind::InvalidParameter, "u must have M+1 entries");
  std::vector<double> f, scale;
  evaluate(grid, u, p, beta, dimension, positivity_floor, f, &scale);
  return scaled_norm(f, scale);
}

double robin_residual(const RadialGrid& grid, std::span<const double> u, double beta) {
  const int m = grid.intervals;
  const double du = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * grid.spacing());
  return du + beta * u[m];
}

RadialSolution solve_radial(double p, double beta, int dimension, double radius, int intervals,
                            const NewtonConfig& config, std::optional<std::span<const double>> initial) {
  if (p == 1.0) throw Error(ErrorKind::PEqualsOne, "p = 1 is the eigenvalue problem; use the eigensolver");
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidParameter, "p must be >= 0");
  check_common(beta, dimension, radius, intervals);
  config.validate();

  const RadialGrid grid = RadialGrid::make(radius, intervals);
  RadialSolution sol;
  sol.grid = grid;
  sol.p = p;
  sol.beta = beta;
  sol.dimension = dimension;
  if (initial) {
    if (static_cast<int>(initial->size()) != grid.size()) {
      throw Error(ErrorKind::InvalidParameter, "initial guess must have M+1 entries");
    }
    sol.u.assign(initial->begin(), initial->end());
  } else {
    sol.initial_guess = std::pow(beta * dimension / radius, 1.0 / (p - 1.0));
    sol.u.assign(grid.size(), sol.initial_guess);
  }

  const double floor = config.positivity_floor;
  const Tridiagonal base = laplacian(grid, beta, dimension);
  std::vector<double> f, scale, f_trial, trial(grid.size());
  evaluate(grid, sol.u, p, beta, dimension, floor, f, &scale);
  double scaled = scaled_norm(f, scale);
  double raw = max_norm(f);

  int it = 0;
  double last_step = std::numeric_limits<double>::infinity();
  while (scaled > config.tolerance || last_step > config.step_tolerance * max_norm(sol.u)) {
    if (it == config.max_iterations) {
      throw Error(ErrorKind::NoConvergence, "Newton budget of " + std::to_string(it) +
                                                " iterations exhausted, residual " + std::to_string(scaled));
    }
    ++it;
    Tridiagonal jac = base;
    for (int i = 0; i < grid.size(); ++i) jac.diag[i] -= power_derivative(sol.u[i], p, floor);
    std::vector<double> rhs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
    const std::vector<double> step = solve(jac, std::move(rhs));
    const double step_norm = max_norm(step);

    // Corrections at roundoff size cannot reduce the residual; take them whole.
    double t = 1.0;
    bool accepted = step_norm <= config.step_tolerance * max_norm(sol.u);
    if (accepted) {
      for (int i = 0; i < grid.size(); ++i) trial[i] = sol.u[i] + step[i];
    }
    for (int halving = 0; !accepted && halving <= config.max_halvings; ++halving, t *= 0.5) {
      for (int i = 0; i < grid.size(); ++i) trial[i] = sol.u[i] + t * step[i];
      evaluate(grid, trial, p, beta, dimension, floor, f_trial, nullptr);
      accepted = max_norm(f_trial) < (1.0 - 1e-4 * t) * raw;
    }
    // A backward-stable iterate whose correction is pure roundoff noise.
    if (!accepted && scaled <= config.tolerance) break;
    if (!accepted) {
      throw Error(ErrorKind::NoConvergence,
                  "line search failed after " + std::to_string(config.max_halvings) + " halvings at residual " +
                      std::to_string(scaled));
    }
    last_step = t * step_norm;
    sol.u = trial;
    evaluate(grid, sol.u, p, beta, dimension, floor, f, &scale);
    scaled = scaled_norm(f, scale);
    raw = max_norm(f);
  }

  sol.iterations = it;
  sol.residual_norm = scaled;
  sol.raw_residual_norm = raw;
  sol.robin_residual = robin_residual(grid, sol.u, beta);
  if (!is_positive(sol.u)) {
    throw Error(ErrorKind::NonpositiveSolution, "Newton converged to a sign-changing discrete solution");
  }
  return sol;
}

RadialEigenResult solve_radial_eigen(int dimension, double radius, double beta, int intervals,
                                     const RadialEigenConfig& config) {
  check_common(beta, dimension, radius, intervals);
  const RadialGrid grid = RadialGrid::make(radius, intervals);
  const Tridiagonal a = laplacian(grid, beta, dimension);

  std::vector<double> x(grid.size(), 1.0);
  double lambda = 0.0;
  bool converged = false;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    std::vector<double> y = solve(a, x);
    const double y_max = max_norm(y);
    const double next = 1.0 / y_max;  // x has sup-norm 1
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / y_max;
    if (it > 0 && std::abs(next - lambda) <= config.tolerance * std::abs(next)) {
      lambda = next;
      converged = true;
      ++it;
      break;
    }
    lambda = next;
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "inverse iteration did not converge");

  if (x[0] < 0.0) {
    for (double& v : x) v = -v;
  }
  RadialEigenResult result;
  result.lambda = lambda;
  RadialSolution& sol = result.eigenfunction;
  sol.grid = grid;
  sol.u = std::move(x);
  sol.p = 1.0;
  sol.beta = beta;
  sol.dimension = dimension;
  sol.iterations = it;
  std::vector<double> au(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double s = a.diag[i] * sol.u[i];
    if (i > 0) s += a.lower[i] * sol.u[i - 1];
    if (i + 1 < grid.size()) s += a.upper[i] * sol.u[i + 1];
    au[i] = s - lambda * sol.u[i];
  }
  sol.raw_residual_norm = max_norm(au);
  sol.residual_norm = sol.raw_residual_norm / (lambda * sol.sup_norm());
  sol.robin_residual = robin_residual(grid, sol.u, beta);
  if (!is_positive(sol.u)) throw Error(ErrorKind::NonpositiveSolution, "eigenvector is not positive");
  return result;
}

std::vector<double> radial_weights(const RadialGrid& grid, int dimension, RadialQuadrature rule) {
  const int m = grid.intervals;
  const double h = grid.spacing();
  std::vector<double> w(grid.size());
  switch (rule) {
    case RadialQuadrature::FluxConsistent: {
      // Solve A^T w = e_M for the operator with beta = 1; then w^T L = 0 for the
      // beta-free part, and the Robin diagonal fixes the boundary weight.
      const Tridiagonal at = laplacian(grid, 1.0, dimension).transposed();
      std::vector<double> e(grid.size(), 0.0);
      e[m] = std::pow(grid.radius, dimension - 1);
      return solve(at, std::move(e));
    }
    case RadialQuadrature::Trapezoid:
      for (int i = 0; i <= m; ++i) w[i] = h * std::pow(grid.node(i), dimension - 1);
      w[0] *= 0.5;
      w[m] *= 0.5;
      return w;
    case RadialQuadrature::Simpson:
      if (m % 2 != 0) throw Error(ErrorKind::InvalidParameter, "Simpson weights need an even number of intervals");
      for (int i = 0; i <= m; ++i) {
        const double c = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] = c * h / 3.0 * std::pow(grid.node(i), dimension - 1);
      }
      return w;
  }
  return w;
}

bool is_positive(std::span<const double> u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return v > 0.0; });
}

bool is_nonincreasing(std::span<const double> u, double slack) {
  const double tol = slack * max_norm(u);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    if (u[i + 1] > u[i] + tol) return false;
  }
  return true;
}

void write_radial_csv(std::ostream& out, const RadialSolution& solution) {
  out << "r,u\n";
  char buf[64];
  for (int i = 0; i < solution.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", solution.grid.node(i), solution.u[i]);
    out << buf;
  }
}

}  // namespace robin
