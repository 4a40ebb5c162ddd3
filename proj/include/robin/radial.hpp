#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace robin {

/// Uniform grid r_i = i R / M on [0, R].
struct RadialGrid {
  double radius = 1.0;
  int intervals = 2048;

  static RadialGrid make(double radius, int intervals);

  double spacing() const { return radius / intervals; }
  double node(int i) const { return i == intervals ? radius : radius * i / intervals; }
  int size() const { return intervals + 1; }
};

struct NewtonConfig {
  int max_iterations = 100;
  /// Bound on the max-norm of the scaled residual, the componentwise backward
  /// error |F_i| / (sum_j |A_ij| |u_j| + |u_i^p|).
  double tolerance = 1e-12;
  /// The last Newton correction must also be below step_tolerance * max|u|.
  /// The backward error alone saturates at roundoff long before the iterate
  /// has settled when u is large and nearly constant.
  double step_tolerance = 1e-10;
  int max_halvings = 30;
  /// Floor applied to the base of u^p so negative iterates act like u_+.
  double positivity_floor = 1e-300;

  void validate() const;
};

struct RadialSolution {
  RadialGrid grid;
  std::vector<double> u;
  double p = 0.0;
  double beta = 0.0;
  int dimension = 2;
  int iterations = 0;
  /// Scaled residual (componentwise backward error) at the returned iterate.
  double residual_norm = 0.0;
  /// Max-norm of the raw discrete equation residual.
  double raw_residual_norm = 0.0;
  /// u'(R) + beta u(R) with a one-sided second-order difference.
  double robin_residual = 0.0;
  /// Value of the constant initial guess (0 when a caller-supplied guess was used).
  double initial_guess = 0.0;

  double sup_norm() const;
};

/// Discrete residual F = -Delta_h u - u_+^p of the radial problem: symmetry
/// row at the origin, centered interior rows and the Robin row obtained by
/// eliminating the ghost node u_{M+1} = u_{M-1} - 2 h beta u_M.
std::vector<double> radial_residual(const RadialGrid& grid, std::span<const double> u, double p, double beta,
                                    int dimension, double positivity_floor = 1e-300);

/// Max-norm of the componentwise backward error of the radial equations.
double radial_scaled_residual(const RadialGrid& grid, std::span<const double> u, double p, double beta, int dimension,
                              double positivity_floor = 1e-300);

/// u'(R) + beta u(R), with u'(R) from the one-sided three-point difference.
double robin_residual(const RadialGrid& grid, std::span<const double> u, double beta);

/// Damped Newton solve of the radial problem on the ball of radius R.
/// Starts from the constant (beta N / R)^{1/(p-1)} unless `initial` is given.
RadialSolution solve_radial(double p, double beta, int dimension, double radius, int intervals,
                            const NewtonConfig& config = {},
                            std::optional<std::span<const double>> initial = std::nullopt);

struct RadialEigenConfig {
  int max_iterations = 500;
  double tolerance = 1e-12;
};

struct RadialEigenResult {
  double lambda = 0.0;
  /// Positive eigenfunction scaled to sup-norm 1; p is recorded as 1.
  RadialSolution eigenfunction;
};

/// Smallest eigenvalue of the discrete radial Robin operator by inverse
/// power iteration.
RadialEigenResult solve_radial_eigen(int dimension, double radius, double beta, int intervals,
                                     const RadialEigenConfig& config = {});

enum class RadialQuadrature {
  /// Weights w with sum_i w_i (-Delta_h u)_i = beta R^{N-1} u_M for every u:
  /// the summation-by-parts partner of the finite-difference operator. Second
  /// order accurate for r^{N-1} dr and makes the discrete flux balance exact.
  FluxConsistent,
  Trapezoid,
  /// Composite Simpson; requires an even number of intervals.
  Simpson,
};

/// Weights w_i approximating int_0^R f(r) r^{N-1} dr by sum_i w_i f(r_i).
std::vector<double> radial_weights(const RadialGrid& grid, int dimension, RadialQuadrature rule);

bool is_positive(std::span<const double> u);
/// u_{i+1} <= u_i + slack * max|u| for all i.
bool is_nonincreasing(std::span<const double> u, double slack = 1e-12);

/// CSV with header `r,u`, one row per node.
void write_radial_csv(std::ostream& out, const RadialSolution& solution);

}  // namespace robin
