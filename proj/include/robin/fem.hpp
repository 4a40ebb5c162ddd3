#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "robin/geometry.hpp"
#include "robin/radial.hpp"
#include "robin/sparse.hpp"

namespace robin {

/// P1 operators of the Robin weak form on a triangle mesh. Mass matrices are
/// lumped and stored as diagonals.
struct FemOperators {
  CsrMatrix stiffness;                 // K
  CsrMatrix system;                    // K + beta B
  std::vector<double> mass;            // row sums of the domain mass
  std::vector<double> boundary_mass;   // half edge length to each endpoint
  double beta = 0.0;
};

FemOperators assemble(const Mesh& mesh, double beta);

struct Field {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> u;
  double p = 0.0;
  double beta = 0.0;
  /// Componentwise backward error of the discrete equations.
  double residual_norm = 0.0;
  /// Max-norm of the raw residual (K + beta B) u - M u^p.
  double raw_residual_norm = 0.0;
  int iterations = 0;
  long linear_iterations = 0;

  double sup_norm() const;
};

/// Damped Newton for (K + beta B) u = M u_+^p from the constant
/// (beta |dOmega| / |Omega|)^{1/(p-1)}; each linear step by Jacobi-CG.
Field solve_semilinear(std::shared_ptr<const Mesh> mesh, double p, double beta, const NewtonConfig& config = {},
                       std::optional<std::span<const double>> initial = std::nullopt);

struct FemEigenConfig {
  int max_iterations = 500;
  /// Relative change of the Rayleigh quotient over one iteration.
  double tolerance = 1e-12;
  /// Max-norm change of the sup-normalized iterate.
  double vector_tolerance = 1e-11;
};

struct FemEigenResult {
  double lambda = 0.0;
  /// Positive eigenfield scaled to sup-norm 1; p is recorded as 1.
  Field field;
};

/// Smallest eigenpair of (K + beta B) x = lambda M x by inverse iteration.
/// beta = 0 is accepted and returns the Neumann pair (0, constant).
FemEigenResult solve_eigen(std::shared_ptr<const Mesh> mesh, double beta, const FemEigenConfig& config = {});

/// (u^T K u + beta u^T B u) / (sum_i M_ii |u_i|^{p+1})^{2/(p+1)} at the given field.
double rayleigh_quotient_ibeta(const FemOperators& ops, std::span<const double> u, double p);
double rayleigh_quotient_ibeta(const Field& field, double p);

/// CSV `node_index,x,y,u`.
void write_field_csv(std::ostream& out, const Field& field);

}  // namespace robin
