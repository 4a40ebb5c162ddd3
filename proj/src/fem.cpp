#include "robin/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "robin/error.hpp"
#include "robin/kernels.hpp"

namespace robin {

namespace {

double bounding_box_area(const Mesh& mesh) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& p : mesh.nodes()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return (x1 - x0) * (y1 - y0);
}

inline double source(double u, double p, double floor) { return p == 0.0 ? 1.0 : std::pow(std::max(u, floor), p); }

struct Residual {
  std::vector<double> f;      // (K + beta B) u - M u^p
  std::vector<double> scale;  // |K + beta B| |u| + M |u^p|
};

void evaluate(const FemOperators& ops, std::span<const double> u, double p, double floor, Residual& out,
              bool with_scale) {
  const std::size_t n = u.size();
  out.f.resize(n);
  ops.system.multiply(u, out.f);
  if (with_scale) out.scale.assign(n, 0.0);
  const auto rp = ops.system.row_ptr();
  const auto cols = ops.system.cols();
  const auto vals = ops.system.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ops.mass[i] * source(u[i], p, floor);
    out.f[i] -= s;
    if (with_scale) {
      double acc = std::abs(s);
      for (auto k = rp[i]; k < rp[i + 1]; ++k) acc += std::abs(vals[k]) * std::abs(u[cols[k]]);
      out.scale[i] = acc;
    }
  }
}

double backward_error(const Residual& r) {
  double worst = 0.0;
  for (std::size_t i = 0; i < r.f.size(); ++i) {
    worst = std::max(worst, std::abs(r.f[i]) / std::max(r.scale[i], std::numeric_limits<double>::min()));
  }
  return worst;
}

// Linear solve used inside Newton: CG, with the dense fallback for small systems.
std::vector<double> linear_solve(const CsrMatrix& a, std::span<const double> b, long& iterations) {
  std::vector<double> x(b.size(), 0.0);
  const CgResult cg = conjugate_gradient(a, b, x);
  iterations += cg.iterations;
  if (cg.converged) return x;
  if (a.size() <= 500) return dense_solve(a.to_dense(), std::vector<double>(b.begin(), b.end()));
  throw Error(ErrorKind::NoConvergence,
              "CG stopped at relative residual " + std::to_string(cg.relative_residual) + " after " +
                  std::to_string(cg.iterations) + " iterations");
}

}  // namespace

FemOperators assemble(const Mesh& mesh, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidParameter, "beta must be >= 0");
  const std::size_t n = mesh.num_nodes();
  const double min_area = 1e-14 * bounding_box_area(mesh);

  FemOperators ops;
  ops.beta = beta;
  ops.mass.assign(n, 0.0);
  ops.boundary_mass.assign(n, 0.0);
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.num_triangles());

  const auto nodes = mesh.nodes();
  const auto areas = mesh.triangle_areas();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = areas[t];
    if (area <= min_area) throw Error(ErrorKind::DegenerateTriangle, "triangle " + std::to_string(t));
    // Gradient of the hat function at vertex k is (y_{k+1} - y_{k+2}, x_{k+2} - x_{k+1}) / (2 area).
    double gx[3], gy[3];
    for (int k = 0; k < 3; ++k) {
      const Point& b = nodes[tri[(k + 1) % 3]];
      const Point& c = nodes[tri[(k + 2) % 3]];
      gx[k] = b.y - c.y;
      gy[k] = c.x - b.x;
    }
    const double factor = 1.0 / (4.0 * area);
    for (int i = 0; i < 3; ++i) {
      ops.mass[tri[i]] += area / 3.0;
      for (int j = 0; j < 3; ++j) trips.push_back({tri[i], tri[j], factor * (gx[i] * gx[j] + gy[i] * gy[j])});
    }
  }
  const auto lengths = mesh.edge_lengths();
  for (std::size_t e = 0; e < lengths.size(); ++e) {
    const auto& edge = mesh.boundary_edges()[e];
    ops.boundary_mass[edge[0]] += 0.5 * lengths[e];
    ops.boundary_mass[edge[1]] += 0.5 * lengths[e];
  }
  ops.stiffness = CsrMatrix(n, std::move(trips));
  ops.system = ops.stiffness;
  std::vector<double> robin(n);
  for (std::size_t i = 0; i < n; ++i) robin[i] = beta * ops.boundary_mass[i];
  ops.system.add_to_diagonal(robin);
  return ops;
}

double Field::sup_norm() const { return kernels::max_abs(u); }

Field solve_semilinear(std::shared_ptr<const Mesh> mesh, double p, double beta, const NewtonConfig& config,
                       std::optional<std::span<const double>> initial) {
  if (p == 1.0) throw Error(ErrorKind::PEqualsOne, "p = 1 is the eigenvalue problem; use solve_eigen");
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidParameter, "p must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidParameter, "beta must be positive");
  config.validate();

  const FemOperators ops = assemble(*mesh, beta);
  const std::size_t n = mesh->num_nodes();
  Field field;
  field.mesh = mesh;
  field.p = p;
  field.beta = beta;
  if (initial) {
    if (initial->size() != n) throw Error(ErrorKind::InvalidParameter, "initial guess size mismatch");
    field.u.assign(initial->begin(), initial->end());
  } else {
    const MeshMeasures m = mesh_measures(*mesh);
    field.u.assign(n, std::pow(beta * m.boundary / m.volume, 1.0 / (p - 1.0)));
  }

  const double floor = config.positivity_floor;
  Residual res, trial_res;
  std::vector<double> trial(n), deriv(n), rhs(n);
  evaluate(ops, field.u, p, floor, res, true);
  double scaled = backward_error(res);
  double raw = kernels::max_abs(res.f);
  double last_step = std::numeric_limits<double>::infinity();

  int it = 0;
  while (scaled > config.tolerance || last_step > config.step_tolerance * kernels::max_abs(field.u)) {
    if (it == config.max_iterations) {
      throw Error(ErrorKind::NoConvergence, "Newton budget exhausted at residual " + std::to_string(scaled));
    }
    ++it;
    // u^{p-1} blows up at 0 for p < 1; clamp its argument relative to |u|_inf.
    const double jac_floor = p < 1.0 ? 1e-12 * kernels::max_abs(field.u) : floor;
    CsrMatrix jac = ops.system;
    for (std::size_t i = 0; i < n; ++i) {
      deriv[i] = p == 0.0 ? 0.0 : -ops.mass[i] * p * std::pow(std::max(field.u[i], jac_floor), p - 1.0);
      rhs[i] = -res.f[i];
    }
    jac.add_to_diagonal(deriv);
    const std::vector<double> step = linear_solve(jac, rhs, field.linear_iterations);
    const double step_norm = kernels::max_abs(step);

    double t = 1.0;
    bool accepted = step_norm <= config.step_tolerance * kernels::max_abs(field.u);
    if (accepted) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = field.u[i] + step[i];
    }
    for (int halving = 0; !accepted && halving <= config.max_halvings; ++halving, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = field.u[i] + t * step[i];
      evaluate(ops, trial, p, floor, trial_res, false);
      accepted = kernels::max_abs(trial_res.f) < (1.0 - 1e-4 * t) * raw;
    }
    // A backward-stable iterate whose correction is pure roundoff noise.
    if (!accepted && scaled <= config.tolerance) break;
    if (!accepted) {
      throw Error(ErrorKind::NoConvergence, "line search failed at residual " + std::to_string(scaled));
    }
    last_step = t * step_norm;
    field.u.swap(trial);
    evaluate(ops, field.u, p, floor, res, true);
    scaled = backward_error(res);
    raw = kernels::max_abs(res.f);
  }
  field.iterations = it;
  field.residual_norm = scaled;
  field.raw_residual_norm = raw;
  if (!is_positive(field.u)) {
    throw Error(ErrorKind::NonpositiveSolution, "Newton converged to a sign-changing discrete solution");
  }
  return field;
}

FemEigenResult solve_eigen(std::shared_ptr<const Mesh> mesh, double beta, const FemEigenConfig& config) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidParameter, "beta must be >= 0");
  const FemOperators ops = assemble(*mesh, beta);
  const std::size_t n = mesh->num_nodes();

  // The pure Neumann operator is singular; shift it by M.
  const double shift = beta == 0.0 ? 1.0 : 0.0;
  CsrMatrix shifted = ops.system;
  if (shift != 0.0) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = shift * ops.mass[i];
    shifted.add_to_diagonal(d);
  }

  auto rayleigh = [&](std::span<const double> x) {
    std::vector<double> ax(n);
    ops.system.multiply(x, ax);
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += ops.mass[i] * x[i] * x[i];
    return kernels::dot(x, ax) / mx;
  };

  std::vector<double> x(n, 1.0), rhs(n), next(n);
  double lambda = rayleigh(x);
  FemEigenResult result;
  long linear_iterations = 0;
  bool converged = false;
  int it = 0;
  for (; it < config.max_iterations && !converged; ++it) {
    kernels::multiply(ops.mass, x, rhs);
    std::fill(next.begin(), next.end(), 0.0);
    std::copy(x.begin(), x.end(), next.begin());
    const CgResult cg = conjugate_gradient(shifted, rhs, next);
    linear_iterations += cg.iterations;
    if (!cg.converged && n <= 500) next = dense_solve(shifted.to_dense(), rhs);
    const double scale = kernels::max_abs(next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= scale;
      change = std::max(change, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    const double updated = rayleigh(x);
    // The quotient settles quadratically faster than the vector; the flux
    // balance needs the vector too.
    converged = change <= 1e-15 ||
                (std::abs(updated - lambda) <= config.tolerance * std::abs(updated) && change <= config.vector_tolerance);
    lambda = updated;
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "inverse iteration did not converge");
  if (x[0] < 0.0) {
    for (double& v : x) v = -v;
  }

  result.lambda = lambda;
  Field& f = result.field;
  f.mesh = mesh;
  f.u = std::move(x);
  f.p = 1.0;
  f.beta = beta;
  f.iterations = it;
  f.linear_iterations = linear_iterations;
  std::vector<double> r(n);
  ops.system.multiply(f.u, r);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] -= lambda * ops.mass[i] * f.u[i];
    scale = std::max(scale, ops.system.norm_inf() * std::abs(f.u[i]));
  }
  f.raw_residual_norm = kernels::max_abs(r);
  f.residual_norm = scale > 0.0 ? f.raw_residual_norm / scale : 0.0;
  if (!is_positive(f.u)) throw Error(ErrorKind::NonpositiveSolution, "eigenfield is not positive");
  return result;
}

double rayleigh_quotient_ibeta(const FemOperators& ops, std::span<const double> u, double p) {
  const std::size_t n = u.size();
  std::vector<double> ku(n);
  ops.stiffness.multiply(u, ku);
  double energy = kernels::dot(u, ku);
  double boundary = 0.0;
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    boundary += ops.boundary_mass[i] * u[i] * u[i];
    lp += ops.mass[i] * std::pow(std::abs(u[i]), p + 1.0);
  }
  if (!(lp > 0.0)) throw Error(ErrorKind::ZeroField, "quotient undefined for the zero field");
  return (energy + ops.beta * boundary) / std::pow(lp, 2.0 / (p + 1.0));
}

double rayleigh_quotient_ibeta(const Field& field, double p) {
  return rayleigh_quotient_ibeta(assemble(*field.mesh, field.beta), field.u, p);
}

void write_field_csv(std::ostream& out, const Field& field) {
  out << "node_index,x,y,u\n";
  char buf[128];
  const auto nodes = field.mesh->nodes();
  for (std::size_t i = 0; i < field.u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, nodes[i].x, nodes[i].y, field.u[i]);
    out << buf;
  }
}

}  // namespace robin
