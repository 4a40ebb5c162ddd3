#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robin/fem.hpp"
#include "robin/geometry.hpp"
#include "robin/radial.hpp"
#include "robin/shooting.hpp"

namespace robin {

/// Discrete |Omega| and |dOmega| seen by a solution's own quadrature.
struct DiscreteMeasures {
  double volume = 0.0;
  double boundary = 0.0;
};

struct SweepRecord {
  double beta = 0.0;
  double p = 0.0;
  bool ok = false;
  std::string error;

  double sup_norm = 0.0;
  double c_beta = 0.0;
  double d_beta = 0.0;
  double sup_vhat = 0.0;
  /// min(u - d_beta) over interior nodes.
  double min_v = 0.0;
  double boundary_mean_v = 0.0;
  std::optional<double> lambda;
  int iterations = 0;
  double residual = 0.0;

  // Diagnostics used by the invariant checks; not part of the CSV.
  DiscreteMeasures measures;
  double min_u = 0.0;
  /// |beta int_dOmega u - int_Omega u^p| / max(1, both sides); for p = 1 the
  /// right side is lambda int_Omega u.
  double flux_defect = 0.0;
};

SweepRecord compute_record(const RadialSolution& solution,
                           RadialQuadrature rule = RadialQuadrature::FluxConsistent);
SweepRecord compute_record(const RadialEigenResult& result,
                           RadialQuadrature rule = RadialQuadrature::FluxConsistent);
SweepRecord compute_record(const Field& field);
SweepRecord compute_record(const FemEigenResult& result);
/// Shooting solutions are sampled from the continuous solution; Simpson's rule.
SweepRecord compute_record(const ShootResult& result);

enum class Backend { Radial, Fem, Shoot };

const char* to_string(Backend backend) noexcept;
Backend parse_backend(std::string_view text);

/// Everything needed to solve one (p, beta) point. p = 1 selects the eigen
/// solver of the radial or fem backend.
struct Problem {
  Backend backend = Backend::Radial;
  double p = 0.0;
  int dimension = 2;
  double radius = 1.0;
  int intervals = 2048;
  RadialQuadrature quadrature = RadialQuadrature::FluxConsistent;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const ShootingProfile> profile;
  ShootOptions shoot;
  NewtonConfig newton;
  RadialEigenConfig radial_eigen;
  FemEigenConfig fem_eigen;
};

struct SweepOptions {
  /// Reuse the previous solution as the next initial guess (sequential).
  bool continuation = false;
  int jobs = 1;
};

/// `a:b:Klog`: K log-spaced values from a down to b, both included.
std::vector<double> parse_beta_list(std::string_view text);
std::vector<double> log_spaced(double from, double to, int count);
/// Eight values per decade over [1e-3, 1e-1].
std::vector<double> default_betas();

SweepRecord solve_point(const Problem& problem, double beta);

/// One record per beta, in the given order. Failed solves become rows with
/// ok = false instead of aborting the sweep.
std::vector<SweepRecord> run_sweep(const Problem& problem, const std::vector<double>& betas,
                                   const SweepOptions& options = {});

enum class RecordField { SupNorm, CBeta, DBeta, SupVhat, Lambda };

const char* to_string(RecordField field) noexcept;
RecordField parse_record_field(std::string_view text);
double field_value(const SweepRecord& record, RecordField field);

struct PowerLawFit {
  RecordField field = RecordField::SupNorm;
  double slope = 0.0;
  double intercept = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  int n_points = 0;
};

/// Least squares of log(field) on log(beta) over successful records with
/// beta in [beta_lo, beta_hi].
PowerLawFit fit_power_law(const std::vector<SweepRecord>& records, RecordField field, double beta_lo = 0.0,
                          double beta_hi = std::numeric_limits<double>::infinity());
/// The fit over the smallest decade of the sweep.
PowerLawFit fit_smallest_decade(const std::vector<SweepRecord>& records, RecordField field);

enum class TheoremQuantity { SupNorm, LambdaOverBeta, EigenMinimum };

struct ConstantCheckRow {
  double beta = 0.0;
  double observed = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
};

/// Leading-order prediction for sup u as beta -> 0, from discrete measures.
double predicted_sup_norm(double p, double beta, const DiscreteMeasures& measures);

/// Observed over predicted for every successful record; the last row is the
/// headline number.
std::vector<ConstantCheckRow> check_theorem_constant(const std::vector<SweepRecord>& records, double p,
                                                     std::optional<TheoremQuantity> quantity = std::nullopt);

struct InvariantReport {
  bool positive_v = true;
  bool boundary_mean = true;
  bool flux = true;
  bool lemma_bound = true;

  bool all() const { return positive_v && boundary_mean && flux && lemma_bound; }
  std::string describe() const;
};

/// Per-record invariants: v > 0 at interior nodes, zero boundary mean of v,
/// flux balance and the a priori bound on d_beta (or lambda).
InvariantReport check_invariants(const SweepRecord& record);

/// sup_vhat strictly decreasing along beta-descending successful records.
bool vhat_decreasing(const std::vector<SweepRecord>& records);
/// sup_vhat never exceeds its value at the largest beta.
bool vhat_bounded(const std::vector<SweepRecord>& records);

struct TorsionBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// lambda^{-1} <= sup u <= 6 N lambda^{-1} log(2^11 3 sqrt(3) N (1 + sqrt(lambda)/beta)).
TorsionBounds torsion_bounds(double lambda, double beta, int dimension);

/// Columns beta,sup_norm,c_beta,d_beta,sup_vhat,min_v,boundary_mean_v,lambda,iters,residual,status.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

std::string fit_json(const PowerLawFit& fit);

}  // namespace robin
