#include "robin/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "robin/error.hpp"

namespace robin {

namespace {

// Fills the quantities shared by every backend from nodal values, quadrature
// weights for int u^p (or int u), boundary weights and an interior mask.
struct NodalData {
  std::span<const double> u;
  std::span<const double> volume_weights;
  std::span<const double> boundary_weights;
  std::vector<bool> interior;
  double p = 0.0;
  double beta = 0.0;
  std::optional<double> lambda;
};

SweepRecord tabulate(const NodalData& data) {
  SweepRecord rec;
  rec.beta = data.beta;
  rec.p = data.p;
  rec.ok = true;
  rec.lambda = data.lambda;
  const std::size_t n = data.u.size();

  double volume = 0.0, boundary = 0.0, source = 0.0, boundary_u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = data.u[i];
    const double f = data.p == 0.0 ? 1.0 : std::pow(u, data.p);
    volume += data.volume_weights[i];
    boundary += data.boundary_weights[i];
    source += data.volume_weights[i] * f;
    boundary_u += data.boundary_weights[i] * u;
  }
  rec.measures = {volume, boundary};
  rec.c_beta = source;
  const double lam = data.lambda.value_or(1.0);
  rec.d_beta = lam * source / (data.beta * boundary);

  const double lhs = data.beta * boundary_u;
  const double rhs = lam * source;
  rec.flux_defect = std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});

  double sup = 0.0, sup_vhat = 0.0, min_u = std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  double boundary_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = data.u[i];
    const double v = u - rec.d_beta;
    sup = std::max(sup, std::abs(u));
    min_u = std::min(min_u, u);
    sup_vhat = std::max(sup_vhat, std::abs(v / rec.d_beta));
    if (data.interior[i]) min_v = std::min(min_v, v);
    boundary_v += data.boundary_weights[i] * v;
  }
  rec.sup_norm = sup;
  rec.min_u = min_u;
  rec.sup_vhat = sup_vhat;
  rec.min_v = min_v;
  rec.boundary_mean_v = boundary_v;
  return rec;
}

SweepRecord radial_record(const RadialSolution& s, RadialQuadrature rule, std::optional<double> lambda) {
  const int n = s.grid.size();
  const double sphere = s.dimension * unit_ball_volume(s.dimension);
  std::vector<double> w = radial_weights(s.grid, s.dimension, rule);
  for (double& x : w) x *= sphere;
  std::vector<double> b(n, 0.0);
  b[n - 1] = sphere * std::pow(s.grid.radius, s.dimension - 1);
  NodalData data{s.u, w, b, std::vector<bool>(n, true), lambda ? 1.0 : s.p, s.beta, lambda};
  data.interior[n - 1] = false;
  SweepRecord rec = tabulate(data);
  rec.iterations = s.iterations;
  rec.residual = s.residual_norm;
  return rec;
}

SweepRecord fem_record(const Field& f, std::optional<double> lambda) {
  const FemOperators ops = assemble(*f.mesh, f.beta);
  std::vector<bool> interior(f.u.size());
  const auto mask = f.mesh->boundary_mask();
  for (std::size_t i = 0; i < interior.size(); ++i) interior[i] = !mask[i];
  NodalData data{f.u, ops.mass, ops.boundary_mass, std::move(interior), lambda ? 1.0 : f.p, f.beta, lambda};
  SweepRecord rec = tabulate(data);
  rec.iterations = f.iterations;
  rec.residual = f.residual_norm;
  return rec;
}

}  // namespace

SweepRecord compute_record(const RadialSolution& solution, RadialQuadrature rule) {
  return radial_record(solution, rule, std::nullopt);
}

SweepRecord compute_record(const RadialEigenResult& result, RadialQuadrature rule) {
  return radial_record(result.eigenfunction, rule, result.lambda);
}

SweepRecord compute_record(const Field& field) { return fem_record(field, std::nullopt); }

SweepRecord compute_record(const FemEigenResult& result) { return fem_record(result.field, result.lambda); }

SweepRecord compute_record(const ShootResult& result) {
  SweepRecord rec = radial_record(result.solution, RadialQuadrature::Simpson, std::nullopt);
  rec.iterations = result.bisection_steps;
  rec.residual = result.residual;
  return rec;
}

const char* to_string(Backend backend) noexcept {
  switch (backend) {
    case Backend::Radial: return "radial";
    case Backend::Fem: return "fem";
    case Backend::Shoot: return "shoot";
  }
  return "?";
}

Backend parse_backend(std::string_view text) {
  if (text == "radial") return Backend::Radial;
  if (text == "fem") return Backend::Fem;
  if (text == "shoot") return Backend::Shoot;
  throw Error(ErrorKind::InvalidParameter, "unknown backend '" + std::string(text) + "'");
}

std::vector<double> log_spaced(double from, double to, int count) {
  if (!(from > 0.0) || !(to > 0.0) || !std::isfinite(from) || !std::isfinite(to)) {
    throw Error(ErrorKind::InvalidParameter, "log-spaced endpoints must be positive");
  }
  if (count < 1) throw Error(ErrorKind::InvalidParameter, "need at least one value");
  if (count == 1) return {from};
  std::vector<double> out(count);
  const double l0 = std::log10(from), l1 = std::log10(to);
  for (int k = 0; k < count; ++k) out[k] = std::pow(10.0, l0 + (l1 - l0) * k / (count - 1));
  out.front() = from;
  out.back() = to;
  return out;
}

std::vector<double> parse_beta_list(std::string_view text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
      throw Error(ErrorKind::ParseError, "bad number '" + std::string(s) + "' in beta list");
    }
    return v;
  };
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) {
    // Plain comma-separated list.
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      out.push_back(number(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string_view::npos || !text.ends_with("log")) {
    throw Error(ErrorKind::ParseError, "beta list must look like a:b:Klog");
  }
  const double a = number(text.substr(0, c1));
  const double b = number(text.substr(c1 + 1, c2 - c1 - 1));
  const std::string_view k = text.substr(c2 + 1, text.size() - c2 - 4);
  int count = 0;
  const auto r = std::from_chars(k.data(), k.data() + k.size(), count);
  if (r.ec != std::errc{} || r.ptr != k.data() + k.size() || count < 1) {
    throw Error(ErrorKind::ParseError, "bad count '" + std::string(k) + "' in beta list");
  }
  return log_spaced(a, b, count);
}

std::vector<double> default_betas() { return log_spaced(1e-1, 1e-3, 17); }

SweepRecord solve_point(const Problem& problem, double beta) {
  const bool eigen = problem.p == 1.0;
  switch (problem.backend) {
    case Backend::Radial:
      if (eigen) {
        return compute_record(
            solve_radial_eigen(problem.dimension, problem.radius, beta, problem.intervals, problem.radial_eigen),
            problem.quadrature);
      }
      return compute_record(
          solve_radial(problem.p, beta, problem.dimension, problem.radius, problem.intervals, problem.newton),
          problem.quadrature);
    case Backend::Fem:
      if (!problem.mesh) throw Error(ErrorKind::InvalidParameter, "fem backend needs a mesh");
      if (eigen) return compute_record(solve_eigen(problem.mesh, beta, problem.fem_eigen));
      return compute_record(solve_semilinear(problem.mesh, problem.p, beta, problem.newton));
    case Backend::Shoot:
      if (!problem.profile) throw Error(ErrorKind::InvalidParameter, "shoot backend needs a profile");
      return compute_record(find_delta_hat(*problem.profile, beta, problem.shoot));
  }
  throw Error(ErrorKind::InvalidParameter, "unknown backend");
}

namespace {

SweepRecord failed(double beta, double p, const std::exception& e) {
  SweepRecord rec;
  rec.beta = beta;
  rec.p = p;
  rec.ok = false;
  rec.error = e.what();
  return rec;
}

std::vector<SweepRecord> continuation_sweep(const Problem& problem, const std::vector<double>& betas) {
  std::vector<SweepRecord> out;
  std::vector<double> previous;
  for (double beta : betas) {
    try {
      std::optional<std::span<const double>> guess;
      if (!previous.empty()) guess = std::span<const double>(previous);
      if (problem.backend == Backend::Radial) {
        RadialSolution s = solve_radial(problem.p, beta, problem.dimension, problem.radius, problem.intervals,
                                        problem.newton, guess);
        out.push_back(compute_record(s, problem.quadrature));
        previous = std::move(s.u);
      } else {
        Field f = solve_semilinear(problem.mesh, problem.p, beta, problem.newton, guess);
        out.push_back(compute_record(f));
        previous = std::move(f.u);
      }
    } catch (const std::exception& e) {
      out.push_back(failed(beta, problem.p, e));
      previous.clear();
    }
  }
  return out;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const Problem& problem, const std::vector<double>& betas,
                                   const SweepOptions& options) {
  for (double b : betas) {
    if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorKind::InvalidParameter, "every beta must be positive");
  }
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (!(betas[i] < betas[i - 1])) throw Error(ErrorKind::InvalidParameter, "beta list must be strictly decreasing");
  }
  if (problem.backend == Backend::Shoot && problem.profile) {
    const double a = problem.profile->decay_exponent();
    if (!betas.empty() && !(betas.front() < a)) {
      throw Error(ErrorKind::OutsideExistenceWindow, "every beta must be below 2/(p-1)");
    }
  }
  const bool warm = options.continuation && problem.p != 1.0 && problem.backend != Backend::Shoot;
  if (warm) return continuation_sweep(problem, betas);

  std::vector<SweepRecord> out(betas.size());
  auto run = [&](std::size_t i) {
    try {
      out[i] = solve_point(problem, betas[i]);
    } catch (const std::exception& e) {
      out[i] = failed(betas[i], problem.p, e);
    }
  };
  const int jobs = std::clamp(options.jobs, 1, static_cast<int>(std::max<std::size_t>(betas.size(), 1)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < betas.size(); ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < betas.size(); i = next++) run(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

const char* to_string(RecordField field) noexcept {
  switch (field) {
    case RecordField::SupNorm: return "sup_norm";
    case RecordField::CBeta: return "c_beta";
    case RecordField::DBeta: return "d_beta";
    case RecordField::SupVhat: return "sup_vhat";
    case RecordField::Lambda: return "lambda";
  }
  return "?";
}

RecordField parse_record_field(std::string_view text) {
  for (RecordField f : {RecordField::SupNorm, RecordField::CBeta, RecordField::DBeta, RecordField::SupVhat,
                        RecordField::Lambda}) {
    if (text == to_string(f)) return f;
  }
  throw Error(ErrorKind::InvalidParameter, "unknown record field '" + std::string(text) + "'");
}

double field_value(const SweepRecord& record, RecordField field) {
  switch (field) {
    case RecordField::SupNorm: return record.sup_norm;
    case RecordField::CBeta: return record.c_beta;
    case RecordField::DBeta: return record.d_beta;
    case RecordField::SupVhat: return record.sup_vhat;
    case RecordField::Lambda: return record.lambda.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

PowerLawFit fit_power_law(const std::vector<SweepRecord>& records, RecordField field, double beta_lo,
                          double beta_hi) {
  std::vector<double> xs, ys;
  PowerLawFit fit;
  fit.field = field;
  fit.beta_min = std::numeric_limits<double>::infinity();
  fit.beta_max = 0.0;
  for (const auto& r : records) {
    if (!r.ok || r.beta < beta_lo || r.beta > beta_hi) continue;
    const double y = field_value(r, field);
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    xs.push_back(std::log(r.beta));
    ys.push_back(std::log(y));
    fit.beta_min = std::min(fit.beta_min, r.beta);
    fit.beta_max = std::max(fit.beta_max, r.beta);
  }
  const std::size_t n = xs.size();
  if (n < 4) {
    throw Error(ErrorKind::InsufficientData,
                "power-law fit needs at least 4 successful records, got " + std::to_string(n));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "power-law fit needs distinct beta values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.constant = std::exp(fit.intercept);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.n_points = static_cast<int>(n);
  return fit;
}

PowerLawFit fit_smallest_decade(const std::vector<SweepRecord>& records, RecordField field) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.ok) lo = std::min(lo, r.beta);
  }
  if (!std::isfinite(lo)) throw Error(ErrorKind::InsufficientData, "no successful records");
  return fit_power_law(records, field, 0.0, 10.0 * lo * (1.0 + 1e-12));
}

double predicted_sup_norm(double p, double beta, const DiscreteMeasures& m) {
  if (p < 1.0) return std::pow(m.volume / m.boundary, 1.0 / (1.0 - p)) * std::pow(beta, -1.0 / (1.0 - p));
  if (p > 1.0) return std::pow(m.boundary / m.volume, 1.0 / (p - 1.0)) * std::pow(beta, 1.0 / (p - 1.0));
  return 1.0;
}

std::vector<ConstantCheckRow> check_theorem_constant(const std::vector<SweepRecord>& records, double p,
                                                     std::optional<TheoremQuantity> quantity) {
  const TheoremQuantity q = quantity.value_or(p == 1.0 ? TheoremQuantity::LambdaOverBeta : TheoremQuantity::SupNorm);
  std::vector<ConstantCheckRow> rows;
  for (const auto& r : records) {
    if (!r.ok) continue;
    ConstantCheckRow row;
    row.beta = r.beta;
    switch (q) {
      case TheoremQuantity::SupNorm:
        row.observed = r.sup_norm;
        row.predicted = predicted_sup_norm(p, r.beta, r.measures);
        break;
      case TheoremQuantity::LambdaOverBeta:
        row.observed = r.lambda.value_or(std::numeric_limits<double>::quiet_NaN()) / r.beta;
        row.predicted = r.measures.boundary / r.measures.volume;
        break;
      case TheoremQuantity::EigenMinimum:
        row.observed = r.min_u / r.sup_norm;
        row.predicted = 1.0;
        break;
    }
    row.ratio = row.observed / row.predicted;
    rows.push_back(row);
  }
  return rows;
}

std::string InvariantReport::describe() const {
  std::string out;
  auto add = [&](bool ok, const char* name) {
    if (ok) return;
    if (!out.empty()) out += ", ";
    out += name;
  };
  add(positive_v, "v not positive");
  add(boundary_mean, "boundary mean of v");
  add(flux, "flux identity");
  add(lemma_bound, "a priori bound");
  return out.empty() ? "ok" : out;
}

InvariantReport check_invariants(const SweepRecord& r) {
  InvariantReport rep;
  const double S = r.measures.boundary, V = r.measures.volume;
  rep.positive_v = r.min_v > 0.0;
  rep.boundary_mean = std::abs(r.boundary_mean_v) <= 1e-9 * S * r.sup_norm;
  rep.flux = r.flux_defect <= 1e-10;
  if (r.lambda) {
    rep.lemma_bound = *r.lambda <= r.beta * S / V * (1.0 + 1e-12);
  } else if (r.p < 1.0) {
    rep.lemma_bound = r.d_beta >= predicted_sup_norm(r.p, r.beta, r.measures) * (1.0 - 1e-8);
  } else {
    rep.lemma_bound = r.d_beta <= predicted_sup_norm(r.p, r.beta, r.measures) * (1.0 + 1e-8);
  }
  return rep;
}

namespace {

std::vector<const SweepRecord*> descending_ok(const std::vector<SweepRecord>& records) {
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records) {
    if (r.ok) ok.push_back(&r);
  }
  std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->beta > b->beta; });
  return ok;
}

}  // namespace

bool vhat_decreasing(const std::vector<SweepRecord>& records) {
  const auto ok = descending_ok(records);
  for (std::size_t i = 1; i < ok.size(); ++i) {
    if (!(ok[i]->sup_vhat < ok[i - 1]->sup_vhat)) return false;
  }
  return true;
}

bool vhat_bounded(const std::vector<SweepRecord>& records) {
  const auto ok = descending_ok(records);
  if (ok.empty()) return true;
  const double c0 = ok.front()->sup_vhat;
  return std::all_of(ok.begin(), ok.end(), [&](auto* r) { return r->sup_vhat <= c0; });
}

TorsionBounds torsion_bounds(double lambda, double beta, int dimension) {
  if (!(lambda > 0.0) || !(beta > 0.0)) throw Error(ErrorKind::InvalidParameter, "need lambda > 0 and beta > 0");
  const double n = dimension;
  const double arg = 2048.0 * 3.0 * std::sqrt(3.0) * n * (1.0 + std::sqrt(lambda) / beta);
  return {1.0 / lambda, 6.0 * n / lambda * std::log(arg)};
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "beta,sup_norm,c_beta,d_beta,sup_vhat,min_v,boundary_mean_v,lambda,iters,residual,status\n";
  char buf[512];
  for (const auto& r : records) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%.17g,,,,,,,,,,failed\n", r.beta);
      out << buf;
      continue;
    }
    char lam[32] = "";
    if (r.lambda) std::snprintf(lam, sizeof lam, "%.17g", *r.lambda);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%d,%.17g,ok\n", r.beta, r.sup_norm,
                  r.c_beta, r.d_beta, r.sup_vhat, r.min_v, r.boundary_mean_v, lam, r.iterations, r.residual);
    out << buf;
  }
}

std::string fit_json(const PowerLawFit& fit) {
  nlohmann::ordered_json j;
  j["field"] = to_string(fit.field);
  j["slope"] = fit.slope;
  j["constant"] = fit.constant;
  j["r2"] = fit.r2;
  j["beta_min"] = fit.beta_min;
  j["beta_max"] = fit.beta_max;
  j["n_points"] = fit.n_points;
  return j.dump(2);
}

}  // namespace robin
