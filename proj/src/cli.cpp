#include "robin/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "robin/error.hpp"
#include "robin/fem.hpp"

namespace robin::cli {

using json = nlohmann::ordered_json;

const char* to_string(Command command) noexcept {
  switch (command) {
    case Command::Solve: return "solve";
    case Command::Eigen: return "eigen";
    case Command::Shoot: return "shoot";
    case Command::Sweep: return "sweep";
    case Command::CheckInvariants: return "check-invariants";
    case Command::Mesh: return "mesh";
  }
  return "?";
}

namespace {

constexpr const char* kDomains[] = {"ball", "disk", "rectangle", "annulus", "mesh"};

bool is_planar(const RunConfig& c) { return c.domain != "ball" || c.domain_params.dimension == 2; }

void add_domain_flags(CLI::App& sub, RunConfig& c) {
  sub.add_option("--domain", c.domain, "ball | disk | rectangle | annulus | mesh")
      ->check(CLI::IsMember({"ball", "disk", "rectangle", "annulus", "mesh"}))
      ->capture_default_str();
  sub.add_option("--N", c.domain_params.dimension, "space dimension of the ball")->capture_default_str();
  sub.add_option("--R", c.domain_params.radius, "ball radius")->capture_default_str();
  sub.add_option("--width", c.domain_params.width, "rectangle width")->capture_default_str();
  sub.add_option("--height", c.domain_params.height, "rectangle height")->capture_default_str();
  sub.add_option("--r-inner", c.domain_params.r_inner, "annulus inner radius")->capture_default_str();
  sub.add_option("--r-outer", c.domain_params.r_outer, "annulus outer radius")->capture_default_str();
  sub.add_option("--mesh", c.domain_params.mesh_path, "mesh file for --domain mesh");
}

void add_discretization_flags(CLI::App& sub, RunConfig& c, std::string& backend) {
  sub.add_option("--backend", backend, "radial | fem | shoot (default: radial on balls, fem otherwise)")
      ->check(CLI::IsMember({"radial", "fem", "shoot"}));
  sub.add_option("--M", c.intervals, "radial grid intervals")->capture_default_str();
  sub.add_option("--h", c.h, "mesh size for generated meshes")->capture_default_str();
  sub.add_option("--tol", c.newton.tolerance, "Newton backward-error tolerance")->capture_default_str();
  sub.add_option("--step-tol", c.newton.step_tolerance, "Newton relative step tolerance")->capture_default_str();
  sub.add_option("--max-iter", c.newton.max_iterations, "Newton iteration budget")->capture_default_str();
}

void add_profile_flags(CLI::App& sub, RunConfig& c) {
  sub.add_option("--rtol", c.profile.rtol, "profile ODE relative tolerance")->capture_default_str();
  sub.add_option("--atol", c.profile.atol, "profile ODE absolute tolerance")->capture_default_str();
  sub.add_option("--r-max", c.profile.r_max, "profile integration radius")->capture_default_str();
}

void add_output_flags(CLI::App& sub, RunConfig& c, std::string& format) {
  sub.add_option("--out", c.out, "primary artifact path (relative to the output directory)");
  sub.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  sub.add_flag("--no-meta", c.no_meta, "omit the timestamp from artifacts");
}

[[noreturn]] void conflict(const std::string& what) { throw UsageError("conflicting-flags", what); }
[[noreturn]] void missing(const std::string& flag) { throw UsageError("missing-flag", flag + " is required"); }

void validate(RunConfig& c, bool backend_given) {
  auto& d = c.domain_params;
  if (c.domain == "disk") {
    c.domain = "ball";
    d.dimension = 2;
  }
  if (c.domain == "mesh" && d.mesh_path.empty()) missing("--mesh");
  if (d.dimension < 1) conflict("--N must be >= 1");

  if (c.command == Command::Mesh) {
    if (!is_planar(c)) conflict("--domain ball needs --N 2 for meshing");
    if (c.domain == "mesh") conflict("mesh needs a generated domain, not --domain mesh");
    return;
  }

  if (c.command == Command::Shoot) {
    c.backend = Backend::Shoot;
  } else if (!backend_given) {
    c.backend = c.domain == "ball" ? Backend::Radial : Backend::Fem;
  }
  if (c.command == Command::Eigen) {
    if (c.p && *c.p != 1.0) conflict("eigen solves the p = 1 problem; drop --p");
    c.p = 1.0;
  } else if (!c.p) {
    missing("--p");
  } else if (*c.p == 1.0) {
    throw UsageError("p-equals-one", "p = 1 is the linear eigenvalue problem; use the eigen command");
  }
  if (!(*c.p >= 0.0) || !std::isfinite(*c.p)) conflict("--p must be >= 0");

  if (c.backend == Backend::Radial && c.domain != "ball") conflict("--backend radial needs --domain ball");
  if (c.backend == Backend::Fem && !is_planar(c)) conflict("--backend fem needs a planar domain (N = 2)");
  if (c.backend == Backend::Shoot) {
    if (c.domain != "ball") conflict("--backend shoot needs --domain ball");
    const int n = d.dimension;
    if (n < 3) conflict("--backend shoot needs --N >= 3");
    const double critical = (n + 2.0) / (n - 2.0);
    if (!(*c.p > critical)) {
      conflict("--backend shoot needs p > (N+2)/(N-2) = " + std::to_string(critical));
    }
    if (d.radius != 1.0) conflict("--backend shoot solves on the unit ball; drop --R");
  }

  if (c.beta && !c.betas_text.empty()) conflict("--beta and --betas are exclusive");
  const bool many = c.command == Command::Sweep || c.command == Command::CheckInvariants || !c.betas_text.empty();
  if (c.command == Command::Sweep) {
    if (c.beta) conflict("sweep takes --betas, not --beta");
  }
  if (!c.betas_text.empty()) {
    try {
      c.betas = parse_beta_list(c.betas_text);
    } catch (const Error& e) {
      throw UsageError("bad-value", std::string("--betas: ") + e.what());
    }
  } else if (c.beta) {
    c.betas = {*c.beta};
  } else if (many) {
    c.betas = default_betas();
  } else {
    missing("--beta");
  }
  for (std::size_t i = 0; i < c.betas.size(); ++i) {
    const double b = c.betas[i];
    if (!(b > 0.0) || !std::isfinite(b)) conflict("beta values must be positive");
    if (i > 0 && !(b < c.betas[i - 1])) conflict("--betas must be strictly decreasing");
  }
  if (c.backend == Backend::Shoot) {
    const double a = 2.0 / (*c.p - 1.0);
    if (!(c.betas.front() < a)) {
      conflict("beta = " + std::to_string(c.betas.front()) + " is outside the existence window beta < 2/(p-1) = " +
               std::to_string(a));
    }
  }
  if (c.jobs < 1) conflict("--jobs must be >= 1");
  if (c.continuation && c.jobs > 1) conflict("--continuation runs sequentially; drop --jobs");
  if (c.continuation && c.backend == Backend::Shoot) conflict("--continuation does not apply to shooting");
  if (c.fit && c.betas.size() < 4) conflict("--fit needs at least 4 beta values");
  if (c.intervals < 16) conflict("--M must be >= 16");
  if (!(c.h > 0.0)) conflict("--h must be positive");
  try {
    c.newton.validate();
  } catch (const Error& e) {
    conflict(e.what());
  }
}

std::filesystem::path resolve(const RunConfig& c, const std::filesystem::path& p) {
  return p.is_absolute() ? p : c.out_dir / p;
}

std::filesystem::path default_out(const RunConfig& c) {
  if (!c.out.empty()) return resolve(c, c.out);
  const std::string ext = c.command == Command::Mesh ? ".msh" : c.format == Format::Csv ? ".csv" : ".json";
  return resolve(c, std::string(to_string(c.command)) + ext);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json envelope(const RunConfig& c) {
  json j;
  j["config"] = config_json(c);
  if (!c.no_meta) j["meta"] = {{"timestamp", timestamp()}};
  return j;
}

std::string comment_header(const RunConfig& c) {
  std::string s = "# config " + config_json(c).dump() + "\n";
  if (!c.no_meta) s += "# meta {\"timestamp\":\"" + timestamp() + "\"}\n";
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

json record_json(const SweepRecord& r) {
  json j;
  j["beta"] = r.beta;
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["sup_norm"] = r.sup_norm;
  j["c_beta"] = r.c_beta;
  j["d_beta"] = r.d_beta;
  j["sup_vhat"] = r.sup_vhat;
  j["min_v"] = r.min_v;
  j["boundary_mean_v"] = r.boundary_mean_v;
  if (r.lambda) {
    j["lambda"] = *r.lambda;
    j["lambda_over_beta"] = *r.lambda / r.beta;
  }
  j["iters"] = r.iterations;
  j["residual"] = r.residual;
  j["volume"] = r.measures.volume;
  j["boundary_measure"] = r.measures.boundary;
  j["flux_defect"] = r.flux_defect;
  return j;
}

std::shared_ptr<const Mesh> build_mesh(const RunConfig& c) {
  if (c.domain == "mesh") return std::make_shared<const Mesh>(load_mesh(c.domain_params.mesh_path));
  DomainKind kind = c.domain == "rectangle" ? DomainKind::Rectangle
                    : c.domain == "annulus" ? DomainKind::Annulus
                                            : DomainKind::Ball;
  return std::make_shared<const Mesh>(triangulate(make_domain(kind, c.domain_params), c.h));
}

Problem make_problem(const RunConfig& c) {
  Problem pr;
  pr.backend = c.backend;
  pr.p = *c.p;
  pr.dimension = c.domain_params.dimension;
  pr.radius = c.domain_params.radius;
  pr.intervals = c.intervals;
  pr.newton = c.newton;
  if (c.backend == Backend::Fem) pr.mesh = build_mesh(c);
  if (c.backend == Backend::Shoot) {
    pr.profile = std::make_shared<const ShootingProfile>(integrate_profile(*c.p, pr.dimension, c.profile));
    pr.shoot.intervals = c.intervals;
  }
  return pr;
}

std::string summary_line(const SweepRecord& r) {
  char buf[256];
  if (r.lambda) {
    std::snprintf(buf, sizeof buf, "lambda=%.12g lambda/beta=%.12g min_u=%.12g", *r.lambda, *r.lambda / r.beta,
                  r.min_u);
  } else {
    std::snprintf(buf, sizeof buf, "sup_norm=%.12g d_beta=%.12g residual=%.3g", r.sup_norm, r.d_beta, r.residual);
  }
  return buf;
}

// Single solve with the field kept for the optional field CSV.
int run_single(const RunConfig& c, std::ostream& out) {
  const Problem pr = make_problem(c);
  const double beta = c.betas.front();
  SweepRecord rec;
  std::string field_csv;
  json extra;
  {
    std::ostringstream fs;
    if (pr.backend == Backend::Radial) {
      if (*c.p == 1.0) {
        const auto res = solve_radial_eigen(pr.dimension, pr.radius, beta, pr.intervals);
        rec = compute_record(res);
        write_radial_csv(fs, res.eigenfunction);
      } else {
        const auto sol = solve_radial(*c.p, beta, pr.dimension, pr.radius, pr.intervals, pr.newton);
        rec = compute_record(sol);
        write_radial_csv(fs, sol);
      }
    } else if (pr.backend == Backend::Fem) {
      if (*c.p == 1.0) {
        const auto res = solve_eigen(pr.mesh, beta);
        rec = compute_record(res);
        write_field_csv(fs, res.field);
      } else {
        const auto f = solve_semilinear(pr.mesh, *c.p, beta, pr.newton);
        rec = compute_record(f);
        write_field_csv(fs, f);
        extra["rayleigh_quotient"] = rayleigh_quotient_ibeta(f, *c.p);
      }
    } else {
      const auto res = find_delta_hat(*pr.profile, beta, pr.shoot);
      rec = compute_record(res);
      write_radial_csv(fs, res.solution);
      extra["delta_hat"] = res.delta_hat;
      extra["robin_mismatch"] = res.mismatch;
      extra["tail_value_deviation"] = pr.profile->tail_value_deviation();
      extra["tail_slope_deviation"] = pr.profile->tail_slope_deviation();
    }
    field_csv = fs.str();
  }

  json j = envelope(c);
  j["result"] = record_json(rec);
  for (auto& [k, v] : extra.items()) j["result"][k] = v;
  const auto path = default_out(c);
  if (c.format == Format::Json) {
    write_file(path, j.dump(2) + "\n");
  } else {
    write_file(path, comment_header(c) + field_csv);
  }
  if (!c.field_out.empty()) write_file(resolve(c, c.field_out), comment_header(c) + field_csv);

  if (pr.backend == Backend::Shoot) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "delta_hat=%.12g ", extra["delta_hat"].get<double>());
    out << buf;
  }
  out << summary_line(rec) << "\n";
  return 0;
}

int run_many(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Problem pr = make_problem(c);
  const auto records = run_sweep(pr, c.betas, {c.continuation, c.jobs});

  int failed = 0;
  for (const auto& r : records) failed += r.ok ? 0 : 1;

  json j = envelope(c);
  if (c.command == Command::CheckInvariants) {
    json rows = json::array();
    int violations = 0;
    for (const auto& r : records) {
      json row = record_json(r);
      if (r.ok) {
        const InvariantReport rep = check_invariants(r);
        row["invariants"] = rep.describe();
        violations += rep.all() ? 0 : 1;
      }
      rows.push_back(row);
    }
    const bool decreasing = vhat_decreasing(records);
    const bool bounded = vhat_bounded(records);
    j["records"] = rows;
    j["sup_vhat_decreasing"] = decreasing;
    j["sup_vhat_bounded"] = bounded;
    j["violations"] = violations;
    write_file(default_out(c), j.dump(2) + "\n");
    const bool ok = violations == 0 && failed == 0 && bounded && (records.size() < 2 || decreasing);
    out << (ok ? "invariants ok" : "invariants violated") << " records=" << records.size() << " failed=" << failed
        << " violations=" << violations << " sup_vhat_decreasing=" << (decreasing ? "yes" : "no") << "\n";
    return ok ? 0 : 1;
  }

  const auto path = default_out(c);
  if (c.format == Format::Csv) {
    std::ostringstream s;
    write_sweep_csv(s, records);
    write_file(path, comment_header(c) + s.str());
  } else {
    json rows = json::array();
    for (const auto& r : records) rows.push_back(record_json(r));
    j["records"] = rows;
    write_file(path, j.dump(2) + "\n");
  }

  std::string fit_text;
  if (c.fit) {
    try {
      const PowerLawFit fit = fit_smallest_decade(records, *c.fit);
      json fj = envelope(c);
      const json parsed = json::parse(fit_json(fit));
      for (const auto& [k, v] : parsed.items()) fj[k] = v;
      auto fit_path = path;
      fit_path.replace_filename(path.stem().string() + "_fit.json");
      write_file(fit_path, fj.dump(2) + "\n");
      char buf[160];
      std::snprintf(buf, sizeof buf, " slope=%.6f constant=%.6g r2=%.8f", fit.slope, fit.constant, fit.r2);
      fit_text = buf;
    } catch (const Error& e) {
      err << "fit: " << e.what() << "\n";
      return 1;
    }
  }
  out << "records=" << records.size() << " failed=" << failed << fit_text << "\n";
  return failed == 0 ? 0 : 1;
}

int run_mesh(const RunConfig& c, std::ostream& out) {
  const auto mesh = build_mesh(c);
  const auto m = mesh_measures(*mesh);
  write_file(default_out(c), comment_header(c) + format_mesh(*mesh));
  char buf[160];
  std::snprintf(buf, sizeof buf, "nodes=%zu triangles=%zu volume=%.12g boundary=%.12g\n", mesh->num_nodes(),
                mesh->num_triangles(), m.volume, m.boundary);
  out << buf;
  return 0;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& argv) {
  RunConfig c;
  if (const char* dir = std::getenv("ROBIN_LAB_OUT_DIR"); dir && *dir) c.out_dir = dir;

  CLI::App app{"Robin boundary value problems: radial, finite element and shooting solvers", "robin_lab"};
  app.require_subcommand(1, 1);
  app.set_help_flag("--help", "print this help and exit");
  app.set_help_all_flag("--help-all", "help for every command");

  std::string backend, format;
  double p_value = 0.0, beta_value = 0.0;
  std::string fit_name;
  struct Sub {
    Command command;
    CLI::App* app;
    CLI::Option* p = nullptr;
    CLI::Option* beta = nullptr;
    CLI::Option* fit = nullptr;
    CLI::Option* backend = nullptr;
  };
  std::vector<Sub> subs;
  auto add = [&](Command cmd, const char* help) {
    Sub s{cmd, app.add_subcommand(to_string(cmd), help)};
    s.app->set_help_flag("--help", "print this help and exit");
    add_domain_flags(*s.app, c);
    if (cmd == Command::Mesh) s.app->add_option("--h", c.h, "target mesh size")->capture_default_str();
    if (cmd != Command::Mesh) {
      add_discretization_flags(*s.app, c, backend);
      s.backend = s.app->get_option("--backend");
      if (cmd != Command::Eigen) s.p = s.app->add_option("--p", p_value, "exponent p >= 0, p != 1");
      s.beta = s.app->add_option("--beta", beta_value, "Robin parameter");
      s.app->add_option("--betas", c.betas_text, "beta list a:b:Klog or comma-separated, strictly decreasing");
      s.app->add_option("--jobs", c.jobs, "parallel sweep points")->capture_default_str();
      s.app->add_flag("--continuation", c.continuation, "warm-start each beta from the previous solution");
      s.app->add_option("--field-out", c.field_out, "also write the solution field as CSV");
      if (cmd == Command::Sweep) {
        s.fit = s.app->add_option("--fit", fit_name, "fit a power law in beta to this column")
                    ->check(CLI::IsMember({"sup_norm", "c_beta", "d_beta", "sup_vhat", "lambda"}));
      }
      add_profile_flags(*s.app, c);
    }
    add_output_flags(*s.app, c, format);
    subs.push_back(s);
  };
  add(Command::Solve, "solve one (p, beta) problem");
  add(Command::Eigen, "first Robin eigenpair");
  add(Command::Shoot, "shooting construction on the unit ball");
  add(Command::Sweep, "beta sweep with optional power-law fit");
  add(Command::CheckInvariants, "solve and check the per-solution invariants");
  add(Command::Mesh, "generate and save a triangle mesh");

  std::vector<std::string> args(argv.rbegin(), argv.rend() - (argv.empty() ? 0 : 1));
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ExtrasError& e) {
    throw UsageError("unknown-flag", e.what());
  } catch (const CLI::ParseError& e) {
    throw UsageError("usage", e.what());
  }

  for (const Sub& s : subs) {
    if (!s.app->parsed()) continue;
    c.command = s.command;
    if (s.p && s.p->count() > 0) c.p = p_value;
    if (s.beta && s.beta->count() > 0) c.beta = beta_value;
    if (s.fit && s.fit->count() > 0) c.fit = parse_record_field(fit_name);
    const bool backend_given = s.backend && s.backend->count() > 0;
    if (backend_given) c.backend = parse_backend(backend);
    if (!format.empty()) {
      c.format = format == "csv" ? Format::Csv : Format::Json;
    } else {
      c.format = s.command == Command::Sweep ? Format::Csv : Format::Json;
    }
    validate(c, backend_given);
  }
  return c;
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  json dom;
  dom["kind"] = c.domain;
  const auto& d = c.domain_params;
  if (c.domain == "ball") {
    dom["N"] = d.dimension;
    dom["R"] = d.radius;
  } else if (c.domain == "rectangle") {
    dom["width"] = d.width;
    dom["height"] = d.height;
  } else if (c.domain == "annulus") {
    dom["r_inner"] = d.r_inner;
    dom["r_outer"] = d.r_outer;
  } else {
    dom["mesh"] = d.mesh_path.string();
  }
  j["domain"] = dom;
  if (c.command == Command::Mesh) {
    j["h"] = c.h;
    return j;
  }
  j["p"] = c.p.value_or(std::numeric_limits<double>::quiet_NaN());
  j["betas"] = c.betas;
  j["backend"] = to_string(c.backend);
  if (c.backend == Backend::Radial || c.backend == Backend::Shoot) j["M"] = c.intervals;
  if (c.backend == Backend::Fem && c.domain != "mesh") j["h"] = c.h;
  j["newton"] = {{"tolerance", c.newton.tolerance},
                 {"step_tolerance", c.newton.step_tolerance},
                 {"max_iterations", c.newton.max_iterations}};
  if (c.backend == Backend::Shoot) {
    j["profile"] = {{"rtol", c.profile.rtol}, {"atol", c.profile.atol}, {"r_max", c.profile.r_max}};
  }
  if (c.fit) j["fit"] = to_string(*c.fit);
  j["continuation"] = c.continuation;
  j["format"] = c.format == Format::Csv ? "csv" : "json";
  return j;
}

int dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    switch (c.command) {
      case Command::Mesh: return run_mesh(c, out);
      case Command::Sweep:
      case Command::CheckInvariants: return run_many(c, out, err);
      case Command::Solve:
      case Command::Eigen:
      case Command::Shoot:
        return c.betas.size() > 1 ? run_many(c, out, err) : run_single(c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  return dispatch(config, out, err);
}

}  // namespace robin::cli
