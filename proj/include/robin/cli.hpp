#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robin/asymptotics.hpp"
#include "robin/geometry.hpp"
#include "robin/radial.hpp"
#include "robin/shooting.hpp"

namespace robin::cli {

enum class Command { Solve, Eigen, Shoot, Sweep, CheckInvariants, Mesh };

const char* to_string(Command command) noexcept;

enum class Format { Json, Csv };

struct RunConfig {
  Command command = Command::Solve;
  /// ball, disk, rectangle, annulus or mesh.
  std::string domain = "ball";
  DomainParams domain_params;
  std::optional<double> p;
  std::optional<double> beta;
  std::vector<double> betas;
  std::string betas_text;
  Backend backend = Backend::Radial;
  int intervals = 2048;
  double h = 0.02;
  NewtonConfig newton;
  ProfileOptions profile;
  std::optional<RecordField> fit;
  Format format = Format::Json;
  /// Primary artifact; relative paths resolve against the output directory.
  std::filesystem::path out;
  /// Optional per-node field CSV for solve, eigen and shoot.
  std::filesystem::path field_out;
  std::filesystem::path out_dir = ".";
  bool no_meta = false;
  bool continuation = false;
  int jobs = 1;
};

/// Misuse of the command line; exit status 2.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// `--help` was requested; carries the help text.
struct HelpRequested {
  std::string text;
};

/// Parses and validates argv (argv[0] is the program name). Throws UsageError
/// or HelpRequested. ROBIN_LAB_OUT_DIR sets the output directory.
RunConfig parse_args(const std::vector<std::string>& argv);

/// The fully resolved configuration, as embedded in every artifact.
nlohmann::ordered_json config_json(const RunConfig& config);

/// Runs a validated config: writes artifacts, prints one summary line to out.
/// Returns 0 on success and 1 on solver failure.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with the 0/1/2 exit contract.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace robin::cli
