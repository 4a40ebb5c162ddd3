#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "robin/cli.hpp"

using namespace robin;
using namespace robin::cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> argv_of(std::initializer_list<std::string> args) {
  std::vector<std::string> v{"robin_lab"};
  v.insert(v.end(), args);
  return v;
}

std::string usage_kind(const std::vector<std::string>& argv) {
  try {
    parse_args(argv);
  } catch (const UsageError& e) {
    return e.kind();
  }
  return "";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("robin_lab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_quiet(const std::vector<std::string>& argv, std::string* summary = nullptr) {
  std::ostringstream out, err;
  const int code = run(argv, out, err);
  if (summary) *summary = out.str();
  return code;
}

}  // namespace

TEST_CASE("radial solve config") {
  const RunConfig c =
      parse_args(argv_of({"solve", "--domain", "ball", "--N", "2", "--R", "1", "--p", "0.5", "--beta", "1e-3",
                          "--backend", "radial", "--M", "2048"}));
  CHECK(c.command == Command::Solve);
  CHECK(c.domain == "ball");
  CHECK(c.domain_params.dimension == 2);
  CHECK(c.domain_params.radius == 1.0);
  CHECK(*c.p == 0.5);
  CHECK(c.betas == std::vector<double>{1e-3});
  CHECK(c.backend == Backend::Radial);
  CHECK(c.intervals == 2048);
  CHECK(c.format == Format::Json);
}

TEST_CASE("usage errors") {
  CHECK(usage_kind(argv_of({"shoot", "--N", "3", "--p", "6", "--beta", "0.5"})) == "conflicting-flags");
  CHECK(usage_kind(argv_of({"shoot", "--N", "3", "--p", "6", "--beta", "0.4"})) == "conflicting-flags");
  CHECK(usage_kind(argv_of({"shoot", "--N", "3", "--p", "5", "--beta", "0.1"})) == "conflicting-flags");
  CHECK(usage_kind(argv_of({"shoot", "--N", "3", "--p", "6", "--beta", "0.2"})).empty());
  CHECK(usage_kind(argv_of({"solve", "--p", "1", "--beta", "0.1"})) == "p-equals-one");
  CHECK(usage_kind(argv_of({"solve", "--p", "0.5", "--beta", "0.1", "--bogus"})) == "unknown-flag");
  CHECK(usage_kind(argv_of({"solve", "--domain", "rectangle", "--backend", "radial", "--p", "0", "--beta", "1"})) ==
        "conflicting-flags");
  CHECK(usage_kind(argv_of({"sweep", "--p", "3", "--betas", "1e-1:1e-3:8log", "--jobs", "2", "--continuation"})) ==
        "conflicting-flags");
  CHECK(usage_kind(argv_of({"sweep", "--p", "3", "--betas", "0.1,0.01", "--fit", "sup_norm"})) != "");
  CHECK(usage_kind(argv_of({"sweep", "--p", "3", "--betas", "1e-1:1e-3:xlog"})) != "");

  std::ostringstream out, err;
  CHECK(run(argv_of({"solve", "--p", "1", "--beta", "0.1"}), out, err) == 2);
  CHECK(err.str().find("eigen") != std::string::npos);
  CHECK(run(argv_of({"frobnicate"}), out, err) == 2);
  CHECK(run(argv_of({"solve", "--help"}), out, err) == 0);
  CHECK(out.str().find("--beta") != std::string::npos);
}

TEST_CASE("solve writes a json artifact with the resolved config") {
  const fs::path dir = scratch("solve");
  std::string summary;
  REQUIRE(run_quiet(argv_of({"solve", "--p", "0", "--beta", "0.1", "--M", "256", "--no-meta", "--out",
                             (dir / "a.json").string()}),
                    &summary) == 0);
  CHECK(summary.find("sup_norm=") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(j["config"]["command"] == "solve");
  CHECK(j["config"]["M"] == 256);
  CHECK(j["config"]["domain"]["kind"] == "ball");
  CHECK_FALSE(j.contains("meta"));
  CHECK(j["result"]["sup_norm"].get<double>() == doctest::Approx(5.25).epsilon(1e-6));

  REQUIRE(run_quiet(argv_of({"solve", "--p", "0", "--beta", "0.1", "--M", "256", "--no-meta", "--out",
                             (dir / "b.json").string()})) == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  REQUIRE(run_quiet(argv_of({"solve", "--p", "0", "--beta", "0.1", "--M", "256", "--out",
                             (dir / "c.json").string()})) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "c.json")).contains("meta"));
}

TEST_CASE("sweeps are deterministic across job counts") {
  const fs::path dir = scratch("sweep");
  std::string summary;
  REQUIRE(run_quiet(argv_of({"sweep", "--p", "3", "--betas", "1e-1:1e-3:8log", "--M", "512", "--fit", "sup_norm",
                             "--no-meta", "--out", (dir / "s1.csv").string()}),
                    &summary) == 0);
  CHECK(summary.find("records=8 failed=0") != std::string::npos);
  REQUIRE(run_quiet(argv_of({"sweep", "--p", "3", "--betas", "1e-1:1e-3:8log", "--M", "512", "--fit", "sup_norm",
                             "--no-meta", "--jobs", "4", "--out", (dir / "s4.csv").string()})) == 0);
  const std::string csv = slurp(dir / "s1.csv");
  CHECK(csv == slurp(dir / "s4.csv"));
  CHECK(csv.rfind("# config {", 0) == 0);
  CHECK(csv.find("# meta") == std::string::npos);
  const auto fit = nlohmann::json::parse(slurp(dir / "s1_fit.json"));
  CHECK(std::abs(fit["slope"].get<double>() - 0.5) <= 0.02);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch("env");
  ::setenv("ROBIN_LAB_OUT_DIR", dir.string().c_str(), 1);
  const RunConfig c = parse_args(argv_of({"eigen", "--beta", "0.1", "--M", "128", "--no-meta"}));
  CHECK(c.out_dir == dir);
  std::ostringstream out, err;
  const int code = dispatch(c, out, err);
  ::unsetenv("ROBIN_LAB_OUT_DIR");
  REQUIRE(code == 0);
  CHECK(out.str().find("lambda=") != std::string::npos);
  CHECK(fs::exists(dir / "eigen.json"));
}

TEST_CASE("mesh command round trip") {
  const fs::path dir = scratch("mesh");
  REQUIRE(run_quiet(argv_of({"mesh", "--domain", "rectangle", "--width", "1", "--height", "1", "--h", "0.1",
                             "--no-meta", "--out", (dir / "square.msh").string()})) == 0);
  const Mesh m = load_mesh(dir / "square.msh");
  const auto mm = mesh_measures(m);
  CHECK(mm.volume == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mm.boundary == doctest::Approx(4.0).epsilon(1e-12));

  std::string summary;
  REQUIRE(run_quiet(argv_of({"eigen", "--domain", "mesh", "--mesh", (dir / "square.msh").string(), "--beta", "1e-3",
                             "--no-meta", "--out", (dir / "eig.json").string()}),
                    &summary) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "eig.json"));
  CHECK(j["result"]["lambda"].get<double>() / 1e-3 == doctest::Approx(4.0).epsilon(0.02));
  CHECK(summary.find("lambda/beta=") != std::string::npos);
}

TEST_CASE("solver failure exits with one") {
  const fs::path dir = scratch("fail");
  CHECK(run_quiet(argv_of({"solve", "--p", "0.5", "--beta", "1e-3", "--max-iter", "1", "--out",
                           (dir / "x.json").string()})) == 1);
}
