#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "robin/error.hpp"
#include "robin/geometry.hpp"

using namespace robin;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

// Every boundary node must start exactly one and end exactly one edge.
void check_loop_closure(const Mesh& mesh) {
  std::vector<int> out(mesh.num_nodes()), in(mesh.num_nodes());
  for (const auto& e : mesh.boundary_edges()) {
    ++out[e[0]];
    ++in[e[1]];
  }
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.boundary_mask()[i]) {
      CHECK(out[i] == 1);
      CHECK(in[i] == 1);
    } else {
      CHECK(out[i] + in[i] == 0);
    }
  }
}

}  // namespace

TEST_CASE("ball measures") {
  const Domain disk = make_ball(2, 1.0);
  CHECK(*disk.volume == doctest::Approx(pi).epsilon(1e-15));
  CHECK(*disk.boundary_measure == doctest::Approx(2 * pi).epsilon(1e-15));

  const Domain ball = make_ball(3, 1.0);
  CHECK(*ball.volume == doctest::Approx(4 * pi / 3).epsilon(1e-15));
  CHECK(*ball.boundary_measure == doctest::Approx(4 * pi).epsilon(1e-15));

  for (int n = 2; n <= 7; ++n) {
    for (double r : {0.3, 1.0, 2.5}) {
      const Domain d = make_ball(n, r);
      CHECK(*d.volume / *d.boundary_measure == doctest::Approx(r / n).epsilon(1e-14));
    }
  }
  CHECK(unit_ball_volume(4) == doctest::Approx(pi * pi / 2).epsilon(1e-15));
}

TEST_CASE("invalid domain parameters") {
  CHECK(kind_of([] { make_ball(2, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { make_ball(2, -1.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { make_rectangle(1.0, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { make_annulus(1.0, 1.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { make_annulus(1.0, 0.5); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("rectangle mesh measures are exact") {
  for (double h : {0.1, 0.05, 0.0375}) {
    const Mesh m = triangulate(make_rectangle(1.0, 1.0), h);
    const auto mm = mesh_measures(m);
    CHECK(std::abs(mm.volume - 1.0) <= 1e-12);
    CHECK(std::abs(mm.boundary - 4.0) <= 1e-12);
    CHECK(m.boundary_loop_count() == 1);
    check_loop_closure(m);
  }
  const auto mm = mesh_measures(triangulate(make_rectangle(2.0, 0.5), 0.05));
  CHECK(std::abs(mm.volume - 1.0) <= 1e-12);
  CHECK(std::abs(mm.boundary - 5.0) <= 1e-12);
}

TEST_CASE("disk mesh measures") {
  const auto coarse = mesh_measures(triangulate(make_ball(2, 1.0), 0.05));
  CHECK(std::abs(coarse.volume - pi) <= 0.005 * pi);
  const Mesh fine = triangulate(make_ball(2, 1.0), 0.02);
  const auto mm = mesh_measures(fine);
  CHECK(std::abs(mm.volume - pi) <= 1e-3 * pi);
  CHECK(std::abs(mm.boundary - 2 * pi) <= 1e-3 * 2 * pi);
  CHECK(mm.volume < pi);
  CHECK(fine.boundary_loop_count() == 1);
  check_loop_closure(fine);
}

TEST_CASE("disk measure errors are second order") {
  for (double r : {1.0, 2.0}) {
    double prev_area = 0.0, prev_perimeter = 0.0;
    for (double h : {0.08, 0.04, 0.02}) {
      const auto mm = mesh_measures(triangulate(make_ball(2, r), h));
      const double ea = std::abs(mm.volume - pi * r * r);
      const double ep = std::abs(mm.boundary - 2 * pi * r);
      if (prev_area > 0.0) {
        CHECK(prev_area / ea >= 3.5);
        CHECK(prev_area / ea <= 4.5);
        CHECK(prev_perimeter / ep >= 3.5);
        CHECK(prev_perimeter / ep <= 4.5);
      }
      prev_area = ea;
      prev_perimeter = ep;
    }
  }
}

TEST_CASE("annulus has two boundary loops") {
  const Mesh m = triangulate(make_annulus(0.5, 1.0), 0.05);
  CHECK(m.boundary_loop_count() == 2);
  check_loop_closure(m);
  const auto mm = mesh_measures(m);
  CHECK(mm.volume == doctest::Approx(0.75 * pi).epsilon(0.01));
  CHECK(mm.boundary == doctest::Approx(3 * pi).epsilon(0.01));

  // Outward normals: the inner loop runs clockwise around the origin.
  double inner_turn = 0.0;
  for (const auto& e : m.boundary_edges()) {
    const Point a = m.nodes()[e[0]], b = m.nodes()[e[1]];
    if (std::hypot(a.x, a.y) < 0.75) inner_turn += a.x * b.y - a.y * b.x;
  }
  CHECK(inner_turn < 0.0);
}

TEST_CASE("triangle orientation and areas") {
  const auto m = triangulate(make_ball(2, 1.0), 0.1);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    const Point a = m.nodes()[tri[0]], b = m.nodes()[tri[1]], c = m.nodes()[tri[2]];
    const double signed_area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    CHECK(signed_area > 0.0);
    CHECK(m.triangle_areas()[t] == doctest::Approx(signed_area).epsilon(1e-14));
  }
}

TEST_CASE("infeasible resolution") {
  CHECK(kind_of([] { triangulate(make_ball(2, 1.0), 2.0); }) == ErrorKind::InfeasibleResolution);
  CHECK(kind_of([] { triangulate(make_rectangle(1.0, 1.0), 5.0); }) == ErrorKind::InfeasibleResolution);
  CHECK(kind_of([] { triangulate(make_ball(3, 1.0), 0.1); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("single triangle measures") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}, {2, 0}});
  const auto mm = mesh_measures(m);
  CHECK(mm.volume == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mm.boundary == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("clockwise input is normalized") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}, {{0, 2}, {2, 1}, {1, 0}});
  CHECK(m.triangle_areas()[0] == doctest::Approx(0.5));
  const auto& e = m.boundary_edges();
  // Edges follow the counterclockwise triangle.
  for (const auto& edge : e) CHECK(((edge[1] - edge[0] + 3) % 3) == 1);
}

TEST_CASE("mesh invariant violations") {
  using P = std::vector<Point>;
  // Zero-area triangle.
  CHECK(kind_of([] { Mesh(P{{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {{0, 1}, {1, 2}, {2, 0}}); }) ==
        ErrorKind::InvariantViolation);
  // Boundary edge not on any triangle.
  CHECK(kind_of([] {
          Mesh(P{{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}, {2, 0}, {1, 3}});
        }) == ErrorKind::InvariantViolation);
  // Interior edge listed as boundary.
  CHECK(kind_of([] {
          Mesh(P{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
               {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}});
        }) == ErrorKind::InvariantViolation);
  // Missing boundary edge.
  CHECK(kind_of([] { Mesh(P{{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}}); }) ==
        ErrorKind::InvariantViolation);
}

TEST_CASE("mesh parsing") {
  const Mesh m = parse_mesh("# one triangle\n3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n2 0\n");
  CHECK(m.num_nodes() == 3);
  CHECK(m.num_triangles() == 1);

  try {
    parse_mesh("3 1 3\n0 0\n1 0\n0 1\n0 1 7\n0 1\n1 2\n2 0\n");
    FAIL("out-of-range index accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  CHECK(kind_of([] { parse_mesh("3 1 3\n0 0\n1 zero\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_mesh("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_mesh("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n2 0\n9 9\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { load_mesh("/nonexistent/file.msh"); }) == ErrorKind::Io);
}

TEST_CASE("save and load round trip") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> side(0.3, 3.0), size(0.04, 0.3);
  const auto dir = std::filesystem::temp_directory_path();
  for (int trial = 0; trial < 20; ++trial) {
    Domain d;
    switch (trial % 3) {
      case 0: d = make_ball(2, side(rng)); break;
      case 1: d = make_rectangle(side(rng), side(rng)); break;
      default: {
        const double r_in = side(rng);
        d = make_annulus(r_in, r_in + side(rng));
      }
    }
    const Mesh m = triangulate(d, size(rng) * d.diameter() / 4);
    const std::string text = format_mesh(m);
    const Mesh back = parse_mesh(text);
    CHECK(format_mesh(back) == text);
    CHECK(back.num_nodes() == m.num_nodes());
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
      CHECK(back.nodes()[i].x == m.nodes()[i].x);
      CHECK(back.nodes()[i].y == m.nodes()[i].y);
    }
    const auto path = dir / ("robin_round_trip_" + std::to_string(trial) + ".msh");
    save_mesh(m, path);
    CHECK(format_mesh(load_mesh(path)) == text);
    std::filesystem::remove(path);
  }
}

TEST_CASE("generated meshes are deterministic") {
  CHECK(format_mesh(triangulate(make_ball(2, 1.0), 0.07)) == format_mesh(triangulate(make_ball(2, 1.0), 0.07)));
}
