#include <cmath>
#include <vector>

#include "doctest.h"
#include "robin/ode.hpp"

using namespace robin;

TEST_CASE("exponential decay") {
  std::vector<double> ts;
  for (int i = 1; i <= 50; ++i) ts.push_back(0.2 * i);
  std::vector<double> got;
  const std::size_t n = ode::integrate<1>(
      [](double, const ode::State<1>& y) { return ode::State<1>{-y[0]}; }, 0.0, {1.0}, ts, ode::Options{},
      [&](std::size_t, double, const ode::State<1>& y) {
        got.push_back(y[0]);
        return true;
      });
  CHECK(n == ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(got[i] - std::exp(-ts[i])) <= 1e-12);
}

TEST_CASE("harmonic oscillator lands on every output") {
  std::vector<double> ts{0.1, 0.10000001, 1.0, 3.0, 10.0, 31.4};
  std::vector<double> seen;
  ode::Stats stats;
  ode::integrate<2>(
      [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; }, 0.0, {0.0, 1.0}, ts,
      ode::Options{},
      [&](std::size_t i, double t, const ode::State<2>& y) {
        CHECK(t == ts[i]);
        CHECK(std::abs(y[0] - std::sin(t)) <= 1e-10);
        CHECK(std::abs(y[1] - std::cos(t)) <= 1e-10);
        seen.push_back(t);
        return true;
      },
      &stats);
  CHECK(seen.size() == ts.size());
  CHECK(stats.accepted > 0);
}

TEST_CASE("observer can stop early") {
  std::vector<double> ts{1, 2, 3, 4};
  const std::size_t n = ode::integrate<1>([](double, const ode::State<1>& y) { return y; }, 0.0, {1.0}, ts,
                                          ode::Options{},
                                          [](std::size_t i, double, const ode::State<1>&) { return i < 1; });
  CHECK(n == 2);
}
