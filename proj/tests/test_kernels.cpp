#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "kpert/kernels.hpp"
#include "kpert/special.hpp"

using namespace kpert;

namespace {
const double kPi = 3.14159265358979323846;
const State kO{0.0, 0.0};
}

TEST_CASE("beta kernel closed-form values") {
  auto k = make_beta_kernel(0.5);
  CHECK(k(0.0, kO, 1.0, kO) == doctest::Approx(0.5641896).epsilon(1e-6));  // 1/Gamma(1/2)
  CHECK(k(0.0, kO, 1.0, kO) == doctest::Approx(1.0 / gamma_fn(0.5)).epsilon(1e-14));
  auto k25 = make_beta_kernel(0.25);
  CHECK(k25(2.0, kO, 3.0, kO) == doctest::Approx(1.0 / gamma_fn(0.25)).epsilon(1e-14));
}

TEST_CASE("beta kernel rejects beta outside (0,1)") {
  CHECK_THROWS(make_beta_kernel(0.0));
  CHECK_THROWS(make_beta_kernel(1.0));
  CHECK_THROWS(make_beta_kernel(-0.5));
}

TEST_CASE("forward guard: t <= s throws and bumps the counter") {
  auto k = make_beta_kernel(0.5);
  long before = forward_guard_violations().load();
  CHECK_THROWS_AS(k(1.0, kO, 1.0, kO), PreconditionError);
  CHECK_THROWS_AS(k(1.0, kO, 0.5, kO), PreconditionError);
  CHECK(forward_guard_violations().load() == before + 2);
}

TEST_CASE("gaussian kernel values and symmetry") {
  auto k = make_gauss_kernel(1);
  CHECK(k(0.0, kO, 1.0, kO) == doctest::Approx(1.0 / std::sqrt(4.0 * kPi)).epsilon(1e-12));
  CHECK(k(0.0, kO, 1.0, kO) == doctest::Approx(0.2820948).epsilon(1e-6));
  // monotone decay in |x-y|
  double prev = k(0.0, kO, 1.0, State{0.0});
  for (double y = 0.5; y < 6.0; y += 0.5) {
    double v = k(0.0, kO, 1.0, State{y});
    CHECK(v < prev);
    prev = v;
  }
  CHECK(k(0.0, State{0.3}, 1.0, State{-1.1}) ==
        doctest::Approx(k(0.0, State{-1.1}, 1.0, State{0.3})).epsilon(1e-14));
}

TEST_CASE("gaussian kernel d=2 and unsupported dimension") {
  auto k2 = make_gauss_kernel(2);
  CHECK(k2(0.0, kO, 1.0, kO) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-12));
  CHECK_THROWS(make_gauss_kernel(3));
}

TEST_CASE("cauchy kernel values and total mass") {
  auto k = make_cauchy_kernel();
  CHECK(k(0.0, kO, 1.0, kO) == doctest::Approx(1.0 / kPi).epsilon(1e-12));
  CHECK(k(0.0, kO, 1.0, State{1.0}) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-12));
  // mass over radius 50 plus the arctan tail bound accounts for 1
  auto space = StateSpace::real_line(50.0, 4001);
  for (double t : {0.5, 1.0, 2.0}) {
    auto rep = integrate_space([&](const State& z) { return k(0.0, kO, t, z); }, space,
                               SpaceRule{}, k.tail_mass(0.0, kO, t, 50.0));
    CHECK(std::abs(rep.value - 1.0) <= rep.error + 1e-6);
  }
}

TEST_CASE("power potential values") {
  auto q = make_power_potential(0.5, 0.25);
  CHECK(q(1.0, kO) == doctest::Approx(1.0));
  CHECK(q(16.0, kO) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.singular_times().size() == 1);
  CHECK(q.singular_times()[0].location == 0.0);
  auto q1 = make_power_potential(0.5, 0.5);
  CHECK(q1(7.3, kO) == doctest::Approx(1.0));
  CHECK_THROWS(make_power_potential(0.5, 0.0));
  CHECK_THROWS(make_power_potential(0.5, 0.6));
}

TEST_CASE("built-ins are nonnegative at random admissible arguments") {
  std::mt19937 rng(0);
  std::uniform_real_distribution<double> time(-5.0, 5.0), pos(-20.0, 20.0), gap(1e-6, 10.0);
  auto kb = make_beta_kernel(0.5);
  auto kg = make_gauss_kernel(1);
  auto kc = make_cauchy_kernel();
  auto q = make_power_potential(0.5, 0.25);
  for (int i = 0; i < 10000; ++i) {
    double s = time(rng), t = s + gap(rng);
    State x{pos(rng)}, y{pos(rng)};
    CHECK(kb(s, kO, t, kO) >= 0.0);
    CHECK(kg(s, x, t, y) >= 0.0);
    CHECK(kc(s, x, t, y) >= 0.0);
    CHECK(q(time(rng), kO) >= 0.0);
  }
}

TEST_CASE("declared singularity exponent matches the beta kernel") {
  auto k = make_beta_kernel(0.25);
  CHECK(k.gamma() == doctest::Approx(-0.75));
  double ref = k(0.0, kO, 1e-6, kO) * std::pow(1e-6, 1.0 - 0.25);
  for (double dt : {1e-4, 1e-2, 0.5, 1.0}) {
    double v = k(0.0, kO, dt, kO) * std::pow(dt, 1.0 - 0.25);
    CHECK(std::abs(v - ref) <= 1e-12 * std::abs(ref));
  }
}

TEST_CASE("chapman-kolmogorov residuals") {
  SpaceTimeGrid grid;
  grid.times = {0.0, 0.5, 1.0, 1.5};
  QuadratureScheme sch;

  SUBCASE("gaussian") {
    auto k = make_gauss_kernel(1);
    grid.space = StateSpace::real_line(10.0, 401);
    grid.states = {State{0.0}, State{1.0}};
    CHECK(ck_residual(k, grid, sch) <= 1e-6);
  }
  SUBCASE("cauchy with radius 50") {
    auto k = make_cauchy_kernel();
    grid.space = StateSpace::real_line(50.0, 2001);
    grid.states = {State{0.0}, State{1.0}};
    CHECK(ck_residual(k, grid, sch) <= 1e-4);
  }
  SUBCASE("beta kernel does not claim the identity") {
    auto k = make_beta_kernel(0.5);
    grid.space = StateSpace::single_point();
    grid.states = {kO};
    CHECK_FALSE(k.claims_chapman_kolmogorov());
    CHECK_THROWS_AS(ck_residual(k, grid, sch), PreconditionError);
  }
}

TEST_CASE("tabulated kernel interpolates the csv grid") {
  std::string path = "tabulated_kernel_test.csv";
  {
    std::ofstream f(path);
    f << "s,x,t,y,value\n";
    for (double s : {0.0, 1.0})
      for (double x : {-1.0, 0.0, 1.0})
        for (double t : {1.5, 2.0, 3.0})
          for (double y : {-1.0, 0.0, 1.0})
            f << s << "," << x << "," << t << "," << y << ","
              << (1.0 + s + 0.5 * x + 0.25 * t + 0.125 * y) << "\n";
  }
  auto k = make_tabulated_kernel(path, 0.0);
  // exact at a grid point
  CHECK(k(1.0, State{0.0}, 2.0, State{1.0}) ==
        doctest::Approx(1.0 + 1.0 + 0.0 + 0.5 + 0.125).epsilon(1e-12));
  // multilinear data is reproduced exactly between nodes
  CHECK(k(0.5, State{0.5}, 1.75, State{-0.5}) ==
        doctest::Approx(1.0 + 0.5 + 0.25 + 0.4375 - 0.0625).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("grid pair enumeration and validation") {
  SpaceTimeGrid grid;
  grid.space = StateSpace::single_point();
  grid.times = {0.0, 1.0, 2.0};
  grid.states = {kO};
  CHECK(grid.pairs().size() == 3);  // (0,1), (0,2), (1,2)
  grid.states = {State{0.0}, State{1.0}};
  CHECK(grid.pairs().size() == 12);

  SpaceTimeGrid bad;
  bad.times = {1.0, 1.0};
  bad.states = {kO};
  CHECK_THROWS(bad.validate());
  bad.times = {0.0};
  CHECK_THROWS(bad.validate());
  bad.times = {0.0, 1.0};
  bad.states = {};
  CHECK_THROWS(bad.validate());
}
