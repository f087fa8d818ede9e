#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kpert/quadrature.hpp"
#include "kpert/special.hpp"
#include "kpert/state_space.hpp"

using namespace kpert;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("gauss-jacobi rules integrate the weight exactly") {
  // sum of weights = int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)
  for (double a : {-0.5, 0.0, 0.5}) {
    for (double b : {-0.75, 0.0, 0.25}) {
      auto rule = gauss_jacobi(12, a, b);
      double total = 0.0;
      for (double w : rule.weights) total += w;
      double want = std::pow(2.0, a + b + 1.0) * beta_fn(a + 1.0, b + 1.0);
      CHECK(total == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta integral with both endpoint singularities") {
  // int_0^1 u^{-1/2} (1-u)^{-1/2} du = B(1/2,1/2) = pi
  auto f = [](double u) { return std::pow(u, -0.5) * std::pow(1.0 - u, -0.5); };
  TimeRule rule;
  auto rep = integrate_time(f, 0.0, 1.0, -0.5, -0.5, rule);
  CHECK(std::abs(rep.value - kPi) / kPi < 1e-10);
}

TEST_CASE("asymmetric beta integral") {
  // int_0^1 u^{-1/4} (1-u)^{-1/2} du = B(3/4, 1/2)
  auto f = [](double u) { return std::pow(u, -0.25) * std::pow(1.0 - u, -0.5); };
  double want = beta_fn(0.75, 0.5);
  TimeRule rule;
  auto rep = integrate_time(f, 0.0, 1.0, -0.25, -0.5, rule);
  CHECK(std::abs(rep.value - want) / want < 1e-8);
}

TEST_CASE("constant integrand is exact") {
  auto rep = integrate_time([](double) { return 1.0; }, 0.0, 2.0, 0.0, 0.0, TimeRule{});
  CHECK(rep.value == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("graded mesh variant agrees with the Jacobi rule") {
  auto f = [](double u) { return std::pow(u, -0.5) * std::cos(u); };
  TimeRule jac;
  TimeRule graded;
  graded.kind = TimeRule::Kind::GradedMesh;
  auto a = integrate_time(f, 0.0, 1.0, -0.5, 0.0, jac);
  auto b = integrate_time(f, 0.0, 1.0, -0.5, 0.0, graded);
  CHECK(std::abs(a.value - b.value) < 1e-8 * std::abs(a.value));
}

TEST_CASE("interior singular points are split out") {
  // int_{-1}^{1} |u|^{-1/2} du = 4, singular point at 0
  auto f = [](double u) { return std::pow(std::abs(u), -0.5); };
  TimeRule rule;
  auto rep = integrate_time(f, -1.0, 1.0, 0.0, 0.0, {{0.0, -0.5}}, rule);
  CHECK(std::abs(rep.value - 4.0) < 1e-9);
}

TEST_CASE("linearity within combined error estimates") {
  auto f = [](double u) { return std::sin(3.0 * u); };
  auto g = [](double u) { return std::exp(-u); };
  double alpha = 2.5, beta = -1.25;
  TimeRule rule;
  auto rf = integrate_time(f, 0.0, 1.0, 0.0, 0.0, rule);
  auto rg = integrate_time(g, 0.0, 1.0, 0.0, 0.0, rule);
  auto rc = integrate_time([&](double u) { return alpha * f(u) + beta * g(u); }, 0.0, 1.0, 0.0,
                           0.0, rule);
  double tol = std::abs(alpha) * rf.error + std::abs(beta) * rg.error + rc.error + 1e-14;
  CHECK(std::abs(rc.value - (alpha * rf.value + beta * rg.value)) <= tol);
}

TEST_CASE("doubling nodes cuts the error by at least 4x until the floor") {
  // a non-polynomial integrand so the rule is not exact
  auto f = [](double u) { return std::pow(u, -0.5) / (1.0 + u * u); };
  double ref;
  {
    TimeRule fine;
    fine.nodes = 200;
    ref = integrate_time(f, 0.0, 1.0, -0.5, 0.0, fine).value;
  }
  double prev = -1.0;
  for (int n : {4, 8, 16}) {
    TimeRule rule;
    rule.nodes = n;
    double err = std::abs(integrate_time(f, 0.0, 1.0, -0.5, 0.0, rule).value - ref);
    if (prev > 0 && prev > 1e-13) CHECK(err <= prev / 4.0);
    prev = err;
  }
}

TEST_CASE("error honesty on closed-form examples") {
  struct Case {
    std::function<double(double)> f;
    double a, b, exact;
  };
  std::vector<Case> cases = {
      {[](double u) { return std::pow(u, -0.5) * std::pow(1.0 - u, -0.5); }, -0.5, -0.5, kPi},
      {[](double) { return 1.0; }, 0.0, 0.0, 1.0},
      {[](double u) { return std::pow(u, -0.25) * std::pow(1.0 - u, -0.5); }, -0.25, -0.5,
       beta_fn(0.75, 0.5)},
  };
  for (const auto& c : cases) {
    TimeRule rule;
    rule.nodes = 12;  // coarse on purpose so the estimate is nontrivial
    auto rep = integrate_time(c.f, 0.0, 1.0, c.a, c.b, rule);
    CHECK(std::abs(rep.value - c.exact) <= 10.0 * rep.error + 1e-15);
  }
}

TEST_CASE("divergent endpoint exponents are rejected") {
  CHECK_THROWS_AS(
      integrate_time([](double u) { return 1.0 / u; }, 0.0, 1.0, -1.0, 0.0, TimeRule{}),
      NumericError);
}

TEST_CASE("non-finite integrand raises") {
  auto f = [](double u) { return u < 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(integrate_time(f, 0.0, 1.0, 0.0, 0.0, TimeRule{}), NumericError);
}

TEST_CASE("space integration: single point is counting measure") {
  auto space = StateSpace::single_point();
  auto rep = integrate_space([](const State&) { return 3.5; }, space, SpaceRule{});
  CHECK(rep.value == 3.5);
  CHECK(rep.error == 0.0);
}

TEST_CASE("space integration: standard normal mass over radius 8") {
  auto space = StateSpace::real_line(8.0, 801);
  auto rep = integrate_space(
      [](const State& z) { return std::exp(-0.5 * z.x * z.x) / std::sqrt(2.0 * kPi); }, space,
      SpaceRule{});
  CHECK(std::abs(rep.value - 1.0) < 1e-10);
}

TEST_CASE("space integration: zero integrand") {
  auto space = StateSpace::interval(-2.0, 3.0, 101);
  auto rep = integrate_space([](const State&) { return 0.0; }, space, SpaceRule{});
  CHECK(rep.value == 0.0);
}

TEST_CASE("space integration: caller tail bound lands in the error") {
  auto space = StateSpace::real_line(5.0, 101);
  auto rep = integrate_space([](const State&) { return 1.0; }, space, SpaceRule{}, 0.125);
  CHECK(rep.error >= 0.125);
}

TEST_CASE("gauss-legendre panels match trapezoid on a smooth integrand") {
  auto space = StateSpace::interval(0.0, 1.0, 2001);
  SpaceRule trap;
  SpaceRule gl;
  gl.kind = SpaceRule::Kind::GaussLegendre;
  auto g = [](const State& z) { return std::exp(z.x); };
  auto a = integrate_space(g, space, trap);
  auto b = integrate_space(g, space, gl);
  CHECK(std::abs(a.value - b.value) < 1e-6);
  CHECK(std::abs(b.value - (std::exp(1.0) - 1.0)) < 1e-12);
}
