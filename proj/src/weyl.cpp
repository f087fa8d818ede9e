#include "kpert/weyl.hpp"

#include <algorithm>
#include <cmath>

#include "kpert/special.hpp"

namespace kpert {

TestFunction make_bump(double a, double b) {
  if (!(a < b)) throw std::domain_error("make_bump: requires a < b");
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto w = [mid, half](double u) { return (u - mid) / half; };
  TestFunction f;
  f.a = a;
  f.b = b;
  f.phi = [w](double u) {
    double x = w(u);
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - x * x));
  };
  f.dphi = [w, half](double u) {
    double x = w(u);
    if (std::abs(x) >= 1.0) return 0.0;
    double d = 1.0 - x * x;
    return std::exp(-1.0 / d) * (-2.0 * x / (d * d)) / half;
  };
  f.phi_sup = std::exp(-1.0);
  double m = 0.0;
  for (int i = 1; i < 4096; ++i) m = std::max(m, std::abs(f.dphi(a + (b - a) * i / 4096.0)));
  f.dphi_sup = m;
  return f;
}

double weyl_integral(const std::function<double(double)>& psi, double beta, double s,
                     double support_hi, const TimeRule& rule,
                     const std::vector<double>& breakpoints) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("weyl_integral: beta in (0,1)");
  if (!std::isfinite(support_hi))
    throw PreconditionError("weyl_integral: unbounded support and no decay bound, cannot truncate");
  if (s >= support_hi) return 0.0;
  std::vector<SingularPoint> brk;
  for (double p : breakpoints)
    if (p > s && p < support_hi) brk.push_back({p, 0.0});
  auto rep = integrate_time([&](double u) { return std::pow(u - s, beta - 1.0) * psi(u); }, s,
                            support_hi, beta - 1.0, 0.0, brk, rule);
  return rep.value / gamma_fn(beta);
}

double weyl_derivative(const TestFunction& phi, double beta, double s, const TimeRule& rule) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("weyl_derivative: beta in (0,1)");
  if (s >= phi.b) return 0.0;
  const double norm = 1.0 / gamma_fn(1.0 - beta);
  if (s >= phi.a) {
    auto rep = integrate_time(
        [&](double u) { return std::pow(u - s, -beta) * phi.dphi(u); }, s, phi.b, -beta, 0.0,
        rule);
    return norm * rep.value;
  }
  // s < a: since int_a^b phi' = 0, subtract the constant (a-s)^{-beta}
  double base = std::pow(phi.a - s, -beta);
  auto rep = integrate_time(
      [&](double u) { return (std::pow(u - s, -beta) - base) * phi.dphi(u); }, phi.a, phi.b,
      0.0, 0.0, rule);
  return norm * rep.value;
}

namespace {

// max_s |int kappa~_N(s,u) g(u) du + phi(s)| / ||phi||_inf on the one-point
// space; shared by the unperturbed, perturbed, and algebraic-identity checks
// so that q == 0 follows the identical code path.
double inverse_residual_impl(const KernelDensity& k, const Potential& q,
                             const std::function<double(double)>& g, double support_hi,
                             const std::vector<double>& breakpoints,
                             const std::function<double(double)>& phi, double phi_sup, int N,
                             const std::vector<double>& s_grid, const QuadratureScheme& scheme,
                             const RecursionPlan& plan) {
  SeriesEngine engine(k, q, StateSpace::single_point(), scheme, plan);
  double worst = 0.0;
  for (double s : s_grid) {
    double lhs = 0.0;
    if (s < support_hi) {
      auto origin = engine.prepare_origin(s, State{}, support_hi, std::max(N, 1));
      std::vector<SingularPoint> brk;
      for (double p : breakpoints)
        if (p > s && p < support_hi) brk.push_back({p, 0.0});
      for (const auto& sp : q.singular_times())
        if (sp.location > s && sp.location < support_hi) brk.push_back(sp);
      auto rep = integrate_time(
          [&](double u) { return origin->truncated_sum(N, u, State{}).value * g(u); }, s,
          support_hi, k.gamma(), 0.0, brk, scheme.time);
      lhs = rep.value;
    }
    worst = std::max(worst, std::abs(lhs + phi(s)));
  }
  return phi_sup > 0.0 ? worst / phi_sup : worst;
}

}  // namespace

double left_inverse_residual(const TestFunction& phi, double beta,
                             const std::vector<double>& s_grid, const QuadratureScheme& scheme,
                             const RecursionPlan& plan) {
  KernelDensity k = make_beta_kernel(beta);
  Potential q0 = make_constant_potential(0.0);
  TimeRule inner = scheme.time;
  auto g = [&phi, beta, &inner](double u) { return weyl_derivative(phi, beta, u, inner); };
  return inverse_residual_impl(k, q0, g, phi.b, {phi.a}, phi.phi, phi.phi_sup, 0, s_grid,
                               scheme, plan);
}

PerturbedInverseReport perturbed_inverse_residual(const TestFunction& phi, double beta,
                                                  const Potential& q, const Certificate& cert,
                                                  int N, const std::vector<double>& s_grid,
                                                  const QuadratureScheme& scheme,
                                                  const RecursionPlan& plan) {
  if (!cert.valid || cert.control.eta >= 1.0)
    throw CertificateError("perturbed_inverse_residual: requires a valid certificate, eta < 1");
  KernelDensity k = make_beta_kernel(beta);
  TimeRule inner = scheme.time;
  auto g = [&, beta](double u) {
    return weyl_derivative(phi, beta, u, inner) + q(u, State{}) * phi.phi(u);
  };
  PerturbedInverseReport rep;
  rep.residual = inverse_residual_impl(k, q, g, phi.b, {phi.a}, phi.phi, phi.phi_sup, N, s_grid,
                                       scheme, plan);

  // certified truncation tail per the product bound
  SeriesEngine engine(k, q, StateSpace::single_point(), scheme, plan);
  const double gb = gamma_fn(beta);
  for (double s : s_grid) {
    if (!(s < phi.b)) continue;
    double qst = cert.control.Q(s, phi.b);
    double prod = 1.0;
    for (int n = 1; n <= N; ++n) prod *= cert.control.eta + qst / n;
    double tail = 0.0;
    for (int n = N + 1; n <= 100000; ++n) {
      prod *= cert.control.eta + qst / n;
      tail += prod;
      if (prod < 1e-16) break;
    }
    rep.truncation_tail = std::max(rep.truncation_tail, tail);

    // envelope check for the truncated kernel on a gap sample
    auto origin = engine.prepare_origin(s, State{}, phi.b, std::max(N, 1));
    for (int i = 1; i <= 16; ++i) {
      double u = s + (phi.b - s) * i / 16.0;
      double tk = origin->truncated_sum(N, u, State{}).value;
      double bound = envelope(cert.control.eta, cert.control.Q(s, u)) *
                     std::pow(u - s, beta - 1.0) / gb;
      rep.worst_envelope_ratio = std::max(rep.worst_envelope_ratio, tk / bound);
    }
  }
  return rep;
}

double algebraic_identity_check(const KernelDensity& k, const Potential& q,
                                const Certificate& cert, const TestFunction& phi,
                                const GuardedFunction& psi, const std::vector<double>& s_grid,
                                const QuadratureScheme& scheme, const RecursionPlan& plan) {
  if (!cert.valid || cert.control.eta >= 1.0)
    throw CertificateError("algebraic_identity_check: requires a valid certificate, eta < 1");
  if (!std::isfinite(psi.support_hi))
    throw PreconditionError(
        "algebraic_identity_check: psi lacks a support bound, |psi| <= c 1_(a,b) fails");

  // domination guard: |psi(s)| <= c * K 1_(a',b')(s) with (a',b') past the support
  double a1 = psi.support_hi + 1.0, b1 = psi.support_hi + 2.0;
  double beta = k.gamma() + 1.0;
  auto k1ab = [&](double s) {
    return (std::pow(b1 - s, beta) - std::pow(a1 - s, beta)) / gamma_fn(beta + 1.0);
  };
  double smin = s_grid.empty() ? psi.support_hi - 4.0 : *std::min_element(s_grid.begin(), s_grid.end());
  double c_mod = 0.0;
  for (int i = 0; i <= 64; ++i) {
    double s = smin + (psi.support_hi - smin) * i / 64.0;
    c_mod = std::max(c_mod, std::abs(psi.f(s)) / k1ab(s));
  }
  for (double far : {8.0, 16.0, 32.0}) {
    double s = smin - far;
    if (std::abs(psi.f(s)) > 2.0 * std::max(c_mod, 1e-300) * k1ab(s))
      throw PreconditionError(
          "algebraic_identity_check: hypothesis |psi| <= c K 1_(a,b) fails on the far field");
  }

  int N = plan.max_order;
  auto g = [&](double u) { return psi.f(u) + q(u, State{}) * phi.phi(u); };
  std::vector<double> brk = psi.breakpoints;
  brk.push_back(phi.a);
  brk.push_back(phi.b);
  return inverse_residual_impl(k, q, g, psi.support_hi, brk, phi.phi, phi.phi_sup, N, s_grid,
                               scheme, plan);
}

}  // namespace kpert
