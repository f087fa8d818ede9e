#ifndef KPERT_WEYL_HPP
#define KPERT_WEYL_HPP

#include <functional>
#include <limits>
#include <vector>

#include "kpert/analysis.hpp"
#include "kpert/series.hpp"

namespace kpert {

/// Continuously differentiable test function with compact support (a,b);
/// the derivative is supplied analytically.
struct TestFunction {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double a = 0.0, b = 0.0;
  double phi_sup = 0.0;   // ||phi||_inf
  double dphi_sup = 0.0;  // ||phi'||_inf
};

/// Smooth bump exp(-1/(1-w^2)) mapped onto (a,b), zero outside.
TestFunction make_bump(double a, double b);

/// Right-sided fractional integral W^{-beta} psi(s) =
/// Gamma(beta)^{-1} int_s^inf (u-s)^{beta-1} psi(u) du. The integrand must
/// vanish beyond support_hi (else the integral cannot be truncated); declared
/// breakpoints split the quadrature interval.
double weyl_integral(const std::function<double(double)>& psi, double beta, double s,
                     double support_hi, const TimeRule& rule,
                     const std::vector<double>& breakpoints = {});

/// Weyl fractional derivative of a test function:
/// Gamma(1-beta)^{-1} int_s^inf (u-s)^{-beta} phi'(u) du; zero for s >= b,
/// evaluated through the regularized form for s < a.
double weyl_derivative(const TestFunction& phi, double beta, double s, const TimeRule& rule);

/// max_s |W^{-beta} d^beta phi (s) + phi(s)| / ||phi||_inf over the grid.
double left_inverse_residual(const TestFunction& phi, double beta,
                             const std::vector<double>& s_grid, const QuadratureScheme& scheme,
                             const RecursionPlan& plan = {});

struct PerturbedInverseReport {
  double residual = 0.0;            // max normalized residual over the grid
  double truncation_tail = 0.0;     // certified tail factor from the envelope
  double worst_envelope_ratio = 0.0;  // max kappa~_N / envelope bound, should be <= 1
};

/// Residual of int kappa~_N(s,u) [d^beta phi(u) + q(u) phi(u)] du = -phi(s)
/// with the perturbed kernel truncated at N under a valid certificate.
PerturbedInverseReport perturbed_inverse_residual(const TestFunction& phi, double beta,
                                                  const Potential& q, const Certificate& cert,
                                                  int N, const std::vector<double>& s_grid,
                                                  const QuadratureScheme& scheme,
                                                  const RecursionPlan& plan = {});

/// General function fed to the perturbed-kernel identity, with the metadata
/// the integrability guards need.
struct GuardedFunction {
  std::function<double(double)> f;
  double support_hi = std::numeric_limits<double>::infinity();  // f == 0 beyond
  std::vector<double> breakpoints;
};

/// Verifies the telescoping identity K~(psi + q phi) = -phi on the grid for
/// the one-point-space kernel, after checking the domination guard
/// |psi| <= c * K 1_(a',b') on sampled far-field points.
double algebraic_identity_check(const KernelDensity& k, const Potential& q,
                                const Certificate& cert, const TestFunction& phi,
                                const GuardedFunction& psi, const std::vector<double>& s_grid,
                                const QuadratureScheme& scheme, const RecursionPlan& plan = {});

}  // namespace kpert

#endif
