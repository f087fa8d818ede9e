#ifndef KPERT_QUADRATURE_HPP
#define KPERT_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "kpert/errors.hpp"

namespace kpert {

/// Nodes and weights of a Gaussian rule on [-1,1]; weights absorb the weight function.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b, a,b > -1, by Golub-Welsch.
GaussRule gauss_jacobi(int n, double a, double b);

/// Gauss-Legendre rule (Jacobi with a=b=0).
GaussRule gauss_legendre(int n);

struct TimeRule {
  enum class Kind { JacobiWeighted, GradedMesh };
  Kind kind = Kind::JacobiWeighted;
  int nodes = 64;        // Jacobi nodes, or Gauss-Legendre nodes per panel
  int panels = 12;       // graded-mesh panels per endpoint half
  double grading = 3.0;  // mesh grading exponent sigma >= 1
};

struct SpaceRule {
  enum class Kind { Trapezoid, GaussLegendre };
  Kind kind = Kind::Trapezoid;
  int mesh = 401;           // trapezoid points across the truncated domain
  int nodes_per_panel = 16; // Gauss-Legendre variant
  int panels = 16;
};

struct QuadratureScheme {
  TimeRule time;
  SpaceRule space;
  double rel_tol = 1e-8;
};

struct IntegrationReport {
  double value = 0.0;
  double error = 0.0;  // refinement-comparison estimate, nonnegative
  long evaluations = 0;
};

/// Interior power singularity of an integrand: |u - location|^exponent nearby.
struct SingularPoint {
  double location;
  double exponent;  // > -1
};

/// Integrates f over (s,t) where f(u) ~ (u-s)^a near s and (t-u)^b near t,
/// splitting at declared interior singular points. a, b > -1 or the integral
/// is reported divergent. Non-finite f at a node raises NumericError.
IntegrationReport integrate_time(const std::function<double(double)>& f, double s, double t,
                                 double a, double b,
                                 const std::vector<SingularPoint>& interior,
                                 const TimeRule& rule);

inline IntegrationReport integrate_time(const std::function<double(double)>& f, double s,
                                        double t, double a, double b, const TimeRule& rule) {
  return integrate_time(f, s, t, a, b, {}, rule);
}

}  // namespace kpert

#endif
