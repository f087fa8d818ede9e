#ifndef KPERT_SPECIAL_HPP
#define KPERT_SPECIAL_HPP

#include <cmath>
#include <stdexcept>

namespace kpert {

inline double gamma_fn(double x) {
  if (x <= 0.0 && x == std::floor(x))
    throw std::domain_error("gamma_fn: nonpositive integer argument");
  return std::tgamma(x);
}

inline double log_gamma(double x) {
  if (x <= 0.0) throw std::domain_error("log_gamma: argument must be positive");
  return std::lgamma(x);
}

inline double beta_fn(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("beta_fn: arguments must be positive");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) = sum z^n / Gamma(alpha n + beta),
/// summed by its defining power series with Kahan compensation.
inline double mittag_leffler(double alpha, double beta, double z) {
  if (alpha <= 0.0) throw std::domain_error("mittag_leffler: alpha must be positive");
  double sum = 0.0, comp = 0.0;
  double zn = 1.0;
  for (int n = 0; n < 10000; ++n) {
    double term = zn / std::tgamma(alpha * n + beta);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    zn *= z;
    if (n > 2 && std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) return sum;
  }
  throw std::runtime_error("mittag_leffler: series did not converge");
}

}  // namespace kpert

#endif
