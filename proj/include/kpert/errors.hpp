#ifndef KPERT_ERRORS_HPP
#define KPERT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kpert {

/// Quadrature or series evaluation hit a non-finite value.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation contract (forward kernel, plan order, guard hypotheses).
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No valid comparability certificate (eta >= 1 or condition check failed).
struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kpert

#endif
