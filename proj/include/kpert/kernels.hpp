#ifndef KPERT_KERNELS_HPP
#define KPERT_KERNELS_HPP

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kpert/state_space.hpp"

namespace kpert {

/// Global counters; all evaluation is pure, counters are diagnostics only.
std::atomic<long>& kernel_eval_count();
std::atomic<long>& forward_guard_violations();

/// A forward kernel density kappa(s,x,t,y) >= 0 defined for s < t, with a
/// declared time-singularity exponent gamma in (-1,0] such that
/// kappa * (t-s)^{-gamma} stays bounded as t -> s+ on compacts.
class KernelDensity {
 public:
  using Eval = std::function<double(double, const State&, double, const State&)>;
  using TailMass = std::function<double(double, const State&, double, double)>;

  KernelDensity(Eval eval, double gamma, std::string label);

  /// Evaluates the density. Requesting t <= s violates the forward contract:
  /// the guard counter is bumped and PreconditionError is thrown.
  double operator()(double s, const State& x, double t, const State& y) const;

  double gamma() const { return gamma_; }
  const std::string& label() const { return label_; }

  bool claims_chapman_kolmogorov() const { return claims_ck_; }
  void set_claims_chapman_kolmogorov(bool v) { claims_ck_ = v; }

  /// Mass of kappa(s,x,t,.) outside the centered ball of radius R, if known.
  double tail_mass(double s, const State& x, double t, double radius) const;
  void set_tail_mass(TailMass f) { tail_ = std::move(f); }

 private:
  Eval eval_;
  TailMass tail_;
  double gamma_;
  std::string label_;
  bool claims_ck_ = false;
};

/// Nonnegative potential q(u,z) with declared singular time points
/// (power-type, exponent > -1) toward which quadrature meshes are graded.
class Potential {
 public:
  using Eval = std::function<double(double, const State&)>;

  Potential(Eval eval, std::string label) : eval_(std::move(eval)), label_(std::move(label)) {}

  double operator()(double u, const State& z) const { return eval_(u, z); }
  const std::string& label() const { return label_; }

  const std::vector<SingularPoint>& singular_times() const { return singular_; }
  void add_singular_time(double location, double exponent) {
    singular_.push_back({location, exponent});
  }

 private:
  Eval eval_;
  std::string label_;
  std::vector<SingularPoint> singular_;
};

/// One-point-space kernel kappa(s,t) = (t-s)^{beta-1} / Gamma(beta), 0 < beta < 1.
KernelDensity make_beta_kernel(double beta);

/// Gaussian transition density (4 pi (t-s))^{-d/2} exp(-|x-y|^2 / (4(t-s))), d in {1,2}.
KernelDensity make_gauss_kernel(int d);

/// Cauchy transition density (t-s) / (pi ((t-s)^2 + (x-y)^2)) on the real line.
KernelDensity make_cauchy_kernel();

/// q(u) = |u|^{-beta+eps} with 0 < eps <= beta < 1; singular time at 0.
Potential make_power_potential(double beta, double eps);

/// q == c, c >= 0.
Potential make_constant_potential(double c);

/// Kernel tabulated from CSV rows (s,x,t,y,value) with header, interpolated
/// multilinearly on the rectilinear grid of the listed coordinates.
KernelDensity make_tabulated_kernel(const std::string& csv_path, double gamma = 0.0);

/// Evaluation grid: all (s,x,t,y) with s < t drawn from times x states.
struct SpaceTimeGrid {
  StateSpace space = StateSpace::single_point();
  std::vector<double> times;   // strictly increasing, >= 2 entries
  std::vector<State> states;   // nonempty

  struct Pair {
    double s, t;
    State x, y;
  };
  std::vector<Pair> pairs() const;
  void validate() const;
};

/// Max relative Chapman-Kolmogorov residual
/// |int kappa(s,x,u,z) kappa(u,z,t,y) dz - kappa(s,x,t,y)| / kappa(s,x,t,y)
/// over sampled s < u < t from the grid. The kernel must claim the identity.
double ck_residual(const KernelDensity& k, const SpaceTimeGrid& grid,
                   const QuadratureScheme& scheme);

}  // namespace kpert

#endif
