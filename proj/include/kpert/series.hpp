#ifndef KPERT_SERIES_HPP
#define KPERT_SERIES_HPP

#include <memory>
#include <optional>
#include <vector>

#include "kpert/kernels.hpp"

namespace kpert {

struct RecursionPlan {
  int max_order = 12;       // N: highest series term computed
  int level_mesh = 48;      // tabulation points per convolution level
  double level_grading = 2.0;
  bool memoize = true;      // reuse per-origin tables across grid pairs
  int threads = 1;          // workers for level construction and scans
};

struct TermValue {
  double value = 0.0;
  double error = 0.0;  // aggregated quadrature + interpolation estimate
};

struct SeriesRow {
  double s, t;
  State x, y;
  std::vector<TermValue> terms;  // k_0 .. k_N
  double sum = 0.0;              // truncated sum of stored term values
  double tail_bound = -1.0;      // certified tail, filled by analysis when available
  bool divergence_flag = false;  // term ratio exceeded 1 three times in a row
};

struct SeriesTable {
  int order = 0;
  std::vector<SeriesRow> rows;  // lexicographic in (s,t,x,y)
};

/// Closed form q0^n (t-s)^{(n+1)beta-1} / Gamma((n+1)beta) for the beta-kernel
/// with constant potential q0; the one-term oracle for the series recursion.
double beta_kernel_closed_form(double beta, double q0, int n, double s, double t);

/// Full perturbed beta-kernel (t-s)^{beta-1} E_{beta,beta}(q0 (t-s)^beta).
double beta_kernel_series_closed_form(double beta, double q0, double s, double t);

/// Builds perturbation-series terms k_n = (Kq)^n K by iterated singularity-aware
/// quadrature, tabulating each convolution level on a graded time mesh and
/// interpolating in (u-s)^{gamma+1}-transformed coordinates.
class SeriesEngine {
 public:
  SeriesEngine(KernelDensity k, Potential q, StateSpace space, QuadratureScheme scheme = {},
               RecursionPlan plan = {});

  const KernelDensity& kernel() const { return k_; }
  const Potential& potential() const { return q_; }
  const StateSpace& space() const { return space_; }
  const QuadratureScheme& scheme() const { return scheme_; }
  const RecursionPlan& plan() const { return plan_; }

  /// k_n(s,x,t,y) with aggregated error estimate; n = 0 returns the kernel.
  TermValue eval_kn(int n, double s, const State& x, double t, const State& y) const;

  /// Fills the table for all grid pairs and n <= N. When a control pair with
  /// a valid certificate exists, callers may pass its per-term bound factors
  /// to stop early; here N is the hard cap.
  SeriesTable eval_series(const SpaceTimeGrid& grid, int N) const;

  /// Recomputes k_n through the (n-1-m, m) split and returns the max relative
  /// deviation from the m=0 recursion over the grid.
  double splitting_check(int n, int m, const SpaceTimeGrid& grid) const;

  /// Per-origin view: evaluates terms and truncated sums for fixed (s,x)
  /// at any t in (s, T]. Shares the tabulated convolution levels.
  class Origin {
   public:
    TermValue term(int n, double t, const State& y) const;
    TermValue truncated_sum(int N, double t, const State& y) const;
    ~Origin();

   private:
    friend class SeriesEngine;
    struct Impl;
    explicit Origin(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
  };

  /// Prepares forward tables for origin (s,x) up to horizon T and order N.
  std::shared_ptr<Origin> prepare_origin(double s, const State& x, double T, int N) const;

 private:
  KernelDensity k_;
  Potential q_;
  StateSpace space_;
  QuadratureScheme scheme_;
  RecursionPlan plan_;
};

}  // namespace kpert

#endif
