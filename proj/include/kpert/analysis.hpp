#ifndef KPERT_ANALYSIS_HPP
#define KPERT_ANALYSIS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kpert/series.hpp"

namespace kpert {

/// Control pair (eta, Q): scalar eta >= 0 and a superadditive Q(s,t) >= 0
/// certifying k_1 <= (eta + Q(s,t)) k_0.
struct ControlPair {
  enum class Kind { Linear, Power, Tabulated };
  Kind kind = Kind::Linear;
  double eta = 0.0;
  double c = 0.0;      // Q(s,t) = c (t-s)^theta
  double theta = 1.0;  // >= 1 keeps Q superadditive
  std::vector<double> tab_times;       // Tabulated variant: Q(s,t) sampled on gaps
  std::vector<double> tab_values;

  double Q(double s, double t) const;
  /// Samples superadditivity on random triples; exact for Linear/Power inputs.
  bool superadditive_on_samples(double lo, double hi, int samples, unsigned seed = 0) const;
};

struct CertificateLocation {
  double s = 0.0, t = 0.0;
  State x, y;
};

struct Certificate {
  ControlPair control;
  double slack = 0.0;  // min over grid of ((eta+Q) k0 - k1) / k0
  bool valid = false;
  CertificateLocation worst;
  double envelope_at_horizon = 0.0;
};

/// Verifies k1 <= (eta + Q(s,t)) k0 entrywise on the grid.
Certificate check_condition(const SeriesEngine& engine, const ControlPair& control,
                            const SpaceTimeGrid& grid, double tolerance = 1e-9);

/// For each eta candidate fits the minimal linear slope c and returns the
/// certificate minimizing the comparability envelope at the grid horizon.
Certificate fit_affine_control(const SeriesEngine& engine, const SpaceTimeGrid& grid,
                               const std::vector<double>& eta_candidates = {0.0, 0.05, 0.1,
                                                                            0.25, 0.5});

struct ChainViolation {
  double s, t;
  State x, y;
  int n;
  double excess;  // amount beyond the noise threshold
};

struct ChainReport {
  double worst_violation = 0.0;  // max positive violation beyond noise, 0 if none
  std::vector<ChainViolation> violations;
};

/// Checks k_n <= k_{n-1} (eta + Q/n) and the product bound against k_0 for all
/// 1 <= n <= N; a violation counts only beyond 10x the summed error estimates.
ChainReport verify_term_chain(const SeriesTable& table, const ControlPair& control);

/// Comparability envelope: (1-eta)^{-(1+Q/eta)} for eta > 0, e^Q for eta = 0.
double envelope(double eta, double q_value);

struct EnvelopeReport {
  double worst_ratio = 0.0;  // max over grid of sum / (k0 * envelope)
  double tail_bound = 0.0;   // certified tail factor beyond the truncation
  int violations = 0;
};

/// Confirms the truncated sum is dominated by k0 * envelope entrywise and
/// reports the certified tail sum_{n>N} prod_{k<=n}(eta + Q/k).
EnvelopeReport verify_envelope(const SeriesTable& table, const ControlPair& control);

struct ThreePResult {
  double sup = 0.0;
  double s = 0.0, u = 0.0, t = 0.0;
  State x, z, y;
  long excluded = 0;  // triples skipped because the direct kernel vanished
  int refinements = 0;
};

/// sup over sampled s<u<t (and states) of min(k(s,x,u,z), k(u,z,t,y)) / k(s,x,t,y),
/// with the grid doubled (up to 3 times) while the max moves by more than 1%.
ThreePResult three_p_constant(const KernelDensity& k, const SpaceTimeGrid& grid,
                              int max_refinements = 3);

enum class KatoMode { Relative, Plain };

/// For each window h returns the supremum over grid pairs with t-s < h of the
/// relative ratio k1/k0, resp. the plain integral
/// int [kappa(s,x,u,z) + kappa(u,z,t,y)] q(u,z) dz du.
std::map<double, double> kato_scan(const SeriesEngine& engine,
                                   const std::vector<double>& h_values,
                                   const SpaceTimeGrid& grid, KatoMode mode);

}  // namespace kpert

#endif
