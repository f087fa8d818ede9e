#include "kpert/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include "kpert/interp.hpp"
#include "kpert/parallel.hpp"
#include "kpert/special.hpp"

namespace kpert {

double beta_kernel_closed_form(double beta, double q0, int n, double s, double t) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("beta_kernel_closed_form: beta must lie in (0,1)");
  if (q0 < 0.0) throw std::domain_error("beta_kernel_closed_form: q0 must be nonnegative");
  if (!(s < t)) throw std::domain_error("beta_kernel_closed_form: requires s < t");
  if (n < 0) throw std::domain_error("beta_kernel_closed_form: n must be nonnegative");
  double dt = t - s;
  return std::pow(q0, n) * std::pow(dt, (n + 1) * beta - 1.0) / gamma_fn((n + 1) * beta);
}

double beta_kernel_series_closed_form(double beta, double q0, double s, double t) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("beta_kernel_series_closed_form: beta must lie in (0,1)");
  double dt = t - s;
  return std::pow(dt, beta - 1.0) * mittag_leffler(beta, beta, q0 * std::pow(dt, beta));
}

namespace {

// One tabulated convolution level: values of k_j with the leading power
// singularity divided out, interpolated per state node in the transformed
// coordinate tau = gap^{gamma0+1}.
struct Level {
  double gamma = 0.0;  // exponent of the factored singularity
  std::vector<double> mesh_gap;  // |u - anchor| at mesh points, increasing
  std::vector<double> tau;
  std::vector<std::vector<double>> val;  // [state][mesh], de-singularized
  std::vector<PchipInterpolant> interp;  // per state, over tau
  double rel_noise = 0.0;                // accumulated relative error budget
};

struct Tables {
  bool forward = true;
  double anchor_time = 0.0;  // s for forward tables, t for backward tables
  State anchor_state;        // x, resp. y
  double horizon = 0.0;      // far end of the tabulated gap range
  StateSpace::NodeSet nodes;
  std::vector<Level> levels;  // levels[j-1] holds order j
  double gamma0 = 0.0;
  double e_anchor = 0.0;  // potential exponent folded at the anchor time
  double tail_rel = 0.0;  // relative truncation allowance of the state space
};

double q_exponent_at(const Potential& q, double time) {
  double e = 0.0;
  for (const auto& sp : q.singular_times())
    if (sp.location == time) e += sp.exponent;
  return e;
}

}  // namespace

struct SeriesEngine::Origin::Impl {
  const SeriesEngine* engine = nullptr;
  Tables fwd;
  int order = 0;
};

SeriesEngine::Origin::Origin(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
SeriesEngine::Origin::~Origin() = default;

namespace {

constexpr double kTiny = 1e-300;

struct Combiner {
  const KernelDensity& k;
  const Potential& q;
  const QuadratureScheme& scheme;

  double level_gamma(const Tables& t, int j) const {
    return j == 0 ? t.gamma0 : t.levels[j - 1].gamma;
  }

  double level_noise(const Tables& t, int j) const {
    return j == 0 ? 0.0 : t.levels[j - 1].rel_noise;
  }

  // k_{jF + jB + 1}(s,x,t,y) assembled from a forward level and a backward level.
  TermValue combine(const Tables& F, int jF, const Tables* B, int jB, double s, const State& x,
                    double t, const State& y) const {
    const auto& nodes = F.nodes;
    const Level* FL = jF > 0 ? &F.levels[jF - 1] : nullptr;
    const Level* BL = (B && jB > 0) ? &B->levels[jB - 1] : nullptr;
    auto integrand = [&](double u) {
      // per-u singular factors hoisted out of the state loop
      double powL = 1.0, tauL = 0.0, powR = 1.0, tauR = 0.0;
      int locL = 0, locR = 0;
      if (FL) {
        double gap = u - s;
        powL = std::pow(gap, FL->gamma);
        tauL = std::pow(gap, F.gamma0 + 1.0);
        locL = FL->interp[0].locate(tauL);
      }
      if (BL) {
        double gap = t - u;
        powR = std::pow(gap, BL->gamma);
        tauR = std::pow(gap, B->gamma0 + 1.0);
        locR = BL->interp[0].locate(tauR);
      }
      double acc = 0.0;
      for (size_t m = 0; m < nodes.nodes.size(); ++m) {
        const State& z = nodes.nodes[m];
        double qv = q(u, z);
        if (qv == 0.0) continue;
        double lv = FL ? powL * FL->interp[m].eval_at(locL, tauL) : k(s, x, u, z);
        double rv = BL ? powR * BL->interp[m].eval_at(locR, tauR) : k(u, z, t, y);
        acc += nodes.weights[m] * lv * qv * rv;
      }
      return acc;
    };
    double a = level_gamma(F, jF) + 0.0;
    double b = (B && jB > 0) ? B->levels[jB - 1].gamma : F.gamma0;
    auto rep = integrate_time(integrand, s, t, a, b, q.singular_times(), scheme.time);
    TermValue tv;
    tv.value = rep.value;
    double noise = level_noise(F, jF) + (B ? level_noise(*B, jB) : 0.0) + F.tail_rel;
    tv.error = rep.error + std::abs(rep.value) * noise;
    return tv;
  }
};

// Builds one more level onto the tables (forward: anchored at (s,x) toward
// growing u; backward: anchored at (t,y) toward earlier u).
void build_level(Tables& T, const Combiner& C, const RecursionPlan& plan, int threads) {
  int j = int(T.levels.size()) + 1;
  Level L;
  double prev_gamma = j == 1 ? T.gamma0 : T.levels[j - 2].gamma;
  L.gamma = prev_gamma + T.e_anchor + T.gamma0 + 1.0;

  const int M = std::max(4, plan.level_mesh);
  double span = T.forward ? (T.horizon - T.anchor_time) : (T.anchor_time - T.horizon);
  L.mesh_gap.resize(M);
  L.tau.resize(M);
  for (int i = 0; i < M; ++i) {
    double frac = std::pow(double(i + 1) / M, plan.level_grading);
    L.mesh_gap[i] = span * frac;
    L.tau[i] = std::pow(L.mesh_gap[i], T.gamma0 + 1.0);
  }

  size_t ns = T.nodes.nodes.size();
  L.val.assign(ns, std::vector<double>(M, 0.0));
  std::vector<std::vector<double>> errs(ns, std::vector<double>(M, 0.0));

  // bare-kernel forward view used as the left factor of backward recursion
  // steps: k_j(u,z,t,y) = int kappa(u,z,w,.) q k_{j-1}(w,.,t,y)
  Tables bare;
  bare.forward = true;
  bare.nodes = T.nodes;
  bare.gamma0 = T.gamma0;
  bare.tail_rel = T.tail_rel;

  parallel_for(size_t(M), threads, [&](size_t i) {
    double gap = L.mesh_gap[i];
    for (size_t m = 0; m < ns; ++m) {
      TermValue tv;
      if (T.forward) {
        double u = T.anchor_time + gap;
        tv = C.combine(T, j - 1, nullptr, 0, T.anchor_time, T.anchor_state, u,
                       T.nodes.nodes[m]);
      } else {
        double u = T.anchor_time - gap;
        tv = C.combine(bare, 0, &T, j - 1, u, T.nodes.nodes[m], T.anchor_time, T.anchor_state);
      }
      double scale = std::pow(gap, -L.gamma);
      L.val[m][i] = tv.value * scale;
      errs[m][i] = tv.error * scale;
    }
  });

  double worst_rel = 0.0;
  for (size_t m = 0; m < ns; ++m)
    for (int i = 0; i < M; ++i)
      if (std::abs(L.val[m][i]) > kTiny)
        worst_rel = std::max(worst_rel, errs[m][i] / std::abs(L.val[m][i]));

  L.interp.reserve(ns);
  for (size_t m = 0; m < ns; ++m) L.interp.emplace_back(L.tau, L.val[m]);

  double prev_noise = j == 1 ? 0.0 : T.levels[j - 2].rel_noise;
  L.rel_noise = prev_noise + worst_rel + T.tail_rel;
  T.levels.push_back(std::move(L));

  // probe the fresh interpolant at off-mesh gaps; charges the measured
  // deviation to this level's noise budget
  Level& built = T.levels.back();
  size_t mid = ns / 2;
  double probe_rel = 0.0;
  for (int pi : {M / 3, (2 * M) / 3}) {
    double frac = std::pow((pi + 0.5) / M, plan.level_grading);
    double gap = span * frac;
    TermValue direct;
    if (T.forward) {
      double u = T.anchor_time + gap;
      direct = C.combine(T, j - 1, nullptr, 0, T.anchor_time, T.anchor_state, u,
                         T.nodes.nodes[mid]);
    } else {
      double u = T.anchor_time - gap;
      direct = C.combine(bare, 0, &T, j - 1, u, T.nodes.nodes[mid], T.anchor_time,
                         T.anchor_state);
    }
    double interp_v = std::pow(gap, built.gamma) *
                      built.interp[mid](std::pow(gap, T.gamma0 + 1.0));
    if (std::abs(direct.value) > kTiny)
      probe_rel = std::max(probe_rel, std::abs(direct.value - interp_v) / std::abs(direct.value));
  }
  built.rel_noise += probe_rel;
}

Tables make_tables(bool forward, const KernelDensity& k, const Potential& q,
                   const StateSpace& space, const QuadratureScheme& scheme, double anchor,
                   const State& anchor_state, double horizon) {
  Tables T;
  T.forward = forward;
  T.anchor_time = anchor;
  T.anchor_state = anchor_state;
  T.horizon = horizon;
  T.nodes = space.quad_nodes(scheme.space);
  T.gamma0 = k.gamma();
  T.e_anchor = q_exponent_at(q, anchor);
  if (space.radius() > 0.0) {
    double far = forward ? horizon : anchor;
    double near = forward ? anchor : horizon;
    T.tail_rel = k.tail_mass(near, anchor_state, far, space.radius());
  }
  return T;
}

}  // namespace

SeriesEngine::SeriesEngine(KernelDensity k, Potential q, StateSpace space,
                           QuadratureScheme scheme, RecursionPlan plan)
    : k_(std::move(k)), q_(std::move(q)), space_(std::move(space)), scheme_(scheme), plan_(plan) {
  if (plan_.max_order < 0) throw std::invalid_argument("SeriesEngine: plan.max_order must be >= 0");
}

std::shared_ptr<SeriesEngine::Origin> SeriesEngine::prepare_origin(double s, const State& x,
                                                                   double T, int N) const {
  if (!(T > s)) throw PreconditionError("prepare_origin: horizon must exceed the origin time");
  if (N > plan_.max_order) throw PreconditionError("prepare_origin: order exceeds plan.max_order");
  auto impl = std::make_unique<Origin::Impl>();
  impl->engine = this;
  impl->order = N;
  impl->fwd = make_tables(true, k_, q_, space_, scheme_, s, x, T);
  Combiner C{k_, q_, scheme_};
  for (int j = 1; j <= N - 1; ++j) build_level(impl->fwd, C, plan_, plan_.threads);
  return std::shared_ptr<Origin>(new Origin(std::move(impl)));
}

TermValue SeriesEngine::Origin::term(int n, double t, const State& y) const {
  const auto& fwd = impl_->fwd;
  if (n < 0) throw PreconditionError("Origin::term: order must be nonnegative");
  if (n > impl_->order) throw PreconditionError("Origin::term: order exceeds the prepared plan");
  const SeriesEngine& e = *impl_->engine;
  if (n == 0) return TermValue{e.kernel()(fwd.anchor_time, fwd.anchor_state, t, y), 0.0};
  Combiner C{e.kernel(), e.potential(), e.scheme()};
  try {
    return C.combine(fwd, n - 1, nullptr, 0, fwd.anchor_time, fwd.anchor_state, t, y);
  } catch (const NumericError& ex) {
    std::ostringstream os;
    os << "eval_kn[n=" << n << ", s=" << fwd.anchor_time << ", t=" << t << "]: " << ex.what();
    throw NumericError(os.str());
  }
}

TermValue SeriesEngine::Origin::truncated_sum(int N, double t, const State& y) const {
  TermValue out;
  for (int n = 0; n <= N; ++n) {
    TermValue tv = term(n, t, y);
    out.value += tv.value;
    out.error += tv.error;
  }
  return out;
}

TermValue SeriesEngine::eval_kn(int n, double s, const State& x, double t,
                                const State& y) const {
  if (!(s < t)) throw PreconditionError("eval_kn: requires s < t");
  if (n > plan_.max_order) throw PreconditionError("eval_kn: order exceeds plan.max_order");
  auto origin = prepare_origin(s, x, t, std::max(n, 1));
  return origin->term(n, t, y);
}

SeriesTable SeriesEngine::eval_series(const SpaceTimeGrid& grid, int N) const {
  grid.validate();
  if (N < 0 || N > plan_.max_order)
    throw PreconditionError("eval_series: order outside the plan");

  SeriesTable table;
  table.order = N;
  double horizon = grid.times.back();

  for (double s : grid.times) {
    if (!(s < horizon)) continue;
    for (const State& x : grid.states) {
      auto origin = prepare_origin(s, x, horizon, N);
      for (double t : grid.times) {
        if (!(t > s)) continue;
        for (const State& y : grid.states) {
          SeriesRow row;
          row.s = s;
          row.t = t;
          row.x = x;
          row.y = y;
          row.terms.reserve(N + 1);
          int rising = 0;
          for (int n = 0; n <= N; ++n) {
            TermValue tv = origin->term(n, t, y);
            if (n >= 1) {
              double prev = row.terms.back().value;
              if (prev > 0.0 && tv.value > prev)
                ++rising;
              else
                rising = 0;
              if (rising >= 3) row.divergence_flag = true;
            }
            row.terms.push_back(tv);
          }
          for (const auto& tv : row.terms) row.sum += tv.value;
          table.rows.push_back(std::move(row));
        }
      }
    }
  }
  // deterministic order: lexicographic in (s, t, x, y)
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const SeriesRow& a, const SeriesRow& b) {
    if (a.s != b.s) return a.s < b.s;
    if (a.t != b.t) return a.t < b.t;
    if (a.x.x != b.x.x) return a.x.x < b.x.x;
    if (a.x.y != b.x.y) return a.x.y < b.x.y;
    if (a.y.x != b.y.x) return a.y.x < b.y.x;
    return a.y.y < b.y.y;
  });
  return table;
}

double SeriesEngine::splitting_check(int n, int m, const SpaceTimeGrid& grid) const {
  if (n < 1 || n > plan_.max_order) throw PreconditionError("splitting_check: need 1 <= n <= plan");
  if (m < 0 || m > n - 1) throw PreconditionError("splitting_check: need 0 <= m <= n-1");
  grid.validate();
  Combiner C{k_, q_, scheme_};

  // forward tables are shared across pairs with the same origin, backward
  // tables across pairs with the same target
  std::map<std::tuple<double, double, double>, std::shared_ptr<Origin>> fwd_cache;
  std::map<std::tuple<double, double, double>, std::shared_ptr<Tables>> bwd_cache;
  double t_min = grid.times.front(), t_max = grid.times.back();

  double worst = 0.0;
  for (const auto& pr : grid.pairs()) {
    auto fkey = std::make_tuple(pr.s, pr.x.x, pr.x.y);
    auto& origin = fwd_cache[fkey];
    if (!origin) origin = prepare_origin(pr.s, pr.x, t_max, n);
    TermValue primary = origin->term(n, pr.t, pr.y);
    double split;
    if (m == 0) {
      split = primary.value;  // identical code path by construction
    } else {
      auto bkey = std::make_tuple(pr.t, pr.y.x, pr.y.y);
      auto& bwd = bwd_cache[bkey];
      if (!bwd) {
        bwd = std::make_shared<Tables>(
            make_tables(false, k_, q_, space_, scheme_, pr.t, pr.y, t_min));
        for (int j = 1; j <= m; ++j) build_level(*bwd, C, plan_, plan_.threads);
      }
      // forward tables hold levels up to n-1 >= n-1-m
      split = C.combine(origin->impl_->fwd, n - 1 - m, bwd.get(), m, pr.s, pr.x, pr.t, pr.y).value;
    }
    if (std::abs(primary.value) > kTiny)
      worst = std::max(worst, std::abs(split - primary.value) / std::abs(primary.value));
    else
      worst = std::max(worst, std::abs(split - primary.value));
  }
  return worst;
}

}  // namespace kpert
