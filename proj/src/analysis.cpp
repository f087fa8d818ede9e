#include "kpert/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kpert/interp.hpp"

namespace kpert {

double ControlPair::Q(double s, double t) const {
  if (!(t >= s)) throw PreconditionError("ControlPair::Q: requires s <= t");
  switch (kind) {
    case Kind::Linear:
      return c * (t - s);
    case Kind::Power:
      return c * std::pow(t - s, theta);
    case Kind::Tabulated: {
      if (tab_times.size() < 2 || tab_times.size() != tab_values.size())
        throw std::invalid_argument("ControlPair: bad tabulated Q");
      PchipInterpolant f(tab_times, tab_values);
      return f(t - s);
    }
  }
  return 0.0;
}

bool ControlPair::superadditive_on_samples(double lo, double hi, int samples,
                                           unsigned seed) const {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (int i = 0; i < samples; ++i) {
    double a = dist(rng), b = dist(rng), c3 = dist(rng);
    double u = std::min({a, b, c3}), v = std::max({a, b, c3});
    double r = a + b + c3 - u - v;
    if (!(u < r && r < v)) continue;
    if (Q(u, r) + Q(r, v) > Q(u, v) * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

double envelope(double eta, double q_value) {
  if (eta < 0.0 || q_value < 0.0) throw std::domain_error("envelope: arguments must be >= 0");
  if (eta >= 1.0) throw CertificateError("envelope: no certificate for eta >= 1");
  if (eta == 0.0) return std::exp(q_value);
  return std::pow(1.0 - eta, -(1.0 + q_value / eta));
}

Certificate check_condition(const SeriesEngine& engine, const ControlPair& control,
                            const SpaceTimeGrid& grid, double tolerance) {
  grid.validate();
  Certificate cert;
  cert.control = control;
  double worst_slack = std::numeric_limits<double>::infinity();
  SeriesTable table = engine.eval_series(grid, 1);
  for (const auto& row : table.rows) {
    double k0 = row.terms[0].value, k1 = row.terms[1].value;
    if (k0 <= 0.0) continue;
    double slack = ((control.eta + control.Q(row.s, row.t)) * k0 - k1) / k0;
    if (slack < worst_slack) {
      worst_slack = slack;
      cert.worst = {row.s, row.t, row.x, row.y};
    }
  }
  cert.slack = worst_slack;
  cert.valid = worst_slack >= -tolerance;
  double horizon = grid.times.back() - grid.times.front();
  cert.envelope_at_horizon = control.eta < 1.0
                                 ? envelope(control.eta, control.Q(0.0, horizon))
                                 : std::numeric_limits<double>::infinity();
  return cert;
}

Certificate fit_affine_control(const SeriesEngine& engine, const SpaceTimeGrid& grid,
                               const std::vector<double>& eta_candidates) {
  grid.validate();
  for (double eta : eta_candidates)
    if (eta < 0.0 || eta >= 1.0)
      throw PreconditionError("fit_affine_control: eta candidates must lie in [0,1)");

  // The condition must hold between grid points too, so the slope is fitted on
  // a midpoint-doubled grid until the fit stabilizes (at most 3 doublings).
  auto fit_slopes = [&](const SeriesTable& tab) {
    std::vector<double> cs(eta_candidates.size(), 0.0);
    for (const auto& row : tab.rows) {
      double k0 = row.terms[0].value, k1 = row.terms[1].value;
      if (k0 <= 0.0) continue;
      double ratio = k1 / k0, gap = row.t - row.s;
      for (size_t i = 0; i < eta_candidates.size(); ++i)
        cs[i] = std::max(cs[i], (ratio - eta_candidates[i]) / gap);
    }
    return cs;
  };

  SpaceTimeGrid fine = grid;
  SeriesTable table = engine.eval_series(fine, 1);
  bool any_positive = false;
  for (const auto& row : table.rows)
    if (row.terms[0].value > 0.0) any_positive = true;
  if (!any_positive)
    throw NumericError("fit_affine_control: degenerate kernel, k0 vanishes on the whole grid");

  std::vector<double> cs = fit_slopes(table);
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<double> doubled;
    for (size_t i = 0; i + 1 < fine.times.size(); ++i) {
      doubled.push_back(fine.times[i]);
      doubled.push_back(0.5 * (fine.times[i] + fine.times[i + 1]));
    }
    doubled.push_back(fine.times.back());
    fine.times = std::move(doubled);
    table = engine.eval_series(fine, 1);
    std::vector<double> next = fit_slopes(table);
    bool moved = false;
    for (size_t i = 0; i < cs.size(); ++i)
      if (next[i] > cs[i] * 1.01 + 1e-300) moved = true;
    cs = std::move(next);
    if (!moved) break;
  }

  double horizon = grid.times.back() - grid.times.front();
  std::optional<Certificate> best;
  for (size_t ei = 0; ei < eta_candidates.size(); ++ei) {
    double eta = eta_candidates[ei];
    double c = cs[ei];
    ControlPair control;
    control.kind = ControlPair::Kind::Linear;
    control.eta = eta;
    control.c = c;
    Certificate cert;
    cert.control = control;
    cert.valid = true;
    cert.slack = 0.0;
    cert.envelope_at_horizon = envelope(eta, c * horizon);
    // recompute the worst slack for the report
    for (const auto& row : table.rows) {
      double k0 = row.terms[0].value, k1 = row.terms[1].value;
      if (k0 <= 0.0) continue;
      double slack = ((eta + control.Q(row.s, row.t)) * k0 - k1) / k0;
      if (slack < cert.slack) {
        cert.slack = slack;
        cert.worst = {row.s, row.t, row.x, row.y};
      }
    }
    if (!best || cert.envelope_at_horizon < best->envelope_at_horizon) best = cert;
  }
  return *best;
}

ChainReport verify_term_chain(const SeriesTable& table, const ControlPair& control) {
  ChainReport rep;
  for (const auto& row : table.rows) {
    double qst = control.Q(row.s, row.t);
    double product_bound = row.terms[0].value;
    double product_noise = row.terms[0].error;
    for (size_t n = 1; n < row.terms.size(); ++n) {
      double factor = control.eta + qst / double(n);
      double bound = row.terms[n - 1].value * factor;
      double noise = 10.0 * (row.terms[n].error + row.terms[n - 1].error * factor);
      double excess = row.terms[n].value - bound - noise;
      if (excess > 0.0) {
        rep.violations.push_back({row.s, row.t, row.x, row.y, int(n), excess});
        rep.worst_violation = std::max(rep.worst_violation, excess);
      }
      // product bound against k0
      product_bound *= factor;
      product_noise = product_noise * factor + row.terms[n].error;
      double pexcess = row.terms[n].value - product_bound - 10.0 * product_noise;
      if (pexcess > 0.0) {
        rep.violations.push_back({row.s, row.t, row.x, row.y, int(n), pexcess});
        rep.worst_violation = std::max(rep.worst_violation, pexcess);
      }
    }
  }
  return rep;
}

EnvelopeReport verify_envelope(const SeriesTable& table, const ControlPair& control) {
  if (control.eta >= 1.0) throw CertificateError("verify_envelope: requires eta < 1");
  EnvelopeReport rep;
  for (const auto& row : table.rows) {
    double k0 = row.terms[0].value;
    if (k0 <= 0.0) continue;
    double env = envelope(control.eta, control.Q(row.s, row.t));
    double ratio = row.sum / (k0 * env);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    double noise = 0.0;
    for (const auto& tv : row.terms) noise += tv.error;
    if (row.sum > k0 * env + 10.0 * noise) ++rep.violations;

    // certified tail: sum_{n>N} prod_{k<=n} (eta + Q/k), by direct products
    double qst = control.Q(row.s, row.t);
    double prod = 1.0;
    for (size_t k = 1; k < row.terms.size(); ++k) prod *= control.eta + qst / double(k);
    double tail = 0.0;
    for (size_t n = row.terms.size(); n < 100000; ++n) {
      prod *= control.eta + qst / double(n);
      tail += prod;
      if (prod < 1e-16) break;
    }
    rep.tail_bound = std::max(rep.tail_bound, tail);
  }
  return rep;
}

namespace {

ThreePResult three_p_pass(const KernelDensity& k, const std::vector<double>& times,
                          const std::vector<State>& states) {
  ThreePResult best;
  for (size_t i = 0; i < times.size(); ++i)
    for (size_t j = i + 1; j < times.size(); ++j)
      for (size_t l = j + 1; l < times.size(); ++l) {
        double s = times[i], u = times[j], t = times[l];
        for (const State& x : states)
          for (const State& y : states) {
            double direct = k(s, x, t, y);
            if (direct <= 0.0) {
              best.excluded += states.size();
              continue;
            }
            for (const State& z : states) {
              double ratio = std::min(k(s, x, u, z), k(u, z, t, y)) / direct;
              if (ratio > best.sup) {
                best.sup = ratio;
                best.s = s;
                best.u = u;
                best.t = t;
                best.x = x;
                best.z = z;
                best.y = y;
              }
            }
          }
      }
  return best;
}

template <typename T>
std::vector<T> with_midpoints(const std::vector<T>& v);

template <>
std::vector<double> with_midpoints(const std::vector<double>& v) {
  std::vector<double> out;
  for (size_t i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
    if (i + 1 < v.size()) out.push_back(0.5 * (v[i] + v[i + 1]));
  }
  return out;
}

template <>
std::vector<State> with_midpoints(const std::vector<State>& v) {
  if (v.size() < 2) return v;
  std::vector<State> out;
  for (size_t i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
    if (i + 1 < v.size())
      out.push_back(State{0.5 * (v[i].x + v[i + 1].x), 0.5 * (v[i].y + v[i + 1].y)});
  }
  return out;
}

}  // namespace

ThreePResult three_p_constant(const KernelDensity& k, const SpaceTimeGrid& grid,
                              int max_refinements) {
  grid.validate();
  if (grid.times.size() < 3)
    throw PreconditionError("three_p_constant: grid needs at least 3 times");
  std::vector<double> times = grid.times;
  std::vector<State> states = grid.states;
  ThreePResult cur = three_p_pass(k, times, states);
  for (int r = 0; r < max_refinements; ++r) {
    times = with_midpoints(times);
    states = with_midpoints(states);
    ThreePResult next = three_p_pass(k, times, states);
    next.refinements = r + 1;
    next.excluded += cur.excluded;
    bool settled = next.sup <= cur.sup * 1.01;
    cur = next;
    if (settled) break;
  }
  return cur;
}

std::map<double, double> kato_scan(const SeriesEngine& engine,
                                   const std::vector<double>& h_values,
                                   const SpaceTimeGrid& grid, KatoMode mode) {
  grid.validate();
  for (size_t i = 0; i + 1 < h_values.size(); ++i)
    if (!(h_values[i] > h_values[i + 1]) || h_values[i + 1] <= 0.0)
      throw PreconditionError("kato_scan: h values must be positive and decreasing");

  const auto& k = engine.kernel();
  const auto& q = engine.potential();
  auto nodes = engine.space().quad_nodes(engine.scheme().space);

  std::map<double, double> out;
  for (double h : h_values) out[h] = 0.0;

  for (const auto& pr : grid.pairs()) {
    double gap = pr.t - pr.s;
    double quantity = -1.0;
    for (double h : h_values) {
      if (!(gap < h)) continue;
      if (quantity < 0.0) {
        if (mode == KatoMode::Relative) {
          TermValue k1 = engine.eval_kn(1, pr.s, pr.x, pr.t, pr.y);
          double k0 = k(pr.s, pr.x, pr.t, pr.y);
          quantity = k0 > 0.0 ? k1.value / k0 : 0.0;
        } else {
          auto left = integrate_time(
              [&](double u) {
                double acc = 0.0;
                for (size_t m = 0; m < nodes.nodes.size(); ++m)
                  acc += nodes.weights[m] * k(pr.s, pr.x, u, nodes.nodes[m]) *
                         q(u, nodes.nodes[m]);
                return acc;
              },
              pr.s, pr.t, k.gamma(), 0.0, q.singular_times(), engine.scheme().time);
          auto right = integrate_time(
              [&](double u) {
                double acc = 0.0;
                for (size_t m = 0; m < nodes.nodes.size(); ++m)
                  acc += nodes.weights[m] * k(u, nodes.nodes[m], pr.t, pr.y) *
                         q(u, nodes.nodes[m]);
                return acc;
              },
              pr.s, pr.t, 0.0, k.gamma(), q.singular_times(), engine.scheme().time);
          quantity = left.value + right.value;
        }
      }
      out[h] = std::max(out[h], quantity);
    }
  }
  return out;
}

}  // namespace kpert
