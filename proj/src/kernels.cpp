#include "kpert/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kpert/special.hpp"

namespace kpert {

std::atomic<long>& kernel_eval_count() {
  static std::atomic<long> c{0};
  return c;
}

std::atomic<long>& forward_guard_violations() {
  static std::atomic<long> c{0};
  return c;
}

KernelDensity::KernelDensity(Eval eval, double gamma, std::string label)
    : eval_(std::move(eval)), gamma_(gamma), label_(std::move(label)) {
  if (gamma <= -1.0 || gamma > 0.0)
    throw std::domain_error("KernelDensity: gamma must lie in (-1, 0]");
}

double KernelDensity::operator()(double s, const State& x, double t, const State& y) const {
  if (!(t > s)) {
    forward_guard_violations().fetch_add(1, std::memory_order_relaxed);
    throw PreconditionError("KernelDensity: forward kernel evaluated at t <= s");
  }
  kernel_eval_count().fetch_add(1, std::memory_order_relaxed);
  return eval_(s, x, t, y);
}

double KernelDensity::tail_mass(double s, const State& x, double t, double radius) const {
  if (!tail_) return 0.0;
  return tail_(s, x, t, radius);
}

KernelDensity make_beta_kernel(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("make_beta_kernel: beta must lie in (0,1)");
  const double norm = 1.0 / gamma_fn(beta);
  KernelDensity k(
      [beta, norm](double s, const State&, double t, const State&) {
        return norm * std::pow(t - s, beta - 1.0);
      },
      beta - 1.0, "beta");
  return k;
}

KernelDensity make_gauss_kernel(int d) {
  if (d != 1 && d != 2) throw std::domain_error("make_gauss_kernel: dimension must be 1 or 2");
  KernelDensity k(
      [d](double s, const State& x, double t, const State& y) {
        double dt = t - s;
        double r2 = (x.x - y.x) * (x.x - y.x);
        if (d == 2) r2 += (x.y - y.y) * (x.y - y.y);
        return std::pow(4.0 * M_PI * dt, -0.5 * d) * std::exp(-r2 / (4.0 * dt));
      },
      0.0, d == 1 ? "gauss1d" : "gauss2d");
  k.set_claims_chapman_kolmogorov(true);
  k.set_tail_mass([d](double s, const State& x, double t, double radius) {
    double sigma = 2.0 * std::sqrt(t - s);  // std dev of the 4(t-s)/2 variance per axis
    double ctr = std::sqrt(x.x * x.x + (d == 2 ? x.y * x.y : 0.0));
    double margin = radius - ctr;
    if (margin <= 0.0) return 1.0;
    double one_axis = std::erfc(margin / sigma);  // both tails on one axis
    return std::min(1.0, d * one_axis);
  });
  return k;
}

KernelDensity make_cauchy_kernel() {
  KernelDensity k(
      [](double s, const State& x, double t, const State& y) {
        double dt = t - s;
        double dx = x.x - y.x;
        return dt / (M_PI * (dt * dt + dx * dx));
      },
      0.0, "cauchy");
  k.set_claims_chapman_kolmogorov(true);
  k.set_tail_mass([](double s, const State& x, double t, double radius) {
    double dt = t - s;
    double m = 1.0 - (std::atan((radius - x.x) / dt) + std::atan((radius + x.x) / dt)) / M_PI;
    return std::max(0.0, m);
  });
  return k;
}

Potential make_power_potential(double beta, double eps) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("make_power_potential: beta must lie in (0,1)");
  if (!(eps > 0.0 && eps <= beta))
    throw std::domain_error("make_power_potential: eps must lie in (0, beta]");
  Potential q(
      [beta, eps](double u, const State&) {
        if (u == 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(std::abs(u), eps - beta);
      },
      "power");
  if (eps < beta) q.add_singular_time(0.0, eps - beta);
  return q;
}

Potential make_constant_potential(double c) {
  if (c < 0.0) throw std::domain_error("make_constant_potential: c must be nonnegative");
  return Potential([c](double, const State&) { return c; }, "const");
}

namespace {

// Rectilinear multilinear interpolation over (s,x,t,y) tuples.
struct Table4 {
  std::vector<double> s, x, t, y;
  std::vector<double> v;  // s-major, then x, t, y
  double at(size_t is, size_t ix, size_t it, size_t iy) const {
    return v[((is * x.size() + ix) * t.size() + it) * y.size() + iy];
  }
};

size_t bracket(const std::vector<double>& g, double u, double& w) {
  if (u <= g.front()) {
    w = 0.0;
    return 0;
  }
  if (u >= g.back()) {
    w = 1.0;
    return g.size() - 2;
  }
  size_t i = std::upper_bound(g.begin(), g.end(), u) - g.begin() - 1;
  if (i >= g.size() - 1) i = g.size() - 2;
  w = (u - g[i]) / (g[i + 1] - g[i]);
  return i;
}

}  // namespace

KernelDensity make_tabulated_kernel(const std::string& csv_path, double gamma) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("make_tabulated_kernel: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("make_tabulated_kernel: empty file " + csv_path);

  std::set<double> ss, xs, ts, ys;
  std::map<std::array<double, 4>, double> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> key{};
    double val;
    char comma;
    std::stringstream ls(line);
    if (!(ls >> key[0] >> comma >> key[1] >> comma >> key[2] >> comma >> key[3] >> comma >> val))
      throw std::runtime_error("make_tabulated_kernel: malformed row: " + line);
    if (val < 0.0) throw std::domain_error("make_tabulated_kernel: negative kernel value");
    ss.insert(key[0]);
    xs.insert(key[1]);
    ts.insert(key[2]);
    ys.insert(key[3]);
    rows[key] = val;
  }

  auto tab = std::make_shared<Table4>();
  tab->s.assign(ss.begin(), ss.end());
  tab->x.assign(xs.begin(), xs.end());
  tab->t.assign(ts.begin(), ts.end());
  tab->y.assign(ys.begin(), ys.end());
  tab->v.resize(tab->s.size() * tab->x.size() * tab->t.size() * tab->y.size());
  size_t idx = 0;
  for (double a : tab->s)
    for (double b : tab->x)
      for (double c : tab->t)
        for (double d : tab->y) {
          auto it = rows.find({a, b, c, d});
          if (it == rows.end())
            throw std::runtime_error("make_tabulated_kernel: grid is not complete");
          tab->v[idx++] = it->second;
        }

  return KernelDensity(
      [tab](double s, const State& x, double t, const State& y) {
        double ws, wx, wt, wy;
        size_t is = bracket(tab->s, s, ws), ix = bracket(tab->x, x.x, wx),
               it = bracket(tab->t, t, wt), iy = bracket(tab->y, y.x, wy);
        double out = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d) {
                double w = (a ? ws : 1 - ws) * (b ? wx : 1 - wx) * (c ? wt : 1 - wt) *
                           (d ? wy : 1 - wy);
                out += w * tab->at(is + a, ix + b, it + c, iy + d);
              }
        return out;
      },
      gamma, "tabulated");
}

void SpaceTimeGrid::validate() const {
  if (times.size() < 2) throw std::invalid_argument("SpaceTimeGrid: need at least 2 times");
  for (size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("SpaceTimeGrid: times must be strictly increasing");
  if (states.empty()) throw std::invalid_argument("SpaceTimeGrid: states must be nonempty");
}

std::vector<SpaceTimeGrid::Pair> SpaceTimeGrid::pairs() const {
  validate();
  std::vector<Pair> out;
  for (size_t i = 0; i < times.size(); ++i)
    for (size_t j = i + 1; j < times.size(); ++j)
      for (const State& x : states)
        for (const State& y : states) out.push_back({times[i], times[j], x, y});
  return out;
}

double ck_residual(const KernelDensity& k, const SpaceTimeGrid& grid,
                   const QuadratureScheme& scheme) {
  if (!k.claims_chapman_kolmogorov())
    throw PreconditionError("ck_residual: kernel does not claim the Chapman-Kolmogorov identity");
  grid.validate();
  if (grid.times.size() < 3)
    throw PreconditionError("ck_residual: grid needs at least 3 distinct times");

  double worst = 0.0;
  for (size_t i = 0; i < grid.times.size(); ++i)
    for (size_t j = i + 1; j < grid.times.size(); ++j)
      for (size_t l = j + 1; l < grid.times.size(); ++l) {
        double s = grid.times[i], u = grid.times[j], t = grid.times[l];
        for (const State& x : grid.states)
          for (const State& y : grid.states) {
            double direct = k(s, x, t, y);
            if (direct <= 0.0) continue;
            double tail = k.tail_mass(s, x, u, grid.space.radius());
            auto rep = integrate_space(
                [&](const State& z) { return k(s, x, u, z) * k(u, z, t, y); }, grid.space,
                scheme.space, tail);
            worst = std::max(worst, std::abs(rep.value - direct) / direct);
          }
      }
  return worst;
}

}  // namespace kpert
