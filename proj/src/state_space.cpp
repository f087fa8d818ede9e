#include "kpert/state_space.hpp"

#include <cmath>
#include <stdexcept>

namespace kpert {

StateSpace StateSpace::single_point() {
  StateSpace s;
  s.kind_ = Kind::SinglePoint;
  return s;
}

StateSpace StateSpace::interval(double lo, double hi, int mesh) {
  if (!(lo < hi)) throw std::domain_error("StateSpace::interval: requires lo < hi");
  if (mesh < 2) throw std::domain_error("StateSpace::interval: mesh must be >= 2");
  StateSpace s;
  s.kind_ = Kind::Interval;
  s.lo_ = lo;
  s.hi_ = hi;
  s.mesh_ = mesh;
  return s;
}

StateSpace StateSpace::real_line(double radius, int mesh) {
  if (!(radius > 0)) throw std::domain_error("StateSpace::real_line: radius must be positive");
  if (mesh < 2) throw std::domain_error("StateSpace::real_line: mesh must be >= 2");
  StateSpace s;
  s.kind_ = Kind::RealLine;
  s.lo_ = -radius;
  s.hi_ = radius;
  s.radius_ = radius;
  s.mesh_ = mesh;
  return s;
}

StateSpace StateSpace::plane(double radius, int mesh) {
  if (!(radius > 0)) throw std::domain_error("StateSpace::plane: radius must be positive");
  if (mesh < 2) throw std::domain_error("StateSpace::plane: mesh must be >= 2");
  StateSpace s;
  s.kind_ = Kind::Plane;
  s.lo_ = -radius;
  s.hi_ = radius;
  s.radius_ = radius;
  s.mesh_ = mesh;
  return s;
}

namespace {

// 1d abscissas and weights over [lo,hi]
void line_nodes(double lo, double hi, int mesh, const SpaceRule& rule,
                std::vector<double>& xs, std::vector<double>& ws) {
  if (rule.kind == SpaceRule::Kind::Trapezoid) {
    int n = std::max(mesh, 2);
    double h = (hi - lo) / (n - 1);
    xs.resize(n);
    ws.resize(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = lo + i * h;
      ws[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
  } else {
    GaussRule gl = gauss_legendre(rule.nodes_per_panel);
    xs.clear();
    ws.clear();
    double ph = (hi - lo) / rule.panels;
    for (int p = 0; p < rule.panels; ++p) {
      double a = lo + p * ph;
      for (size_t i = 0; i < gl.nodes.size(); ++i) {
        xs.push_back(a + 0.5 * ph * (gl.nodes[i] + 1.0));
        ws.push_back(0.5 * ph * gl.weights[i]);
      }
    }
  }
}

}  // namespace

StateSpace::NodeSet StateSpace::quad_nodes(const SpaceRule& rule) const {
  NodeSet out;
  if (kind_ == Kind::SinglePoint) {
    out.nodes.push_back(State{});
    out.weights.push_back(1.0);
    return out;
  }
  std::vector<double> xs, ws;
  line_nodes(lo_, hi_, mesh_, rule, xs, ws);
  if (kind_ != Kind::Plane) {
    for (size_t i = 0; i < xs.size(); ++i) {
      out.nodes.push_back(State{xs[i], 0.0});
      out.weights.push_back(ws[i]);
    }
  } else {
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = 0; j < xs.size(); ++j) {
        out.nodes.push_back(State{xs[i], xs[j]});
        out.weights.push_back(ws[i] * ws[j]);
      }
  }
  return out;
}

IntegrationReport integrate_space(const std::function<double(const State&)>& g,
                                  const StateSpace& space, const SpaceRule& rule,
                                  double tail_bound) {
  IntegrationReport rep;
  if (space.kind() == StateSpace::Kind::SinglePoint) {
    rep.value = g(State{});
    rep.evaluations = 1;
    if (!std::isfinite(rep.value)) throw NumericError("integrate_space: non-finite integrand");
    return rep;
  }
  auto ns = space.quad_nodes(rule);
  double fine = 0.0, coarse = 0.0;
  for (size_t i = 0; i < ns.nodes.size(); ++i) {
    double v = g(ns.nodes[i]);
    ++rep.evaluations;
    if (!std::isfinite(v)) throw NumericError("integrate_space: non-finite integrand at node");
    fine += ns.weights[i] * v;
    if (i % 2 == 0) coarse += 2.0 * ns.weights[i] * v;  // crude half-density comparison
  }
  rep.value = fine;
  rep.error = std::abs(fine - coarse) + tail_bound;
  return rep;
}

}  // namespace kpert
