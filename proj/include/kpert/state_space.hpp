#ifndef KPERT_STATE_SPACE_HPP
#define KPERT_STATE_SPACE_HPP

#include <functional>
#include <vector>

#include "kpert/quadrature.hpp"

namespace kpert {

/// A point of the state space. Second coordinate is used on the plane only.
struct State {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const State& a, const State& b) { return a.x == b.x && a.y == b.y; }

/// State space with its reference measure: counting measure on a single point,
/// Lebesgue on an interval, on a truncated real line, or a truncated plane.
class StateSpace {
 public:
  enum class Kind { SinglePoint, Interval, RealLine, Plane };

  static StateSpace single_point();
  static StateSpace interval(double lo, double hi, int mesh);
  static StateSpace real_line(double radius, int mesh);
  static StateSpace plane(double radius, int mesh);

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double radius() const { return radius_; }
  int mesh() const { return mesh_; }
  int dim() const { return kind_ == Kind::Plane ? 2 : 1; }

  struct NodeSet {
    std::vector<State> nodes;
    std::vector<double> weights;
  };
  /// Quadrature nodes and weights for integration against the reference measure
  /// over the (truncated) domain. SinglePoint gives one node of weight 1.
  NodeSet quad_nodes(const SpaceRule& rule) const;

 private:
  StateSpace() = default;
  Kind kind_ = Kind::SinglePoint;
  double lo_ = 0.0, hi_ = 0.0, radius_ = 0.0;
  int mesh_ = 0;
};

/// Integrates g over the truncated state space; tail_bound is added to the
/// error estimate (supplied by the caller from kernel metadata).
IntegrationReport integrate_space(const std::function<double(const State&)>& g,
                                  const StateSpace& space, const SpaceRule& rule,
                                  double tail_bound = 0.0);

}  // namespace kpert

#endif
