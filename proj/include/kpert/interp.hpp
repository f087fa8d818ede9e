#ifndef KPERT_INTERP_HPP
#define KPERT_INTERP_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kpert {

/// Monotone (Fritsch-Carlson) cubic Hermite interpolant on a strictly
/// increasing abscissa grid. Constant extrapolation outside the grid.
class PchipInterpolant {
 public:
  PchipInterpolant() = default;
  PchipInterpolant(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    size_t n = x_.size();
    if (n != y_.size() || n < 2) throw std::invalid_argument("PchipInterpolant: bad sizes");
    d_.resize(n);
    std::vector<double> h(n - 1), delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      if (!(h[i] > 0)) throw std::invalid_argument("PchipInterpolant: abscissas not increasing");
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
      d_[0] = d_[1] = delta[0];
    } else {
      for (size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0)
          d_[i] = 0.0;
        else {
          double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
          d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
      }
      d_[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
      d_[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
  }

  /// Bracket lookup, shareable across interpolants on the same abscissas:
  /// -1 below the grid, -2 above, otherwise the interval index.
  int locate(double u) const {
    if (u <= x_.front()) return -1;
    if (u >= x_.back()) return -2;
    size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      (x_[mid] <= u ? lo : hi) = mid;
    }
    return int(lo);
  }

  double eval_at(int loc, double u) const {
    if (loc == -1) return y_.front();
    if (loc == -2) return y_.back();
    size_t lo = size_t(loc);
    double h = x_[lo + 1] - x_[lo];
    double t = (u - x_[lo]) / h;
    double t2 = t * t, t3 = t2 * t;
    return y_[lo] * (2 * t3 - 3 * t2 + 1) + h * d_[lo] * (t3 - 2 * t2 + t) +
           y_[lo + 1] * (-2 * t3 + 3 * t2) + h * d_[lo + 1] * (t3 - t2);
  }

  double operator()(double u) const { return eval_at(locate(u), u); }

  bool empty() const { return x_.empty(); }

 private:
  static double edge_slope(double h0, double h1, double del0, double del1) {
    double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (d * del0 <= 0.0) return 0.0;
    if (del0 * del1 < 0.0 && std::abs(d) > 3.0 * std::abs(del0)) return 3.0 * del0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace kpert

#endif
