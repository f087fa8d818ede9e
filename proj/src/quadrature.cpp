#include "kpert/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "kpert/special.hpp"

namespace kpert {

namespace {

GaussRule golub_welsch_jacobi(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi: need at least one node");
  if (a <= -1.0 || b <= -1.0) throw NumericError("gauss_jacobi: exponents must exceed -1");

  Eigen::VectorXd diag(n), subdiag(n);
  subdiag[0] = 0.0;
  const double apb = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0)
      diag[k] = (b - a) / (apb + 2.0);
    else {
      double d = 2.0 * k + apb;
      diag[k] = (b * b - a * a) / (d * (d + 2.0));
    }
    if (k >= 1) {
      double bk;
      if (k == 1)
        bk = 4.0 * (1.0 + a) * (1.0 + b) / ((apb + 2.0) * (apb + 2.0) * (apb + 3.0));
      else {
        double d = 2.0 * k + apb;
        bk = 4.0 * k * (k + a) * (k + b) * (k + apb) / (d * d * (d + 1.0) * (d - 1.0));
      }
      subdiag[k] = std::sqrt(bk);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, subdiag.tail(n - 1));
  const double mu0 =
      std::exp((apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
               std::lgamma(apb + 2.0));

  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()[i];
    double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

struct RuleKey {
  int n;
  double a, b;
  bool operator<(const RuleKey& o) const {
    return std::tie(n, a, b) < std::tie(o.n, o.a, o.b);
  }
};

const GaussRule& cached_jacobi(int n, double a, double b) {
  static std::map<RuleKey, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto [it, inserted] = cache.try_emplace(RuleKey{n, a, b});
  if (inserted) it->second = golub_welsch_jacobi(n, a, b);
  return it->second;
}

// One Jacobi-weighted pass over (lo,hi) with left exponent p, right exponent r.
double jacobi_pass(const std::function<double(double)>& f, double lo, double hi, double p,
                   double r, int n, long& evals) {
  const GaussRule& rule = cached_jacobi(n, r, p);  // weight (1-x)^r (1+x)^p
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    double u = lo + half * (x + 1.0);
    if (u <= lo) u = std::nextafter(lo, hi);
    if (u >= hi) u = std::nextafter(hi, lo);
    double fu = f(u);
    ++evals;
    if (!std::isfinite(fu)) throw NumericError("integrate_time: non-finite integrand at interior node");
    // divide out the singular factors the Jacobi weight carries
    double g = fu;
    if (p != 0.0) g *= std::pow(u - lo, -p);
    if (r != 0.0) g *= std::pow(hi - u, -r);
    sum += rule.weights[i] * g;
  }
  return sum * std::pow(half, p + r + 1.0);
}

// Graded-mesh pass: panels accumulate toward both endpoints, Gauss-Legendre per
// panel except the two outermost, which carry the endpoint singularities and use
// the matching Jacobi weight.
double graded_pass(const std::function<double(double)>& f, double lo, double hi, double p,
                   double r, double sigma, int panels, int gl_nodes, long& evals) {
  const GaussRule& gl = cached_jacobi(gl_nodes, 0.0, 0.0);
  std::vector<double> pts;
  pts.reserve(2 * panels + 1);
  const double mid = 0.5 * (lo + hi);
  for (int j = 0; j <= panels; ++j)
    pts.push_back(lo + (mid - lo) * std::pow(double(j) / panels, sigma));
  for (int j = panels - 1; j >= 0; --j)
    pts.push_back(hi - (hi - mid) * std::pow(double(j) / panels, sigma));
  double sum = 0.0;
  for (size_t j = 0; j + 1 < pts.size(); ++j) {
    double a = pts[j], b = pts[j + 1];
    if (j == 0 && p != 0.0) {
      sum += jacobi_pass(f, a, b, p, 0.0, gl_nodes, evals);
      continue;
    }
    if (j + 2 == pts.size() && r != 0.0) {
      sum += jacobi_pass(f, a, b, 0.0, r, gl_nodes, evals);
      continue;
    }
    double half = 0.5 * (b - a);
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      double u = a + half * (gl.nodes[i] + 1.0);
      double fu = f(u);
      ++evals;
      if (!std::isfinite(fu))
        throw NumericError("integrate_time: non-finite integrand at interior node");
      sum += gl.weights[i] * half * fu;
    }
  }
  return sum;
}

double subinterval(const std::function<double(double)>& f, double lo, double hi, double p,
                   double r, const TimeRule& rule, bool coarse, long& evals) {
  if (rule.kind == TimeRule::Kind::JacobiWeighted) {
    int n = coarse ? std::max(4, rule.nodes / 2) : rule.nodes;
    return jacobi_pass(f, lo, hi, p, r, n, evals);
  }
  int panels = coarse ? std::max(2, rule.panels / 2) : rule.panels;
  return graded_pass(f, lo, hi, p, r, rule.grading, panels, rule.nodes, evals);
}

}  // namespace

GaussRule gauss_jacobi(int n, double a, double b) { return cached_jacobi(n, a, b); }

GaussRule gauss_legendre(int n) { return cached_jacobi(n, 0.0, 0.0); }

IntegrationReport integrate_time(const std::function<double(double)>& f, double s, double t,
                                 double a, double b,
                                 const std::vector<SingularPoint>& interior,
                                 const TimeRule& rule) {
  if (!(s < t)) throw PreconditionError("integrate_time: requires s < t");
  if (a <= -1.0 || b <= -1.0) throw NumericError("integrate_time: divergent endpoint exponent");

  // Partition at interior singular points; merge exponents at coinciding endpoints.
  struct Edge {
    double loc, exp_left, exp_right;  // exponents seen from the two adjacent subintervals
  };
  std::vector<Edge> edges{{s, 0.0, a}, {t, b, 0.0}};
  for (const auto& sp : interior) {
    if (sp.exponent <= -1.0) throw NumericError("integrate_time: divergent interior exponent");
    if (sp.location <= s || sp.location >= t) {
      // a singularity sitting on an endpoint folds into that endpoint's exponent
      if (sp.location == s) edges[0].exp_right += sp.exponent;
      if (sp.location == t) edges[1].exp_left += sp.exponent;
      continue;
    }
    edges.push_back({sp.location, sp.exponent, sp.exponent});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& u, const Edge& v) { return u.loc < v.loc; });
  if (edges.front().exp_right <= -1.0 || edges.back().exp_left <= -1.0)
    throw NumericError("integrate_time: divergent combined endpoint exponent");

  IntegrationReport rep;
  double fine = 0.0, coarse = 0.0;
  for (size_t j = 0; j + 1 < edges.size(); ++j) {
    double lo = edges[j].loc, hi = edges[j + 1].loc;
    double p = edges[j].exp_right, r = edges[j + 1].exp_left;
    fine += subinterval(f, lo, hi, p, r, rule, false, rep.evaluations);
    coarse += subinterval(f, lo, hi, p, r, rule, true, rep.evaluations);
  }
  rep.value = fine;
  // rounding floor keeps the estimate honest when both passes agree exactly
  rep.error = std::abs(fine - coarse) + 4e-16 * std::abs(fine);
  return rep;
}

}  // namespace kpert
