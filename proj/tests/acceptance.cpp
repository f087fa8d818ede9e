// Acceptance suite: one line per criterion, pass/fail, nonzero exit if any fail.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpert/analysis.hpp"
#include "kpert/kernels.hpp"
#include "kpert/series.hpp"
#include "kpert/special.hpp"
#include "kpert/weyl.hpp"

using namespace kpert;
using json = nlohmann::json;

namespace {

const State kO{0.0, 0.0};
int failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", idx, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

// Gaussian setup shared by criteria 2 and 5: desk-scale truncation.
struct GaussSetup {
  QuadratureScheme sch;
  RecursionPlan plan;
  StateSpace line = StateSpace::real_line(8.0, 121);
  GaussSetup() {
    sch.time.nodes = 24;
    sch.space.mesh = 121;
    plan.level_mesh = 24;
  }
};

void criterion1() {
  double worst = 0.0;
  for (double beta : {0.25, 0.5, 0.75}) {
    for (double q0 : {0.5, 1.0, 2.0}) {
      SeriesEngine eng(make_beta_kernel(beta), make_constant_potential(q0),
                       StateSpace::single_point());
      for (double dt : {0.25, 1.0, 4.0}) {
        auto origin = eng.prepare_origin(0.0, kO, dt, 8);
        for (int n = 0; n <= 8; ++n) {
          double want = beta_kernel_closed_form(beta, q0, n, 0.0, dt);
          double got = origin->term(n, dt, kO).value;
          worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
      }
    }
  }
  report(1, "beta-kernel closed-form oracle", worst <= 1e-6,
         "max relative error " + fmt(worst) + ", tolerance 1e-06");
}

void criterion2() {
  bool pass = true;
  std::string detail;
  {
    SeriesEngine eng(make_beta_kernel(0.5), make_constant_potential(1.0),
                     StateSpace::single_point());
    SpaceTimeGrid grid;
    grid.space = StateSpace::single_point();
    grid.times = {0.0, 0.5, 1.0};
    grid.states = {kO};
    double worst = 0.0, noise = 0.0;
    for (const auto& pr : grid.pairs()) {
      auto tv = eng.eval_kn(4, pr.s, pr.x, pr.t, pr.y);
      noise = std::max(noise, tv.error / tv.value);
    }
    for (int m = 0; m <= 3; ++m) worst = std::max(worst, eng.splitting_check(4, m, grid));
    pass = pass && worst <= 10.0 * std::max(noise, 1e-9);
    detail += "beta residual " + fmt(worst) + " vs noise " + fmt(noise);
  }
  {
    GaussSetup g;
    SeriesEngine eng(make_gauss_kernel(1), make_constant_potential(0.3), g.line, g.sch, g.plan);
    SpaceTimeGrid grid;
    grid.space = g.line;
    grid.times = {0.0, 0.6, 1.2};
    grid.states = {State{0.0}, State{0.8}};
    double worst = 0.0, noise = 0.0;
    for (const auto& pr : grid.pairs()) {
      auto tv = eng.eval_kn(3, pr.s, pr.x, pr.t, pr.y);
      noise = std::max(noise, tv.error / tv.value);
    }
    for (int m = 0; m <= 2; ++m) worst = std::max(worst, eng.splitting_check(3, m, grid));
    pass = pass && worst <= 10.0 * noise;
    detail += "; gauss residual " + fmt(worst) + " vs noise " + fmt(noise);
  }
  report(2, "splitting identity", pass, detail);
}

void criterion3() {
  bool pass = true;
  std::string detail;
  SpaceTimeGrid grid;
  grid.space = StateSpace::single_point();
  grid.times = {0.0, 0.5, 1.0, 1.5};
  grid.states = {kO};
  size_t neg_violations = 0;
  for (double beta : {0.25, 0.5, 0.75}) {
    SeriesEngine eng(make_beta_kernel(beta), make_constant_potential(1.0),
                     StateSpace::single_point());
    auto cert = fit_affine_control(eng, grid);
    if (!cert.valid) {
      pass = false;
      continue;
    }
    auto table = eng.eval_series(grid, 8);
    auto rep = verify_term_chain(table, cert.control);
    if (!rep.violations.empty()) pass = false;
    if (beta == 0.5) {
      ControlPair bad;
      bad.eta = 0.0;
      bad.c = 0.1 * std::sqrt(M_PI);
      neg_violations = verify_term_chain(table, bad).violations.size();
    }
  }
  pass = pass && neg_violations > 0;
  detail = "zero violations on fitted certificates; negative control found " +
           std::to_string(neg_violations);
  report(3, "theorem-3 term chain", pass, detail);
}

void criterion4() {
  double e1 = envelope(0.0, 1.0);
  double e2 = envelope(0.5, 0.0);
  double e3 = envelope(1e-3, 1.0);
  bool values = std::abs(e1 - std::exp(1.0)) <= 1e-12 && e2 == 2.0 &&
                std::abs(e3 - std::exp(1.0)) / std::exp(1.0) <= 2e-3;
  SeriesEngine eng(make_beta_kernel(0.5), make_constant_potential(1.0),
                   StateSpace::single_point());
  SpaceTimeGrid grid;
  grid.space = StateSpace::single_point();
  grid.times = {0.0, 0.5, 1.0, 1.5};
  grid.states = {kO};
  auto cert = fit_affine_control(eng, grid);
  auto table = eng.eval_series(grid, 8);
  auto rep = verify_envelope(table, cert.control);
  bool pass = values && cert.valid && rep.violations == 0;
  report(4, "comparability envelope", pass,
         "e=" + fmt(e1) + ", 2=" + fmt(e2) + ", worst ratio " + fmt(rep.worst_ratio));
}

void criterion5() {
  GaussSetup g;
  SeriesEngine eng(make_gauss_kernel(1), make_constant_potential(0.3), g.line, g.sch, g.plan);
  SpaceTimeGrid grid;
  grid.space = g.line;
  grid.times = {0.0, 1.0, 2.0};
  grid.states = {State{0.0}, State{1.0}};
  auto table = eng.eval_series(grid, 6);
  bool pass = true;
  double worst = 0.0;
  for (const auto& row : table.rows) {
    double bound = row.terms[0].value * std::exp(0.3 * (row.t - row.s));
    double noise = 0.0;
    for (const auto& tv : row.terms) noise += tv.error;
    worst = std::max(worst, row.sum / bound);
    if (row.sum > bound + 10.0 * noise + 1e-12) pass = false;
  }
  report(5, "gaussian exponential bound", pass, "worst ratio " + fmt(worst));
}

void criterion6() {
  bool pass = true;
  std::string detail;
  for (double beta : {0.25, 0.5, 0.75}) {
    SpaceTimeGrid grid;
    grid.space = StateSpace::single_point();
    for (int i = 0; i <= 16; ++i) grid.times.push_back(i / 16.0);
    grid.states = {kO};
    auto res = three_p_constant(make_beta_kernel(beta), grid);
    double want = std::pow(2.0, 1.0 - beta);
    bool mid = std::abs(res.u - (res.s + res.t) / 2.0) <= 1e-9 * (res.t - res.s);
    if (std::abs(res.sup - want) > 1e-9 || !mid) pass = false;
    if (beta == 0.5) detail = "beta sup " + fmt(res.sup);
  }
  SpaceTimeGrid cg;
  cg.space = StateSpace::real_line(10.0, 3);
  cg.times = {0.0, 1.0, 2.0};
  cg.states = {State{0.0}, State{5.0}, State{10.0}};
  auto rc = three_p_constant(make_gauss_kernel(1), cg, 0);
  pass = pass && rc.sup > 500.0;
  detail += "; gauss counterexample " + fmt(rc.sup);
  report(6, "3P constants", pass, detail);
}

void criterion7() {
  auto q = make_power_potential(0.5, 0.25);
  SeriesEngine eng(make_beta_kernel(0.5), q, StateSpace::single_point());
  SpaceTimeGrid grid;
  grid.space = StateSpace::single_point();
  for (int i = 0; i <= 32; ++i) grid.times.push_back(-1.0 + i / 16.0);
  grid.states = {kO};
  std::vector<double> hs = {1.0, 0.5, 0.25, 0.125};
  auto plain = kato_scan(eng, hs, grid, KatoMode::Plain);
  auto rel = kato_scan(eng, hs, grid, KatoMode::Relative);
  bool mono = plain.at(0.125) < plain.at(0.25) && plain.at(0.25) < plain.at(0.5) &&
              plain.at(0.5) < plain.at(1.0);
  bool bounded = true;
  for (double h : hs)
    if (rel.at(h) > std::pow(2.0, 0.5) * plain.at(h) * (1.0 + 1e-9)) bounded = false;
  report(7, "kato scans", mono && bounded,
         "plain sup at h=1: " + fmt(plain.at(1.0)) + ", monotone decrease " +
             (mono ? "yes" : "no"));
}

void criterion8() {
  QuadratureScheme sch;
  std::vector<double> s_grid;
  for (int i = 0; i <= 16; ++i) s_grid.push_back(-4.0 + 8.0 * i / 16.0);
  auto phi = make_bump(-1.0, 1.0);
  double worst = 0.0;
  for (double beta : {0.25, 0.5, 0.75})
    worst = std::max(worst, left_inverse_residual(phi, beta, s_grid, sch));
  QuadratureScheme coarse = sch, fine = sch;
  coarse.time.nodes = 8;
  fine.time.nodes = 16;
  double rc = left_inverse_residual(phi, 0.5, s_grid, coarse);
  double rf = left_inverse_residual(phi, 0.5, s_grid, fine);

  auto q = make_constant_potential(0.2);
  SeriesEngine eng(make_beta_kernel(0.5), q, StateSpace::single_point(), sch);
  SpaceTimeGrid grid;
  grid.space = StateSpace::single_point();
  for (int i = 0; i <= 7; ++i) grid.times.push_back(-4.0 + i);
  grid.states = {kO};
  auto cert = fit_affine_control(eng, grid);
  auto rep = perturbed_inverse_residual(phi, 0.5, q, cert, 12, s_grid, sch);

  bool pass = worst <= 1e-3 && rf <= rc / 4.0 && cert.valid && rep.residual <= 5e-3 &&
              rep.worst_envelope_ratio <= 1.0 + 1e-9;
  report(8, "weyl identities", pass,
         "left-inverse " + fmt(worst) + ", doubling factor " + fmt(rc / rf) + ", perturbed " +
             fmt(rep.residual) + ", envelope ratio " + fmt(rep.worst_envelope_ratio));
}

void criterion9() {
  std::string cli = KPERT_CLI_PATH;
  bool pass = true;
  std::string detail;
  for (int run = 1; run <= 2; ++run) {
    std::string cmd = cli + std::string(" reproduce-suite --out suite_run") +
                      std::to_string(run) + ".json";
    int rc = std::system(cmd.c_str());
    if (WEXITSTATUS(rc) != 0) {
      pass = false;
      detail = "suite run " + std::to_string(run) + " exited " +
               std::to_string(WEXITSTATUS(rc));
    }
  }
  if (pass) {
    auto load_payload = [](const std::string& path) {
      std::ifstream f(path);
      json rep = json::parse(f);
      rep.erase("wall_clock_ms");
      rep.erase("kernel_evaluations");  // counters accumulate, not part of the payload
      rep.erase("forward_guard_violations");
      return rep.dump();
    };
    std::string a = load_payload("suite_run1.json");
    std::string b = load_payload("suite_run2.json");
    pass = (a == b);
    detail = pass ? "payloads byte-identical across runs" : "payloads differ";
  }
  report(9, "reproduce-suite determinism", pass, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
