// kpert: batch front end. Parses an experiment config, dispatches to the
// library, and emits a deterministic JSON/CSV report.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpert/analysis.hpp"
#include "kpert/errors.hpp"
#include "kpert/kernels.hpp"
#include "kpert/report.hpp"
#include "kpert/series.hpp"
#include "kpert/weyl.hpp"

#ifndef KPERT_VERSION
#define KPERT_VERSION "0.0.0-unknown"
#endif

namespace {

using json = nlohmann::json;
using namespace kpert;

// Exit codes, per the interface contract.
constexpr int kExitConfig = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitCertificate = 5;
constexpr int kExitViolation = 6;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required config key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

KernelDensity parse_kernel(const json& cfg) {
  if (!cfg.contains("kernel")) throw ConfigError("missing 'kernel' section");
  const json& k = cfg.at("kernel");
  auto name = require<std::string>(k, "name");
  if (name == "beta") return make_beta_kernel(require<double>(k, "beta"));
  if (name == "gauss") return make_gauss_kernel(get_or<int>(k, "d", 1));
  if (name == "cauchy") return make_cauchy_kernel();
  if (name == "tabulated")
    return make_tabulated_kernel(require<std::string>(k, "path"), get_or<double>(k, "gamma", 0.0));
  throw ConfigError("unknown kernel '" + name + "'");
}

Potential parse_potential(const json& cfg) {
  if (!cfg.contains("potential")) return make_constant_potential(0.0);
  const json& p = cfg.at("potential");
  auto name = require<std::string>(p, "name");
  if (name == "constant") return make_constant_potential(require<double>(p, "c"));
  if (name == "power")
    return make_power_potential(require<double>(p, "beta"), require<double>(p, "eps"));
  throw ConfigError("unknown potential '" + name + "'");
}

StateSpace parse_space(const json& cfg) {
  if (!cfg.contains("space")) return StateSpace::single_point();
  const json& sp = cfg.at("space");
  auto kind = require<std::string>(sp, "kind");
  if (kind == "single_point") return StateSpace::single_point();
  if (kind == "interval")
    return StateSpace::interval(require<double>(sp, "lo"), require<double>(sp, "hi"),
                                get_or<int>(sp, "mesh", 201));
  if (kind == "real_line")
    return StateSpace::real_line(require<double>(sp, "radius"), get_or<int>(sp, "mesh", 201));
  if (kind == "plane")
    return StateSpace::plane(require<double>(sp, "radius"), get_or<int>(sp, "mesh", 41));
  throw ConfigError("unknown state space '" + kind + "'");
}

std::vector<State> parse_states(const json& arr) {
  std::vector<State> out;
  for (const auto& e : arr) {
    if (e.is_number()) {
      out.push_back({e.get<double>(), 0.0});
    } else if (e.is_array() && (e.size() == 1 || e.size() == 2)) {
      out.push_back({e[0].get<double>(), e.size() == 2 ? e[1].get<double>() : 0.0});
    } else {
      throw ConfigError("grid states must be numbers or [x] / [x,y] arrays");
    }
  }
  return out;
}

SpaceTimeGrid parse_grid(const json& cfg, const StateSpace& space) {
  if (!cfg.contains("grid")) throw ConfigError("missing 'grid' section");
  const json& g = cfg.at("grid");
  SpaceTimeGrid grid;
  grid.space = space;
  grid.times = require<std::vector<double>>(g, "times");
  grid.states = g.contains("states") ? parse_states(g.at("states"))
                                     : std::vector<State>{State{0.0, 0.0}};
  try {
    grid.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
  return grid;
}

QuadratureScheme parse_scheme(const json& cfg) {
  QuadratureScheme sch;
  if (!cfg.contains("quadrature")) return sch;
  const json& q = cfg.at("quadrature");
  if (q.contains("time")) {
    const json& t = q.at("time");
    auto kind = get_or<std::string>(t, "kind", "jacobi");
    if (kind == "jacobi")
      sch.time.kind = TimeRule::Kind::JacobiWeighted;
    else if (kind == "graded")
      sch.time.kind = TimeRule::Kind::GradedMesh;
    else
      throw ConfigError("unknown time rule '" + kind + "'");
    sch.time.nodes = get_or<int>(t, "nodes", sch.time.nodes);
    sch.time.panels = get_or<int>(t, "panels", sch.time.panels);
    sch.time.grading = get_or<double>(t, "grading", sch.time.grading);
  }
  if (q.contains("space")) {
    const json& s = q.at("space");
    auto kind = get_or<std::string>(s, "kind", "trapezoid");
    if (kind == "trapezoid")
      sch.space.kind = SpaceRule::Kind::Trapezoid;
    else if (kind == "gauss")
      sch.space.kind = SpaceRule::Kind::GaussLegendre;
    else
      throw ConfigError("unknown space rule '" + kind + "'");
    sch.space.mesh = get_or<int>(s, "mesh", sch.space.mesh);
    sch.space.nodes_per_panel = get_or<int>(s, "nodes_per_panel", sch.space.nodes_per_panel);
    sch.space.panels = get_or<int>(s, "panels", sch.space.panels);
  }
  sch.rel_tol = get_or<double>(q, "rel_tol", sch.rel_tol);
  return sch;
}

RecursionPlan parse_plan(const json& cfg, int threads) {
  RecursionPlan plan;
  plan.threads = threads;
  if (!cfg.contains("plan")) return plan;
  const json& p = cfg.at("plan");
  plan.max_order = get_or<int>(p, "max_order", plan.max_order);
  plan.level_mesh = get_or<int>(p, "level_mesh", plan.level_mesh);
  plan.level_grading = get_or<double>(p, "level_grading", plan.level_grading);
  plan.memoize = get_or<bool>(p, "memoize", plan.memoize);
  return plan;
}

ControlPair parse_control(const json& c) {
  ControlPair ctl;
  ctl.eta = get_or<double>(c, "eta", 0.0);
  ctl.c = get_or<double>(c, "c", 0.0);
  ctl.theta = get_or<double>(c, "theta", 1.0);
  auto kind = get_or<std::string>(c, "kind", ctl.theta == 1.0 ? "linear" : "power");
  if (kind == "linear")
    ctl.kind = ControlPair::Kind::Linear;
  else if (kind == "power")
    ctl.kind = ControlPair::Kind::Power;
  else
    throw ConfigError("unknown control kind '" + kind + "'");
  return ctl;
}

json control_to_json(const ControlPair& ctl) {
  return {{"kind", ctl.kind == ControlPair::Kind::Linear ? "linear" : "power"},
          {"eta", ctl.eta},
          {"c", ctl.c},
          {"theta", ctl.theta}};
}

Certificate obtain_certificate(const json& cfg, const SeriesEngine& eng,
                               const SpaceTimeGrid& grid) {
  if (cfg.contains("control")) {
    return check_condition(eng, parse_control(cfg.at("control")), grid);
  }
  auto etas = get_or<std::vector<double>>(cfg, "eta_candidates",
                                          {0.0, 0.05, 0.1, 0.25, 0.5});
  return fit_affine_control(eng, grid, etas);
}

json certificate_to_json_full(const Certificate& cert) {
  json j = to_json(cert);
  j["control"] = control_to_json(cert.control);
  return j;
}

// Applies --override key.path=value into the config tree. The value is parsed
// as JSON when possible, else taken as a string.
void apply_override(json& cfg, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be KEY=VALUE: " + spec);
  std::string path = spec.substr(0, eq), text = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty override path");
  for (size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
}

struct CommandResult {
  json payload;
  int exit_code = 0;
};

CommandResult run_command(const json& cfg, const std::string& command, int threads,
                          unsigned seed) {
  CommandResult res;
  if (command == "ck-check") {
    auto k = parse_kernel(cfg);
    auto space = parse_space(cfg);
    auto grid = parse_grid(cfg, space);
    auto sch = parse_scheme(cfg);
    double r = ck_residual(k, grid, sch);
    double tol = get_or<double>(cfg, "ck_tolerance", 1e-6);
    res.payload = {{"kernel", k.label()}, {"max_relative_residual", r}, {"tolerance", tol}};
    if (r > tol) res.exit_code = kExitViolation;
    return res;
  }

  if (command == "threep") {
    auto k = parse_kernel(cfg);
    auto space = parse_space(cfg);
    auto grid = parse_grid(cfg, space);
    auto r = three_p_constant(k, grid);
    res.payload = to_json(r);
    res.payload["kernel"] = k.label();
    return res;
  }

  if (command == "weyl") {
    const json& w = cfg.contains("weyl") ? cfg.at("weyl") : json::object();
    double beta = require<double>(w, "beta");
    auto support = get_or<std::vector<double>>(w, "support", {-1.0, 1.0});
    if (support.size() != 2) throw ConfigError("weyl.support must be [a,b]");
    auto s_grid = require<std::vector<double>>(w, "s_grid");
    auto sch = parse_scheme(cfg);
    auto phi = make_bump(support[0], support[1]);
    double r = left_inverse_residual(phi, beta, s_grid, sch);
    res.payload = {{"beta", beta},
                   {"support", support},
                   {"normalized_residual", r},
                   {"time_nodes", sch.time.nodes}};
    return res;
  }

  if (command == "perturbed-weyl") {
    const json& w = cfg.contains("weyl") ? cfg.at("weyl") : json::object();
    double beta = require<double>(w, "beta");
    auto support = get_or<std::vector<double>>(w, "support", {-1.0, 1.0});
    if (support.size() != 2) throw ConfigError("weyl.support must be [a,b]");
    auto s_grid = require<std::vector<double>>(w, "s_grid");
    int N = get_or<int>(w, "truncation", get_or<int>(cfg, "truncation", 12));
    auto sch = parse_scheme(cfg);
    auto plan = parse_plan(cfg, threads);
    if (plan.max_order < N) plan.max_order = N;
    auto q = parse_potential(cfg);
    auto phi = make_bump(support[0], support[1]);

    // Certificate for the one-point beta-kernel engine on a gap-spanning grid.
    auto k = make_beta_kernel(beta);
    SeriesEngine eng(k, q, StateSpace::single_point(), sch, plan);
    SpaceTimeGrid cg;
    cg.space = StateSpace::single_point();
    double lo = *std::min_element(s_grid.begin(), s_grid.end());
    double hi = std::max(support[1], *std::max_element(s_grid.begin(), s_grid.end())) + 1.0;
    int nt = get_or<int>(w, "certificate_times", 7);
    for (int i = 0; i < nt; ++i) cg.times.push_back(lo + (hi - lo) * i / (nt - 1));
    cg.states = {State{0.0, 0.0}};
    auto cert = obtain_certificate(cfg, eng, cg);
    if (!cert.valid) {
      res.payload = {{"certificate", certificate_to_json_full(cert)}};
      res.exit_code = kExitCertificate;
      return res;
    }
    auto rep = perturbed_inverse_residual(phi, beta, q, cert, N, s_grid, sch, plan);
    res.payload = to_json(rep);
    res.payload["beta"] = beta;
    res.payload["truncation"] = N;
    res.payload["certificate"] = certificate_to_json_full(cert);
    return res;
  }

  // Remaining commands share an engine and a grid.
  auto k = parse_kernel(cfg);
  auto q = parse_potential(cfg);
  auto space = parse_space(cfg);
  auto grid = parse_grid(cfg, space);
  auto sch = parse_scheme(cfg);
  auto plan = parse_plan(cfg, threads);
  SeriesEngine eng(k, q, space, sch, plan);

  if (command == "series") {
    int N = get_or<int>(cfg, "truncation", 8);
    auto table = eng.eval_series(grid, N);
    res.payload = to_json(table);
    return res;
  }

  if (command == "certify") {
    auto cert = obtain_certificate(cfg, eng, grid);
    res.payload = certificate_to_json_full(cert);
    if (!cert.valid) res.exit_code = kExitCertificate;
    return res;
  }

  if (command == "chain") {
    int N = get_or<int>(cfg, "truncation", 8);
    auto cert = obtain_certificate(cfg, eng, grid);
    if (!cert.valid && !cfg.contains("control")) {
      res.payload = {{"certificate", certificate_to_json_full(cert)}};
      res.exit_code = kExitCertificate;
      return res;
    }
    auto table = eng.eval_series(grid, N);
    auto rep = verify_term_chain(table, cert.control);
    res.payload = to_json(rep);
    res.payload["control"] = control_to_json(cert.control);
    if (!rep.violations.empty()) res.exit_code = kExitViolation;
    return res;
  }

  if (command == "envelope") {
    int N = get_or<int>(cfg, "truncation", 8);
    auto cert = obtain_certificate(cfg, eng, grid);
    if (!cert.valid) {
      res.payload = {{"certificate", certificate_to_json_full(cert)}};
      res.exit_code = kExitCertificate;
      return res;
    }
    auto table = eng.eval_series(grid, N);
    auto rep = verify_envelope(table, cert.control);
    res.payload = to_json(rep);
    res.payload["certificate"] = certificate_to_json_full(cert);
    if (rep.violations > 0) res.exit_code = kExitViolation;
    return res;
  }

  if (command == "kato") {
    auto hs = get_or<std::vector<double>>(cfg, "h_values", {1.0, 0.5, 0.25, 0.125});
    auto mode_s = get_or<std::string>(cfg, "kato_mode", "both");
    json payload;
    if (mode_s == "relative" || mode_s == "both")
      payload["relative"] = kato_to_json(kato_scan(eng, hs, grid, KatoMode::Relative));
    if (mode_s == "plain" || mode_s == "both")
      payload["plain"] = kato_to_json(kato_scan(eng, hs, grid, KatoMode::Plain));
    if (payload.empty()) throw ConfigError("kato_mode must be relative, plain, or both");
    res.payload = payload;
    return res;
  }

  (void)seed;
  throw ConfigError("unknown command '" + command + "'");
}

json make_report(const json& cfg, const json& payload, double wall_ms) {
  return {{"config", cfg},
          {"version", KPERT_VERSION},
          {"payload", payload},
          {"wall_clock_ms", wall_ms},
          {"kernel_evaluations", kernel_eval_count().load()},
          {"forward_guard_violations", forward_guard_violations().load()}};
}

void emit(const json& report, const std::string& out_path, const std::string& format,
          const json& payload) {
  std::string text;
  if (format == "csv") {
    if (!payload.contains("rows"))
      throw ConfigError("csv format is only available for table-producing commands");
    SeriesTable table;
    table.order = payload.at("order").get<int>();
    for (const auto& r : payload.at("rows")) {
      SeriesRow row;
      row.s = r.at("s").get<double>();
      row.t = r.at("t").get<double>();
      row.x = {r.at("x").get<double>(), 0.0};
      row.y = {r.at("y").get<double>(), 0.0};
      for (const auto& tv : r.at("terms"))
        row.terms.push_back({tv.at("value").get<double>(), tv.at("err").get<double>()});
      table.rows.push_back(row);
    }
    text = series_to_csv(table);
  } else {
    text = report.dump(2) + "\n";
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw ConfigError("cannot open output file " + out_path);
    f << text;
  }
}

// ---------------------------------------------------------------------------
// reproduce-suite: fixed desk-scale configs mirroring the acceptance list.
// ---------------------------------------------------------------------------

struct SuiteItem {
  std::string name;
  bool pass = false;
  json detail;
};

json run_suite(int threads, int& exit_code) {
  std::vector<SuiteItem> items;
  QuadratureScheme sch;
  RecursionPlan plan;
  plan.threads = threads;

  {  // closed-form oracle for the one-point kernel
    SuiteItem it{"series-closed-form-oracle"};
    double worst = 0.0;
    for (double beta : {0.25, 0.5, 0.75}) {
      SeriesEngine eng(make_beta_kernel(beta), make_constant_potential(1.0),
                       StateSpace::single_point(), sch, plan);
      auto origin = eng.prepare_origin(0.0, State{}, 1.0, 8);
      for (int n = 0; n <= 8; ++n) {
        double got = origin->term(n, 1.0, State{}).value;
        double want = beta_kernel_closed_form(beta, 1.0, n, 0.0, 1.0);
        worst = std::max(worst, std::abs(got - want) / std::abs(want));
      }
    }
    it.pass = worst <= 1e-6;
    it.detail = {{"max_relative_error", worst}, {"tolerance", 1e-6}};
    items.push_back(it);
  }

  SpaceTimeGrid pg;
  pg.space = StateSpace::single_point();
  pg.times = {0.0, 0.5, 1.0, 1.5};
  pg.states = {State{}};

  {  // splitting identity
    SuiteItem it{"splitting-identity"};
    SeriesEngine eng(make_beta_kernel(0.5), make_constant_potential(1.0),
                     StateSpace::single_point(), sch, plan);
    double worst = 0.0;
    for (int m = 0; m <= 3; ++m) worst = std::max(worst, eng.splitting_check(4, m, pg));
    it.pass = worst <= 1e-6;
    it.detail = {{"max_relative_deviation", worst}, {"tolerance", 1e-6}};
    items.push_back(it);
  }

  {  // term chain with fitted control, plus the undersized negative control
    SuiteItem it{"term-chain"};
    SeriesEngine eng(make_beta_kernel(0.5), make_constant_potential(1.0),
                     StateSpace::single_point(), sch, plan);
    auto cert = fit_affine_control(eng, pg);
    auto table = eng.eval_series(pg, 8);
    auto rep = verify_term_chain(table, cert.control);
    ControlPair bad = cert.control;
    bad.c *= 0.05;
    bad.eta = 0.0;
    auto neg = verify_term_chain(table, bad);
    it.pass = cert.valid && rep.violations.empty() && !neg.violations.empty();
    it.detail = {{"violations", rep.violations.size()},
                 {"negative_control_violations", neg.violations.size()},
                 {"eta", cert.control.eta},
                 {"c", cert.control.c}};
    items.push_back(it);
  }

  {  // envelope closed-form values and entrywise bound
    SuiteItem it{"envelope"};
    double e1 = envelope(0.0, 1.0), e2 = envelope(0.5, 0.0), e3 = envelope(1e-3, 1.0);
    bool values = std::abs(e1 - std::exp(1.0)) <= 1e-12 && e2 == 2.0 &&
                  std::abs(e3 - std::exp(1.0)) / std::exp(1.0) <= 2e-3;
    SeriesEngine eng(make_beta_kernel(0.5), make_constant_potential(1.0),
                     StateSpace::single_point(), sch, plan);
    auto cert = fit_affine_control(eng, pg);
    auto table = eng.eval_series(pg, 8);
    auto rep = verify_envelope(table, cert.control);
    it.pass = values && cert.valid && rep.violations == 0;
    it.detail = {{"envelope_0_1", e1},
                 {"envelope_half_0", e2},
                 {"worst_ratio", rep.worst_ratio},
                 {"violations", rep.violations}};
    items.push_back(it);
  }

  {  // Gaussian bound k~_N <= k exp(0.3 (t-s))
    SuiteItem it{"gauss-exponential-bound"};
    auto k = make_gauss_kernel(1);
    QuadratureScheme gs = sch;
    gs.time.nodes = 24;
    gs.space.mesh = 161;
    RecursionPlan gp = plan;
    gp.level_mesh = 24;
    StateSpace line = StateSpace::real_line(8.0, 161);
    SeriesEngine eng(k, make_constant_potential(0.3), line, gs, gp);
    SpaceTimeGrid gg;
    gg.space = line;
    gg.times = {0.0, 1.0, 2.0};
    gg.states = {State{0.0}, State{1.0}};
    auto table = eng.eval_series(gg, 6);
    double worst = 0.0;
    bool ok = true;
    for (const auto& row : table.rows) {
      double bound = row.terms[0].value * std::exp(0.3 * (row.t - row.s));
      double noise = 0.0;
      for (const auto& tv : row.terms) noise += tv.error;
      worst = std::max(worst, row.sum / bound);
      if (row.sum > bound + 10.0 * noise + 1e-12) ok = false;
    }
    it.pass = ok;
    it.detail = {{"worst_ratio", worst}};
    items.push_back(it);
  }

  {  // 3P constant: exact for the one-point kernel, fails for the Gaussian
    SuiteItem it{"three-p"};
    SpaceTimeGrid tg;
    tg.space = StateSpace::single_point();
    for (int i = 0; i <= 8; ++i) tg.times.push_back(i / 8.0);
    tg.states = {State{}};
    auto r = three_p_constant(make_beta_kernel(0.5), tg);
    double want = std::pow(2.0, 0.5);
    auto gk = make_gauss_kernel(1);
    SpaceTimeGrid cg;
    cg.space = StateSpace::real_line(10.0, 3);
    cg.times = {0.0, 1.0, 2.0};
    cg.states = {State{-10.0}, State{0.0}, State{10.0}};
    auto rc = three_p_constant(gk, cg, 0);
    it.pass = std::abs(r.sup - want) <= 1e-6 && rc.sup > 500.0;
    it.detail = {{"beta_sup", r.sup}, {"gauss_counterexample_sup", rc.sup}};
    items.push_back(it);
  }

  {  // Kato scans for the power potential
    SuiteItem it{"kato-scans"};
    auto q = make_power_potential(0.5, 0.25);
    SeriesEngine eng(make_beta_kernel(0.5), q, StateSpace::single_point(), sch, plan);
    SpaceTimeGrid kg;
    kg.space = StateSpace::single_point();
    for (int i = 0; i <= 16; ++i) kg.times.push_back(-1.0 + i / 8.0);
    kg.states = {State{}};
    std::vector<double> hs = {1.0, 0.5, 0.25, 0.125};
    auto rel = kato_scan(eng, hs, kg, KatoMode::Relative);
    auto plain = kato_scan(eng, hs, kg, KatoMode::Plain);
    bool mono = true, bounded = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double h : hs) {
      if (plain.at(h) >= prev) mono = false;
      prev = plain.at(h);
      if (rel.at(h) > std::pow(2.0, 0.5) * plain.at(h) * (1.0 + 1e-9)) bounded = false;
    }
    it.pass = mono && bounded;
    it.detail = {{"plain", kato_to_json(plain)}, {"relative", kato_to_json(rel)}};
    items.push_back(it);
  }

  {  // Weyl left inverse and the perturbed identity
    SuiteItem it{"weyl-identity"};
    auto phi = make_bump(-1.0, 1.0);
    std::vector<double> s_grid;
    for (int i = 0; i <= 12; ++i) s_grid.push_back(-3.0 + 5.0 * i / 12.0);
    double worst = 0.0;
    for (double beta : {0.25, 0.5, 0.75})
      worst = std::max(worst, left_inverse_residual(phi, beta, s_grid, sch, plan));
    auto q = make_constant_potential(0.2);
    SeriesEngine eng(make_beta_kernel(0.5), q, StateSpace::single_point(), sch, plan);
    SpaceTimeGrid cg;
    cg.space = StateSpace::single_point();
    for (int i = 0; i <= 6; ++i) cg.times.push_back(-3.0 + 6.0 * i / 6.0);
    cg.states = {State{}};
    auto cert = fit_affine_control(eng, cg);
    RecursionPlan wp = plan;
    wp.max_order = 12;
    auto rep = perturbed_inverse_residual(phi, 0.5, q, cert, 12, s_grid, sch, wp);
    it.pass = worst <= 1e-3 && rep.residual <= 5e-3 && rep.worst_envelope_ratio <= 1.0;
    it.detail = {{"left_inverse_residual", worst},
                 {"perturbed_residual", rep.residual},
                 {"envelope_ratio", rep.worst_envelope_ratio}};
    items.push_back(it);
  }

  json matrix = json::array();
  bool all_pass = true;
  for (const auto& it : items) {
    matrix.push_back({{"item", it.name}, {"pass", it.pass}, {"detail", it.detail}});
    all_pass = all_pass && it.pass;
  }
  if (!all_pass) exit_code = kExitViolation;
  return {{"items", matrix}, {"all_pass", all_pass}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perturbation-series kernel toolkit"};
  std::string config_path, out_path, format = "json", command_arg;
  long seed = 0;
  int threads = 0;
  std::vector<std::string> overrides;
  app.add_option("command", command_arg,
                 "command override (series|certify|chain|envelope|threep|kato|weyl|"
                 "perturbed-weyl|ck-check|reproduce-suite)");
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_path, "output path (default stdout)");
  app.add_option("--format", format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", seed, "seed for randomized spot checks");
  app.add_option("--threads", threads, "worker threads (default: KPERT_THREADS or 1)");
  app.add_option("--override", overrides, "dotted-path config override KEY=VALUE");
  CLI11_PARSE(app, argc, argv);

  if (threads <= 0) {
    const char* env = std::getenv("KPERT_THREADS");
    threads = env ? std::atoi(env) : 1;
    if (threads <= 0) threads = 1;
  }

  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("cannot open config file " + config_path);
      try {
        cfg = json::parse(f);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
      }
    }
    for (const auto& ov : overrides) apply_override(cfg, ov);
    if (!command_arg.empty()) cfg["command"] = command_arg;
    if (!app.count("--seed") && !cfg.contains("seed")) cfg["seed"] = 0;
    if (app.count("--seed")) cfg["seed"] = seed;
    if (!cfg.contains("command")) throw ConfigError("no command given (flag or config)");
    auto command = cfg.at("command").get<std::string>();
    auto fmt = cfg.contains("format") && !app.count("--format")
                   ? cfg.at("format").get<std::string>()
                   : format;
    if (out_path.empty()) out_path = get_or<std::string>(cfg, "out", "");

    auto t0 = std::chrono::steady_clock::now();
    CommandResult cres;
    if (command == "reproduce-suite") {
      cres.payload = run_suite(threads, cres.exit_code);
    } else {
      cres = run_command(cfg, command, threads, (unsigned)cfg.at("seed").get<long>());
    }
    double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    emit(make_report(cfg, cres.payload, wall), out_path, fmt, cres.payload);
    return cres.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CertificateError& e) {
    std::cerr << "certificate error: " << e.what() << "\n";
    return kExitCertificate;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
