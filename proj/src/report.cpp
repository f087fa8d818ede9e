#include "kpert/report.hpp"

#include <cstdio>
#include <sstream>

namespace kpert {

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

json to_json(const SeriesTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json terms = json::array();
    for (size_t n = 0; n < r.terms.size(); ++n)
      terms.push_back({{"n", n}, {"value", r.terms[n].value}, {"err", r.terms[n].error}});
    rows.push_back({{"s", r.s},
                    {"x", r.x.x},
                    {"t", r.t},
                    {"y", r.y.x},
                    {"terms", std::move(terms)},
                    {"sum", r.sum},
                    {"divergence_flag", r.divergence_flag}});
  }
  return {{"order", table.order}, {"rows", std::move(rows)}};
}

std::string series_to_csv(const SeriesTable& table) {
  std::ostringstream os;
  os << "s,x,t,y,n,value,err\n";
  for (const auto& r : table.rows)
    for (size_t n = 0; n < r.terms.size(); ++n)
      os << fmt(r.s) << ',' << fmt(r.x.x) << ',' << fmt(r.t) << ',' << fmt(r.y.x) << ',' << n
         << ',' << fmt(r.terms[n].value) << ',' << fmt(r.terms[n].error) << '\n';
  return os.str();
}

json to_json(const Certificate& cert) {
  const char* kind = cert.control.kind == ControlPair::Kind::Linear    ? "linear"
                     : cert.control.kind == ControlPair::Kind::Power ? "power"
                                                                     : "tabulated";
  return {{"control",
           {{"kind", kind},
            {"eta", cert.control.eta},
            {"c", cert.control.c},
            {"theta", cert.control.theta}}},
          {"slack", cert.slack},
          {"valid", cert.valid},
          {"envelope_at_horizon", cert.envelope_at_horizon},
          {"worst", {{"s", cert.worst.s}, {"t", cert.worst.t}, {"x", cert.worst.x.x}, {"y", cert.worst.y.x}}}};
}

json to_json(const ChainReport& rep) {
  json v = json::array();
  for (const auto& viol : rep.violations)
    v.push_back({{"s", viol.s}, {"t", viol.t}, {"x", viol.x.x}, {"y", viol.y.x}, {"n", viol.n},
                 {"excess", viol.excess}});
  return {{"worst_violation", rep.worst_violation}, {"violations", std::move(v)}};
}

json to_json(const EnvelopeReport& rep) {
  return {{"worst_ratio", rep.worst_ratio},
          {"tail_bound", rep.tail_bound},
          {"violations", rep.violations}};
}

json to_json(const ThreePResult& rep) {
  return {{"sup", rep.sup},
          {"s", rep.s},
          {"u", rep.u},
          {"t", rep.t},
          {"x", rep.x.x},
          {"z", rep.z.x},
          {"y", rep.y.x},
          {"excluded", rep.excluded},
          {"refinements", rep.refinements}};
}

json to_json(const PerturbedInverseReport& rep) {
  return {{"residual", rep.residual},
          {"truncation_tail", rep.truncation_tail},
          {"worst_envelope_ratio", rep.worst_envelope_ratio}};
}

json kato_to_json(const std::map<double, double>& scan) {
  json arr = json::array();
  for (const auto& [h, v] : scan) arr.push_back({{"h", h}, {"sup", v}});
  return arr;
}

}  // namespace kpert
