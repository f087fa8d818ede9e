#ifndef KPERT_REPORT_HPP
#define KPERT_REPORT_HPP

#include <map>
#include <string>

#include <json.hpp>

#include "kpert/analysis.hpp"
#include "kpert/series.hpp"
#include "kpert/weyl.hpp"

namespace kpert {

using json = nlohmann::json;

json to_json(const SeriesTable& table);
json to_json(const Certificate& cert);
json to_json(const ChainReport& rep);
json to_json(const EnvelopeReport& rep);
json to_json(const ThreePResult& rep);
json to_json(const PerturbedInverseReport& rep);
json kato_to_json(const std::map<double, double>& scan);

/// CSV with columns s,x,t,y,n,value,err in lexicographic (s,t,x,y,n) order.
std::string series_to_csv(const SeriesTable& table);

}  // namespace kpert

#endif
