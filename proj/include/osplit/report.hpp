#pragma once

// JSON and CSV forms of PowerCurve and RejectionReport. Outcome indices are
// 1-based in every serialized form.

#include <osplit/dataset.hpp>
#include <osplit/error.hpp>
#include <osplit/multitest.hpp>
#include <osplit/splitopt.hpp>

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace osplit {

using json = nlohmann::json;

namespace detail {

inline json one_based(const std::vector<std::size_t>& ids) {
  json a = json::array();
  for (std::size_t k : ids) a.push_back(k + 1);
  return a;
}

inline std::vector<std::size_t> zero_based(const json& a) {
  std::vector<std::size_t> ids;
  for (const auto& v : a) {
    const auto k = v.get<std::size_t>();
    if (k == 0) throw Error(ErrorCode::IndexOutOfRange, "outcome ids are 1-based");
    ids.push_back(k - 1);
  }
  return ids;
}

inline json pvalues_json(const PValueSet& ps) {
  return json{{"ids", one_based(ps.ids)}, {"values", ps.values}};
}

inline PValueSet pvalues_from_json(const json& j) {
  return PValueSet(zero_based(j.at("ids")), j.at("values").get<std::vector<double>>());
}

}  // namespace detail

inline json to_json(const PowerCurve& c) {
  return json{{"grid", c.grid},
              {"power", c.power},
              {"zeta_star", c.zeta_star},
              {"near_optimal", c.near_optimal},
              {"method", std::string(to_string(c.method))},
              {"gamma", c.gamma},
              {"alpha", c.alpha},
              {"m_used", c.m_used}};
}

inline PowerCurve power_curve_from_json(const json& j) {
  PowerCurve c;
  c.grid = j.at("grid").get<std::vector<double>>();
  c.power = j.at("power").get<std::vector<double>>();
  c.zeta_star = j.at("zeta_star").get<double>();
  c.near_optimal = j.at("near_optimal").get<std::vector<double>>();
  c.method = parse_method(j.at("method").get<std::string>());
  c.gamma = j.at("gamma").get<double>();
  c.alpha = j.value("alpha", 0.05);
  c.m_used = j.at("m_used").get<std::size_t>();
  return c;
}

inline json to_json(const RejectionReport& r) {
  return json{{"rejected", detail::one_based(r.rejected)},
              {"selected", detail::one_based(r.selected)},
              {"planning_pvalues", detail::pvalues_json(r.planning_pvalues)},
              {"analysis_pvalues", detail::pvalues_json(r.analysis_pvalues)},
              {"zeta", r.zeta},
              {"gamma", r.gamma},
              {"alpha", r.alpha},
              {"method", std::string(to_string(r.method))},
              {"seed", r.seed},
              {"n_planning", r.n_planning},
              {"n_analysis", r.n_analysis},
              {"planning_cutoff", r.planning_cutoff},
              {"analysis_cutoff", r.analysis_cutoff},
              {"outcome_names", r.outcome_names}};
}

inline RejectionReport rejection_report_from_json(const json& j) {
  RejectionReport r;
  r.rejected = detail::zero_based(j.at("rejected"));
  r.selected = detail::zero_based(j.at("selected"));
  r.planning_pvalues = detail::pvalues_from_json(j.at("planning_pvalues"));
  r.analysis_pvalues = detail::pvalues_from_json(j.at("analysis_pvalues"));
  r.zeta = j.at("zeta").get<double>();
  r.gamma = j.at("gamma").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.method = parse_method(j.at("method").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_planning = j.at("n_planning").get<std::size_t>();
  r.n_analysis = j.at("n_analysis").get<std::size_t>();
  r.planning_cutoff = j.at("planning_cutoff").get<std::size_t>();
  r.analysis_cutoff = j.at("analysis_cutoff").get<std::size_t>();
  r.outcome_names = j.value("outcome_names", std::vector<std::string>{});
  return r;
}

/// One row per grid point: zeta, power, near-optimal flag.
inline std::string power_curve_csv(const PowerCurve& c) {
  std::ostringstream os;
  os << "zeta,power,near_optimal\n";
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    const bool near =
        std::find(c.near_optimal.begin(), c.near_optimal.end(), c.grid[g]) != c.near_optimal.end();
    os << csv::format_double(c.grid[g]) << ',' << csv::format_double(c.power[g]) << ','
       << (near ? 1 : 0) << '\n';
  }
  return os.str();
}

/// One row per outcome. Analysis p-values are blank for unselected outcomes.
inline std::string rejection_report_csv(const RejectionReport& r) {
  std::ostringstream os;
  os << "outcome,name,planning_p,selected,analysis_p,rejected\n";
  const std::size_t K = r.planning_pvalues.size();
  for (std::size_t k = 0; k < K; ++k) {
    auto in = [k](const std::vector<std::size_t>& v) {
      return std::find(v.begin(), v.end(), k) != v.end();
    };
    std::string anal;
    for (std::size_t t = 0; t < r.analysis_pvalues.size(); ++t)
      if (r.analysis_pvalues.ids[t] == k) anal = csv::format_double(r.analysis_pvalues.values[t]);
    const std::string name = k < r.outcome_names.size() ? r.outcome_names[k] : std::string();
    os << (k + 1) << ',' << csv::quote(name) << ','
       << csv::format_double(r.planning_pvalues.values[k]) << ',' << (in(r.selected) ? 1 : 0)
       << ',' << anal << ',' << (in(r.rejected) ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace osplit
