#ifndef FACT2K_TOOLS_JSON_REPORT_HPP
#define FACT2K_TOOLS_JSON_REPORT_HPP

// Report serialization. Keys are part of the tool's public interface and are
// documented in the README; every report is a pure function of (inputs, seed)
// so repeated runs emit identical bytes.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "fact2k/design.hpp"
#include "fact2k/verify.hpp"

namespace fact2k::cli {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline ordered_json to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ordered_json to_json(const CheckResult& c) {
  return ordered_json{{"name", c.name},
                      {"discrepancy", c.discrepancy},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}};
}

inline ordered_json to_json(const std::vector<CheckResult>& checks) {
  ordered_json arr = ordered_json::array();
  for (const CheckResult& c : checks) arr.push_back(to_json(c));
  return arr;
}

inline ordered_json labels_json(int k) {
  ordered_json arr = ordered_json::array();
  for (const EffectLabel& l : effect_labels(k)) arr.push_back(l.str());
  return arr;
}

inline ordered_json to_json(const InstanceSummary& s) {
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx",
                static_cast<unsigned long long>(s.fingerprint));
  return ordered_json{{"k", s.k},
                      {"n_units", s.n_units},
                      {"group_sizes", s.group_sizes},
                      {"data_fingerprint", fp}};
}

inline ordered_json to_json(const OracleReport& r, int k,
                            const std::vector<int>& group_sizes) {
  int n_units = 0;
  for (int nj : group_sizes) n_units += nj;
  return ordered_json{
      {"command", "oracle"},
      {"k", k},
      {"n_units", n_units},
      {"group_sizes", group_sizes},
      {"assignment_count", r.assignment_count},
      {"effect_labels", labels_json(k)},
      {"population_effects", to_json(r.population_effect_vector)},
      {"mean_estimate", to_json(r.mean_estimate)},
      {"empirical_covariance", to_json(r.empirical_covariance)},
      {"true_covariance", to_json(r.true_covariance)},
      {"mean_neymanian_covariance", to_json(r.mean_neymanian_covariance)},
      {"bias_matrix", to_json(r.bias_matrix)},
      {"checks", to_json(r.discrepancies)},
      {"all_pass", r.all_pass()},
  };
}

inline ordered_json to_json(const FuzzReport& r) {
  ordered_json out{
      {"command", "verify"},
      {"mode", "fuzz"},
      {"config",
       {{"k_max", r.config.k_max},
        {"instances", r.config.instances},
        {"seed", r.config.seed},
        {"balanced", r.config.balanced},
        {"outcome_distribution",
         r.config.continuous ? "uniform real in [-9, 9)"
                             : "uniform integer in [-9, 9]"}}},
      {"instances_run", r.instances_run},
      {"worst_case_checks", to_json(r.worst)},
      {"failures", r.failures},
      {"all_pass", r.all_pass()},
  };
  if (r.he_hw_gap_applicable) {
    out["he_hw_full_matrix_gap"] = r.he_hw_full_gap;
  }
  out["provenance"] = {{"rng", kRngAlgorithm}};
  return out;
}

}  // namespace fact2k::cli

#endif  // FACT2K_TOOLS_JSON_REPORT_HPP
