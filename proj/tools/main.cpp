// fact2k: design, assign, estimate, simulate, and certify 2^K factorial
// experiments under complete randomization.
//
// Exit codes: 0 success, 2 validation error, 3 check failure, 4 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fact2k/csv.hpp"
#include "fact2k/design.hpp"
#include "fact2k/estimators.hpp"
#include "fact2k/population.hpp"
#include "fact2k/verify.hpp"
#include "json_report.hpp"

namespace {

using namespace fact2k;
using fact2k::cli::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailure = 3;
constexpr int kExitIo = 4;

std::vector<int> parse_group_sizes(const std::string& csv, int k) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(field, &pos);
      if (pos != field.size()) throw std::invalid_argument(field);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::domain_error("malformed group size '" + field + "' in --n");
    }
  }
  const std::size_t expected = std::size_t{1} << k;
  if (out.size() != expected) {
    throw std::domain_error("n-vector length " + std::to_string(out.size()) +
                            " != 2^K = " + std::to_string(expected));
  }
  return out;
}

void warn_small_population(int k, long long n_units) {
  const long long recommended = 2ll << k;  // 2^{K+1}
  if (n_units < recommended) {
    std::cerr << "warning: N = " << n_units
              << " is below the recommended minimum of 2^(K+1) = "
              << recommended << " units for a 2^" << k << " design\n";
  }
}

void emit(const ordered_json& report, const std::string& json_path,
          const std::string& text_rendering) {
  if (json_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream out(json_path);
    if (!out) throw io_error("cannot open '" + json_path + "' for writing");
    out << report.dump(2) << '\n';
    if (!text_rendering.empty()) std::cout << text_rendering;
  }
}

// ---- design ---------------------------------------------------------------

int run_design(int k, const std::string& format) {
  const ModelMatrix m = build_model_matrix(k);
  if (format == "csv") {
    for (int c = 0; c < m.dim; ++c) {
      std::cout << (c ? "," : "") << m.labels[c].str();
    }
    std::cout << '\n';
    for (int r = 0; r < m.dim; ++r) {
      for (int c = 0; c < m.dim; ++c) {
        std::cout << (c ? "," : "") << m.at(r, c);
      }
      std::cout << '\n';
    }
  } else if (format == "json") {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.dim; ++r) {
      ordered_json row = ordered_json::array();
      for (int c = 0; c < m.dim; ++c) row.push_back(m.at(r, c));
      rows.push_back(std::move(row));
    }
    const ordered_json report{{"command", "design"},
                              {"k", k},
                              {"dim", m.dim},
                              {"effect_labels", cli::labels_json(k)},
                              {"rows", std::move(rows)},
                              {"orthogonal", check_orthogonality(m)}};
    std::cout << report.dump(2) << '\n';
  } else {  // table
    std::size_t width = 4;
    for (const EffectLabel& l : m.labels) width = std::max(width, l.str().size());
    std::cout << std::string(width + 3, ' ');
    for (int c = 0; c < m.dim; ++c) {
      std::printf("%*s", static_cast<int>(width + 1), m.labels[c].str().c_str());
    }
    std::cout << '\n';
    for (int r = 0; r < m.dim; ++r) {
      std::printf("z_%-*d", static_cast<int>(width + 1), r + 1);
      for (int c = 0; c < m.dim; ++c) {
        std::printf("%*d", static_cast<int>(width + 1), m.at(r, c));
      }
      std::cout << '\n';
    }
  }
  return kExitOk;
}

// ---- assign ---------------------------------------------------------------

int run_assign(int k, const std::string& n_csv, std::uint64_t seed,
               const std::string& output) {
  const std::vector<int> n = parse_group_sizes(n_csv, k);
  long long total = 0;
  for (int nj : n) total += nj;
  warn_small_population(k, total);
  const Assignment a = draw_assignment(n, seed);
  if (output.empty()) {
    write_assignment(std::cout, a);
  } else {
    std::ofstream out(output);
    if (!out) throw io_error("cannot open '" + output + "' for writing");
    write_assignment(out, a);
  }
  return kExitOk;
}

// ---- estimate ---------------------------------------------------------------

std::string render_estimate_text(const EffectEstimate& est,
                                 const std::vector<ConfidenceInterval>& ivs,
                                 double alpha) {
  std::ostringstream os;
  os << "effects (k = " << est.k << ", N = ";
  int n_units = 0;
  for (int nj : est.group_sizes) n_units += nj;
  os << n_units << "), " << 100 * (1 - alpha)
     << "% conservative normal intervals:\n";
  for (const ConfidenceInterval& iv : ivs) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-10s %12.6g   [%12.6g, %12.6g]\n",
                  iv.label.str().c_str(), iv.point, iv.lower, iv.upper);
    os << line;
  }
  return os.str();
}

int run_estimate(const std::string& input, const std::string& cov_kind,
                 double alpha, const std::string& json_path) {
  const ObservedData obs = read_observed_file(input);
  const std::vector<int> counts = obs.group_sizes();
  int n_units = obs.n_units();
  warn_small_population(obs.k, n_units);

  ordered_json report{{"command", "estimate"},
                      {"input", input},
                      {"k", obs.k},
                      {"n_units", n_units},
                      {"group_sizes", counts},
                      {"effect_labels", cli::labels_json(obs.k)}};

  const bool want_ney = cov_kind == "ney" || cov_kind == "all";
  const bool want_hw = cov_kind == "hw" || cov_kind == "all";
  const bool want_he = cov_kind == "he" || cov_kind == "all";

  const Eigen::VectorXd effects = ri_effects(obs);
  report["effects"] = cli::to_json(effects);

  ordered_json covs;
  std::optional<EffectEstimate> ney;
  if (want_ney) {
    ney = estimate_ri(obs);
    covs["neymanian"] = cli::to_json(ney->covariance);
  }
  std::optional<OlsFit> fit;
  if (want_hw || want_he) fit = fit_ols(obs);
  if (want_hw) covs["huber_white"] = cli::to_json(cov_hw(*fit, obs));
  if (want_he) covs["homoscedastic"] = cli::to_json(cov_he(*fit, obs));
  report["covariances"] = std::move(covs);

  // Intervals from the requested kind; with --cov all, the Neymanian matrix
  // is used (the HC2 matrix is numerically identical).
  EffectEstimate interval_basis;
  if (ney) {
    interval_basis = *ney;
  } else {
    interval_basis.k = obs.k;
    interval_basis.effects = effects;
    interval_basis.group_sizes = counts;
    interval_basis.covariance =
        want_hw ? cov_hw(*fit, obs) : cov_he(*fit, obs);
    interval_basis.covariance_kind = want_hw ? CovarianceKind::huber_white
                                             : CovarianceKind::homoscedastic;
  }
  const auto ivs = confidence_intervals(interval_basis, alpha);
  ordered_json interval_rows = ordered_json::array();
  for (const ConfidenceInterval& iv : ivs) {
    interval_rows.push_back(ordered_json{{"label", iv.label.str()},
                                         {"point", iv.point},
                                         {"lower", iv.lower},
                                         {"upper", iv.upper}});
  }
  report["intervals"] =
      ordered_json{{"alpha", alpha},
                   {"based_on", to_string(interval_basis.covariance_kind)},
                   {"note", "conservative: the Neymanian variance estimate "
                            "has nonnegative bias for every component"},
                   {"rows", std::move(interval_rows)}};

  if (cov_kind == "all") {
    const EquivalenceReport eq = check_all(obs);
    report["equivalence"] = ordered_json{
        {"checks", cli::to_json(eq.checks)},
        {"instance", cli::to_json(eq.instance)},
        {"all_pass", eq.all_pass()}};
  }
  report["provenance"] = {
      {"estimator", "contrast average 2^{1-K} H' ybar / closed-form OLS"},
      {"normal_quantile", "Wichura AS 241 (PPND16)"}};

  emit(report, json_path, render_estimate_text(interval_basis, ivs, alpha));
  return kExitOk;
}

// ---- oracle -----------------------------------------------------------------

int run_oracle_cmd(const std::string& pop_path, const std::string& n_csv,
                   const std::string& json_path) {
  const PotentialOutcomeTable table = read_potential_outcomes_file(pop_path);
  const std::vector<int> n = parse_group_sizes(n_csv, table.k);
  warn_small_population(table.k, table.n_units());
  const OracleReport report = run_oracle(table, n);

  std::ostringstream text;
  text << "oracle over " << report.assignment_count << " assignments: ";
  for (const CheckResult& c : report.discrepancies) {
    text << c.name << (c.pass ? " ok" : " FAIL") << " (" << c.discrepancy
         << ")  ";
  }
  text << '\n';
  emit(cli::to_json(report, table.k, n), json_path, text.str());
  return report.all_pass() ? kExitOk : kExitCheckFailure;
}

// ---- simulate ---------------------------------------------------------------

int run_simulate(const std::string& pop_path, const std::string& n_csv,
                 int reps, std::uint64_t seed, const std::string& json_path) {
  const PotentialOutcomeTable table = read_potential_outcomes_file(pop_path);
  const std::vector<int> n = parse_group_sizes(n_csv, table.k);
  warn_small_population(table.k, table.n_units());

  const SimulationReport sim = simulate_randomization(table, n, reps, seed);
  const ordered_json report{
      {"command", "simulate"},
      {"population", pop_path},
      {"k", table.k},
      {"n_units", table.n_units()},
      {"group_sizes", n},
      {"reps", sim.reps},
      {"seed", sim.seed},
      {"effect_labels", cli::labels_json(table.k)},
      {"mean_estimate", cli::to_json(sim.mean_estimate)},
      {"mc_standard_errors", cli::to_json(sim.mc_standard_errors)},
      {"empirical_covariance", cli::to_json(sim.empirical_covariance)},
      {"mean_neymanian_covariance",
       cli::to_json(sim.mean_neymanian_covariance)},
      {"provenance", {{"rng", kRngAlgorithm}}}};

  std::ostringstream text;
  text << "simulate: " << sim.reps << " draws, mean estimate (";
  for (Eigen::Index j = 0; j < sim.mean_estimate.size(); ++j) {
    text << (j ? ", " : "") << sim.mean_estimate[j];
  }
  text << ")\n";
  emit(report, json_path, text.str());
  return kExitOk;
}

// ---- verify -----------------------------------------------------------------

int run_verify(bool fuzz, int k_max, int instances, std::uint64_t seed,
               bool balanced, bool continuous, const std::string& json_path) {
  if (!fuzz) {
    throw std::domain_error("verify currently requires --fuzz");
  }
  FuzzConfig config;
  config.k_max = k_max;
  config.instances = instances;
  config.seed = seed;
  config.balanced = balanced;
  config.continuous = continuous;
  const FuzzReport report = fuzz_suite(config);

  std::ostringstream text;
  text << "verify --fuzz: " << report.instances_run << " instances, "
       << (report.all_pass() ? "all checks passed" : "FAILURES") << '\n';
  emit(cli::to_json(report), json_path, text.str());
  return report.all_pass() ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "2^K factorial experiments: design matrices, randomized assignment, "
      "randomization/regression estimators, and exact certification"};
  app.require_subcommand(1);

  // design
  auto* design = app.add_subcommand("design", "print the 2^K model matrix");
  int design_k = 0;
  std::string design_format = "table";
  design->add_option("--k", design_k, "number of factors")->required();
  design->add_option("--format", design_format, "table|csv|json")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  // assign
  auto* assign = app.add_subcommand(
      "assign", "draw a completely randomized assignment (CSV unit,treatment)");
  int assign_k = 0;
  std::string assign_n;
  std::uint64_t assign_seed = 0;
  std::string assign_output;
  assign->add_option("--k", assign_k, "number of factors")->required();
  assign->add_option("--n", assign_n, "group sizes n1,...,n{2^K}")->required();
  assign->add_option("--seed", assign_seed, "RNG seed (default 0)");
  assign->add_option("--output", assign_output, "output file (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "estimate factorial effects from observed data");
  std::string est_input, est_cov = "all", est_json;
  double est_alpha = 0.05;
  estimate->add_option("--input", est_input, "observed-data CSV (unit,f1..fK,y)")
      ->required();
  estimate->add_option("--cov", est_cov, "covariance estimators: ney|hw|he|all")
      ->check(CLI::IsMember({"ney", "hw", "he", "all"}));
  estimate->add_option("--alpha", est_alpha, "interval level (default 0.05)");
  estimate->add_option("--json", est_json, "write the JSON report to this file");

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "exhaustively certify the estimator over all assignments");
  std::string oracle_pop, oracle_n, oracle_json;
  oracle->add_option("--pop", oracle_pop, "potential-outcome CSV (unit,y1..y{2^K})")
      ->required();
  oracle->add_option("--n", oracle_n, "group sizes n1,...,n{2^K}")->required();
  oracle->add_option("--json", oracle_json, "write the JSON report to this file");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo draws from the randomization distribution");
  std::string sim_pop, sim_n, sim_json;
  int sim_reps = 1000;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--pop", sim_pop, "potential-outcome CSV")->required();
  simulate->add_option("--n", sim_n, "group sizes n1,...,n{2^K}")->required();
  simulate->add_option("--reps", sim_reps, "number of draws (default 1000)");
  simulate->add_option("--seed", sim_seed, "RNG seed (default 0)");
  simulate->add_option("--json", sim_json, "write the JSON report to this file");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "randomized certification of the estimator equivalences");
  bool verify_fuzz = false, verify_balanced = false, verify_continuous = false;
  int verify_kmax = 3, verify_instances = 1000;
  std::uint64_t verify_seed = 0;
  std::string verify_json;
  verify->add_flag("--fuzz", verify_fuzz, "run the fuzz suite");
  verify->add_option("--k-max", verify_kmax, "largest K to fuzz (<= 4)");
  verify->add_option("--instances", verify_instances, "instance count");
  verify->add_option("--seed", verify_seed, "RNG seed (default 0)");
  verify->add_flag("--balanced", verify_balanced,
                   "balanced designs with replicate r in {2,3}");
  verify->add_flag("--continuous", verify_continuous,
                   "continuous uniform outcomes instead of integers");
  verify->add_option("--json", verify_json, "write the JSON report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (design->parsed()) return run_design(design_k, design_format);
    if (assign->parsed())
      return run_assign(assign_k, assign_n, assign_seed, assign_output);
    if (estimate->parsed())
      return run_estimate(est_input, est_cov, est_alpha, est_json);
    if (oracle->parsed()) return run_oracle_cmd(oracle_pop, oracle_n, oracle_json);
    if (simulate->parsed())
      return run_simulate(sim_pop, sim_n, sim_reps, sim_seed, sim_json);
    if (verify->parsed())
      return run_verify(verify_fuzz, verify_kmax, verify_instances, verify_seed,
                        verify_balanced, verify_continuous, verify_json);
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
