// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: fact2k_acceptance <path-to-fact2k-cli>
//
// The CLI path is needed by the byte-determinism criterion, which runs the
// actual tool twice and compares report bytes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fact2k/design.hpp"
#include "fact2k/estimators.hpp"
#include "fact2k/population.hpp"
#include "fact2k/verify.hpp"

namespace {

using namespace fact2k;
using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PotentialOutcomeTable random_integer_table(int k, int n_units,
                                           std::mt19937_64& rng) {
  PotentialOutcomeTable t;
  t.k = k;
  t.values.resize(n_units, 1 << k);
  for (int i = 0; i < n_units; ++i) {
    for (int j = 0; j < (1 << k); ++j) {
      t.values(i, j) =
          static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
    }
  }
  return t;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// 1. Model-matrix exactness: H'H = HH' = 2^K I for K = 1..10, exact integer
//    arithmetic, under one second total.
Criterion model_matrix_exactness() {
  const auto start = Clock::now();
  Criterion c{"model-matrix exactness (K=1..10, exact integer arithmetic)"};
  bool ok = true;
  for (int k = 1; k <= 10; ++k) {
    ok = ok && check_orthogonality(build_model_matrix(k));
  }
  c.seconds = elapsed(start);
  c.pass = ok && c.seconds < 1.0;
  c.detail = ok ? "all identities exact" : "identity violated";
  return c;
}

// Shared fuzz corpus for criteria 2-4: 1,000 instances, K <= 3, unbalanced
// n_j in [2,6], integer outcomes in [-9,9].
struct FuzzOutcome {
  double worst_point = 0.0;
  double worst_cov = 0.0;
  double worst_leverage = 0.0;
  double seconds = 0.0;
  int instances = 0;
};

FuzzOutcome run_shared_fuzz() {
  const auto start = Clock::now();
  FuzzOutcome out;
  std::mt19937_64 rng(424242);
  for (int inst = 0; inst < 1000; ++inst) {
    const int k = 1 + static_cast<int>(uniform_below(rng, 3));
    const int dim = 1 << k;
    std::vector<int> n(dim);
    for (int& nj : n) nj = 2 + static_cast<int>(uniform_below(rng, 5));
    int n_units = 0;
    for (int nj : n) n_units += nj;
    PotentialOutcomeTable table = random_integer_table(k, n_units, rng);
    const ObservedData obs = observe(table, draw_assignment(n, rng()));

    out.worst_point =
        std::max(out.worst_point, check_point_equivalence(obs).discrepancy);
    out.worst_cov =
        std::max(out.worst_cov, check_cov_equivalence(obs).discrepancy);
    out.worst_leverage =
        std::max(out.worst_leverage, check_leverages(obs).discrepancy);
    ++out.instances;
  }
  out.seconds = elapsed(start);
  return out;
}

// 5 (and part of 7): exhaustive oracle at a given size.
Criterion oracle_criterion(const std::string& name,
                           const PotentialOutcomeTable& table,
                           const std::vector<int>& n,
                           std::uint64_t expected_count, double budget_s) {
  const auto start = Clock::now();
  Criterion c{name};
  const OracleReport report = run_oracle(table, n);
  c.seconds = elapsed(start);
  bool ok = report.assignment_count == expected_count;
  std::string detail;
  for (const CheckResult& r : report.discrepancies) {
    ok = ok && r.pass;
    detail += r.name + "=" + fmt(r.discrepancy) + " ";
  }
  c.pass = ok && c.seconds < budget_s;
  c.detail = detail + "(" + std::to_string(report.assignment_count) +
             " assignments)";
  return c;
}

int run_cli(const std::string& cli, const std::string& args,
            const std::string& stdout_file) {
  const std::string command = "\"" + cli + "\" " + args + " > " + stdout_file;
  return std::system(command.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli_path = argc > 1 ? argv[1] : "";
  std::vector<Criterion> results;

  // 1 -----------------------------------------------------------------------
  results.push_back(model_matrix_exactness());

  // 2-4 ----------------------------------------------------------------------
  const FuzzOutcome fuzz = run_shared_fuzz();
  {
    Criterion c{"point equivalence of RI and OLS estimators (1,000 fuzz instances)"};
    c.pass = fuzz.worst_point <= 1e-10 && fuzz.seconds < 10.0;
    c.seconds = fuzz.seconds;
    c.detail = "worst discrepancy " + fmt(fuzz.worst_point);
    results.push_back(c);

    Criterion c3{"Neymanian vs HC2 covariance equivalence (same corpus)"};
    c3.pass = fuzz.worst_cov <= 1e-10 && fuzz.seconds < 10.0;
    c3.seconds = fuzz.seconds;
    c3.detail = "worst discrepancy " + fmt(fuzz.worst_cov);
    results.push_back(c3);

    Criterion c4{"leverages equal 1/n_j and sum to 2^K (same corpus)"};
    c4.pass = fuzz.worst_leverage <= 1e-12;
    c4.seconds = fuzz.seconds;
    c4.detail = "worst discrepancy " + fmt(fuzz.worst_leverage);
    results.push_back(c4);
  }

  // 5 -------------------------------------------------------------------------
  std::mt19937_64 rng(20240817);
  {
    const PotentialOutcomeTable table = random_integer_table(2, 8, rng);
    results.push_back(oracle_criterion(
        "exhaustive oracle, K=2, N=8, n=(2,2,2,2): unbiasedness, sampling "
        "covariance, Neymanian bias",
        table, {2, 2, 2, 2}, 2520, 30.0));
  }
  {
    PotentialOutcomeTable table;
    table.k = 1;
    table.values.resize(4, 2);
    table.values << 1, 2, 2, 4, 3, 6, 4, 8;
    results.push_back(oracle_criterion(
        "exhaustive oracle, K=1, N=4, n=(2,2), same tolerances", table, {2, 2},
        6, 1.0));
  }

  // 6 -------------------------------------------------------------------------
  {
    const auto start = Clock::now();
    Criterion c{"balanced designs: homoscedastic and HC2 diagonals agree; "
                "unbalanced full matrices differ"};
    double worst_diag = 0.0;
    std::mt19937_64 rng6(606060);
    int done = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const int k = 1 + static_cast<int>(uniform_below(rng6, 3));
      const int r = 2 + static_cast<int>(uniform_below(rng6, 2));  // {2,3}
      std::vector<int> n(std::size_t{1} << k, r);
      const PotentialOutcomeTable table =
          random_integer_table(k, r << k, rng6);
      const ObservedData obs = observe(table, draw_assignment(n, rng6()));
      worst_diag = std::max(worst_diag, check_balanced_he(obs).discrepancy);
      ++done;
    }
    // Necessity witness: a generic unbalanced instance must separate the two
    // estimators as full matrices.
    const PotentialOutcomeTable table = random_integer_table(1, 6, rng6);
    const ObservedData obs = observe(table, draw_assignment({2, 4}, rng6()));
    const OlsFit fit = fit_ols(obs);
    const double gap =
        (cov_he(fit, obs) - cov_hw(fit, obs)).cwiseAbs().maxCoeff();
    c.seconds = elapsed(start);
    c.pass = done == 100 && worst_diag <= 1e-12 && gap > 1e-6;
    c.detail = "worst diagonal gap " + fmt(worst_diag) +
               ", unbalanced full-matrix gap " + fmt(gap);
    results.push_back(c);
  }

  // 7 -------------------------------------------------------------------------
  {
    const auto start = Clock::now();
    Criterion c{"conservativeness: mean Neymanian covariance dominates the "
                "truth on every diagonal"};
    std::mt19937_64 rng7(777);
    double worst_min_diag = 0.0;   // most negative allowed: -1e-10
    double smallest_strict = 1e30; // must stay > 0 on non-additive tables
    bool ok = true;
    for (int rep = 0; rep < 12; ++rep) {
      const int k = 1 + static_cast<int>(uniform_below(rng7, 2));
      const std::vector<int> n(std::size_t{1} << k, 2);
      int n_units = 0;
      for (int nj : n) n_units += nj;
      const PotentialOutcomeTable table =
          random_integer_table(k, n_units, rng7);
      const OracleReport report = run_oracle(table, n);
      const Eigen::VectorXd excess_diag =
          (report.mean_neymanian_covariance - report.true_covariance)
              .diagonal();
      worst_min_diag = std::min(worst_min_diag, excess_diag.minCoeff());
      const bool additive = report.bias_matrix.cwiseAbs().maxCoeff() == 0.0;
      if (!additive) {
        smallest_strict = std::min(smallest_strict, excess_diag.minCoeff());
      }
      ok = ok && report.all_pass();
    }
    c.seconds = elapsed(start);
    c.pass = ok && worst_min_diag >= -1e-10 && smallest_strict > 0.0;
    c.detail = "min diagonal excess " + fmt(worst_min_diag) +
               ", smallest strict excess " + fmt(smallest_strict);
    results.push_back(c);
  }

  // 8 -------------------------------------------------------------------------
  {
    const auto start = Clock::now();
    Criterion c{"determinism: verify --fuzz --seed 42 twice gives "
                "byte-identical JSON"};
    if (cli_path.empty()) {
      c.detail = "CLI path not supplied";
      c.pass = false;
    } else {
      const std::string args =
          "verify --fuzz --k-max 3 --instances 200 --seed 42";
      const int rc1 = run_cli(cli_path, args, "acceptance_verify_run1.json");
      const int rc2 = run_cli(cli_path, args, "acceptance_verify_run2.json");
      const std::string a = slurp("acceptance_verify_run1.json");
      const std::string b = slurp("acceptance_verify_run2.json");
      c.pass = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
      c.detail = std::to_string(a.size()) + " bytes" +
                 (a == b ? ", identical" : ", DIFFER");
      if (c.pass) {  // keep the files around only when they disagree
        std::remove("acceptance_verify_run1.json");
        std::remove("acceptance_verify_run2.json");
      }
    }
    c.seconds = elapsed(start);
    results.push_back(c);
  }

  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Criterion& c = results[i];
    if (!c.pass) ++failures;
    std::printf("[%zu] %-96s %s  (%.2fs; %s)\n", i + 1, c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.seconds, c.detail.c_str());
  }
  std::printf("acceptance: %zu/%zu criteria passed\n", results.size() - failures,
              results.size());
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
