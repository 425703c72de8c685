#include "fact2k/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fact2k {

namespace {

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// d-vector / d x d matrix of compensated accumulators.
class KahanVector {
 public:
  explicit KahanVector(int n) : cells_(n) {}
  void add(const Eigen::VectorXd& v) {
    for (int i = 0; i < static_cast<int>(cells_.size()); ++i) cells_[i].add(v[i]);
  }
  Eigen::VectorXd value() const {
    Eigen::VectorXd out(cells_.size());
    for (int i = 0; i < static_cast<int>(cells_.size()); ++i) out[i] = cells_[i].value();
    return out;
  }

 private:
  std::vector<KahanSum> cells_;
};

class KahanMatrix {
 public:
  KahanMatrix(int rows, int cols) : rows_(rows), cols_(cols), cells_(rows * cols) {}
  void add(const Eigen::MatrixXd& m) {
    for (int c = 0; c < cols_; ++c) {
      for (int r = 0; r < rows_; ++r) cells_[c * rows_ + r].add(m(r, c));
    }
  }
  Eigen::MatrixXd value() const {
    Eigen::MatrixXd out(rows_, cols_);
    for (int c = 0; c < cols_; ++c) {
      for (int r = 0; r < rows_; ++r) out(r, c) = cells_[c * rows_ + r].value();
    }
    return out;
  }

 private:
  int rows_, cols_;
  std::vector<KahanSum> cells_;
};

void fnv1a(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

bool is_balanced(const std::vector<int>& counts) {
  return std::all_of(counts.begin(), counts.end(),
                     [&](int c) { return c == counts[0]; });
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

}  // namespace

CheckResult make_check(std::string name, double discrepancy, double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.discrepancy = discrepancy;
  c.tolerance = tolerance;
  c.pass = discrepancy <= tolerance;
  return c;
}

std::uint64_t fingerprint(const ObservedData& obs) {
  std::uint64_t h = 1469598103934665603ull;
  fnv1a(h, &obs.k, sizeof obs.k);
  for (const ObservedRecord& r : obs.records) {
    fnv1a(h, &r.unit, sizeof r.unit);
    fnv1a(h, &r.treatment, sizeof r.treatment);
    std::uint64_t bits;
    std::memcpy(&bits, &r.outcome, sizeof bits);
    fnv1a(h, &bits, sizeof bits);
  }
  return h;
}

bool EquivalenceReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

bool OracleReport::all_pass() const {
  return std::all_of(discrepancies.begin(), discrepancies.end(),
                     [](const CheckResult& c) { return c.pass; });
}

CheckResult check_point_equivalence(const ObservedData& obs, double tol) {
  const Eigen::VectorXd ri = ri_effects(obs);
  const Eigen::VectorXd ols = 2.0 * fit_ols(obs).coefficients;
  return make_check("point_equivalence", (ri - ols).cwiseAbs().maxCoeff(), tol);
}

CheckResult check_cov_equivalence(const ObservedData& obs, double tol) {
  const EffectEstimate ri = estimate_ri(obs);
  const Eigen::MatrixXd hw = cov_hw(fit_ols(obs), obs);
  return make_check("covariance_equivalence", max_abs(ri.covariance - hw), tol);
}

CheckResult check_leverages(const ObservedData& obs, double tol) {
  const OlsFit fit = fit_ols(obs);
  const std::vector<int> counts = obs.group_sizes();
  double worst = 0.0;
  KahanSum total;
  for (int i = 0; i < obs.n_units(); ++i) {
    const double expected = 1.0 / counts[obs.records[i].treatment];
    worst = std::max(worst, std::abs(fit.leverages[i] - expected));
    total.add(fit.leverages[i]);
  }
  worst = std::max(worst, std::abs(total.value() - (1 << obs.k)));
  return make_check("leverage_identity", worst, tol);
}

CheckResult check_balanced_he(const ObservedData& obs, double tol) {
  const std::vector<int> counts = obs.group_sizes();
  if (!is_balanced(counts)) {
    throw std::domain_error(
        "balanced-HE check requires equal group sizes; the full-matrix "
        "comparison genuinely fails on unbalanced designs");
  }
  const OlsFit fit = fit_ols(obs);
  const Eigen::MatrixXd he = cov_he(fit, obs);
  const Eigen::MatrixXd hw = cov_hw(fit, obs);
  const double gap =
      (he.diagonal() - hw.diagonal()).cwiseAbs().maxCoeff();
  return make_check("balanced_he_diagonal", gap, tol);
}

EquivalenceReport check_all(const ObservedData& obs) {
  EquivalenceReport report;
  const std::vector<int> counts = obs.group_sizes();
  report.instance.k = obs.k;
  report.instance.n_units = obs.n_units();
  report.instance.group_sizes = counts;
  report.instance.fingerprint = fingerprint(obs);

  report.checks.push_back(check_point_equivalence(obs));
  const int min_group = *std::min_element(counts.begin(), counts.end());
  if (min_group >= 2) {
    report.checks.push_back(check_cov_equivalence(obs));
  }
  report.checks.push_back(check_leverages(obs));
  if (min_group >= 2 && is_balanced(counts)) {
    report.checks.push_back(check_balanced_he(obs));
  }
  return report;
}

OracleReport run_oracle(const PotentialOutcomeTable& table,
                        const std::vector<int>& group_sizes) {
  validate_table(table);
  for (std::size_t j = 0; j < group_sizes.size(); ++j) {
    if (group_sizes[j] < 2) {
      throw std::domain_error("oracle requires n_j >= 2 everywhere: group " +
                              std::to_string(j + 1) + " has " +
                              std::to_string(group_sizes[j]));
    }
  }
  long long total = 0;
  for (int nj : group_sizes) total += nj;
  if (total != table.n_units()) {
    throw std::domain_error("group sizes sum to " + std::to_string(total) +
                            " but the population has " +
                            std::to_string(table.n_units()) + " units");
  }

  const int dim = 1 << table.k;
  OracleReport report;

  // Pass 1: mean of the randomization estimator over every assignment.
  AssignmentEnumerator enumerator(group_sizes);
  report.assignment_count = enumerator.count();
  Assignment a;
  KahanVector mean_acc(dim);
  while (enumerator.next(a)) {
    mean_acc.add(ri_effects(observe(table, a)));
  }
  const double count = static_cast<double>(report.assignment_count);
  report.mean_estimate = mean_acc.value() / count;

  // Pass 2: centered second moment (divisor = assignment count) and the mean
  // Neymanian covariance estimate.
  enumerator.reset();
  KahanMatrix outer_acc(dim, dim);
  KahanMatrix ney_acc(dim, dim);
  while (enumerator.next(a)) {
    const ObservedData obs = observe(table, a);
    const EffectEstimate est = estimate_ri(obs);
    const Eigen::VectorXd dev = est.effects - report.mean_estimate;
    outer_acc.add(dev * dev.transpose());
    ney_acc.add(est.covariance);
  }
  report.empirical_covariance = outer_acc.value() / count;
  report.mean_neymanian_covariance = ney_acc.value() / count;

  report.population_effect_vector = population_effects(table).values;
  report.true_covariance = true_sampling_covariance(table, group_sizes);
  report.bias_matrix = neymanian_bias(table);

  const Eigen::MatrixXd excess =
      report.mean_neymanian_covariance - report.true_covariance;
  report.discrepancies.push_back(make_check(
      "unbiasedness",
      (report.mean_estimate - report.population_effect_vector)
          .cwiseAbs()
          .maxCoeff(),
      kOracleMeanTol));
  report.discrepancies.push_back(make_check(
      "sampling_covariance",
      max_abs(report.empirical_covariance - report.true_covariance),
      kOracleCovTol));
  report.discrepancies.push_back(make_check(
      "neymanian_bias", max_abs(excess - report.bias_matrix), kOracleBiasTol));
  report.discrepancies.push_back(
      make_check("conservative_diagonal",
                 std::max(0.0, -excess.diagonal().minCoeff()),
                 kConservativeTol));
  return report;
}

FuzzReport fuzz_suite(const FuzzConfig& config) {
  if (config.k_max < 1 || config.k_max > 4) {
    throw std::domain_error("fuzz_suite: k_max must lie in [1, 4], got " +
                            std::to_string(config.k_max));
  }
  if (config.instances < 0) {
    throw std::domain_error("fuzz_suite: negative instance count");
  }

  FuzzReport report;
  report.config = config;

  std::mt19937_64 rng(config.seed);
  auto outcome = [&]() -> double {
    if (config.continuous) {
      // 53-bit mantissa draw mapped onto [-9, 9).
      return -9.0 + 18.0 * ((rng() >> 11) * 0x1.0p-53);
    }
    return static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
  };

  std::vector<CheckResult> worst;
  auto record = [&](const CheckResult& c, int instance) {
    auto it = std::find_if(worst.begin(), worst.end(),
                           [&](const CheckResult& w) { return w.name == c.name; });
    if (it == worst.end()) {
      worst.push_back(c);
    } else if (c.discrepancy > it->discrepancy) {
      *it = c;
    }
    if (!c.pass) {
      report.failures.push_back(
          "instance " + std::to_string(instance) + ": " + c.name +
          " discrepancy " + format_double(c.discrepancy) + " > tolerance " +
          format_double(c.tolerance));
    }
  };

  for (int inst = 0; inst < config.instances; ++inst) {
    const int k = 1 + static_cast<int>(uniform_below(rng, config.k_max));
    const int dim = 1 << k;
    std::vector<int> n(dim);
    if (config.balanced) {
      const int r = 2 + static_cast<int>(uniform_below(rng, 2));  // {2, 3}
      std::fill(n.begin(), n.end(), r);
    } else {
      for (int& nj : n) nj = 2 + static_cast<int>(uniform_below(rng, 5));
    }
    const int n_units = std::accumulate(n.begin(), n.end(), 0);

    PotentialOutcomeTable table;
    table.k = k;
    table.values.resize(n_units, dim);
    for (int i = 0; i < n_units; ++i) {
      for (int j = 0; j < dim; ++j) table.values(i, j) = outcome();
    }

    const Assignment a = draw_assignment(n, rng());
    const ObservedData obs = observe(table, a);

    record(check_point_equivalence(obs), inst);
    record(check_cov_equivalence(obs), inst);
    record(check_leverages(obs), inst);
    if (is_balanced(n)) {
      record(check_balanced_he(obs), inst);
    } else {
      const OlsFit fit = fit_ols(obs);
      const double gap = max_abs(cov_he(fit, obs) - cov_hw(fit, obs));
      report.he_hw_full_gap = std::max(report.he_hw_full_gap, gap);
      report.he_hw_gap_applicable = true;
    }
    ++report.instances_run;
  }

  report.worst = std::move(worst);
  return report;
}

SimulationReport simulate_randomization(const PotentialOutcomeTable& table,
                                        const std::vector<int>& group_sizes,
                                        int reps, std::uint64_t seed) {
  if (reps < 1) {
    throw std::domain_error("simulation needs at least one replication, got " +
                            std::to_string(reps));
  }
  validate_table(table);
  const int dim = 1 << table.k;

  SimulationReport report;
  report.reps = reps;
  report.seed = seed;

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(reps);
  KahanMatrix ney_acc(dim, dim);
  for (int rep = 0; rep < reps; ++rep) {
    const EffectEstimate est =
        estimate_ri(observe(table, draw_assignment(group_sizes, rng())));
    draws.push_back(est.effects);
    ney_acc.add(est.covariance);
  }

  KahanVector mean_acc(dim);
  for (const Eigen::VectorXd& d : draws) mean_acc.add(d);
  report.mean_estimate = mean_acc.value() / reps;
  KahanMatrix outer_acc(dim, dim);
  for (const Eigen::VectorXd& d : draws) {
    const Eigen::VectorXd dev = d - report.mean_estimate;
    outer_acc.add(dev * dev.transpose());
  }
  report.empirical_covariance = outer_acc.value() / reps;
  report.mean_neymanian_covariance = ney_acc.value() / reps;
  report.mc_standard_errors =
      (report.empirical_covariance.diagonal() / reps).cwiseSqrt();
  return report;
}

}  // namespace fact2k
