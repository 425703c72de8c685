#ifndef FACT2K_VERIFY_HPP
#define FACT2K_VERIFY_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fact2k/estimators.hpp"
#include "fact2k/population.hpp"

namespace fact2k {

// Tolerances pinned for the certification checks. Point and covariance
// equivalences are algebraic identities, so only accumulated rounding
// separates the two routes; the enumeration identities tolerate a little
// more because they average thousands of terms.
inline constexpr double kPointEquivalenceTol = 1e-10;
inline constexpr double kCovEquivalenceTol = 1e-10;
inline constexpr double kLeverageTol = 1e-12;
inline constexpr double kBalancedHeTol = 1e-12;
inline constexpr double kOracleMeanTol = 1e-10;
inline constexpr double kOracleCovTol = 1e-9;
inline constexpr double kOracleBiasTol = 1e-9;
inline constexpr double kConservativeTol = 1e-10;

struct CheckResult {
  std::string name;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

CheckResult make_check(std::string name, double discrepancy, double tolerance);

// Content hash (FNV-1a 64) of an observed dataset; identifies the instance a
// report was computed from.
std::uint64_t fingerprint(const ObservedData& obs);

struct InstanceSummary {
  int k = 0;
  int n_units = 0;
  std::vector<int> group_sizes;
  std::uint64_t fingerprint = 0;
};

struct EquivalenceReport {
  std::vector<CheckResult> checks;
  InstanceSummary instance;

  bool all_pass() const;
};

// max_j |tau_RI,j - tau_OLS,j|; needs only nonempty groups.
CheckResult check_point_equivalence(const ObservedData& obs,
                                    double tol = kPointEquivalenceTol);

// max entrywise |Cov_Ney - Cov_HW|; needs n_j >= 2 everywhere.
CheckResult check_cov_equivalence(const ObservedData& obs,
                                  double tol = kCovEquivalenceTol);

// max of (max_i |h_i - 1/n_j(i)|, |sum_i h_i - 2^K|).
CheckResult check_leverages(const ObservedData& obs,
                            double tol = kLeverageTol);

// max_j |diag_j(Cov_HE) - diag_j(Cov_HW)| on a balanced design; the
// off-diagonals genuinely differ and are excluded. Throws on unbalanced data.
CheckResult check_balanced_he(const ObservedData& obs,
                              double tol = kBalancedHeTol);

// Point + covariance + leverage checks (+ the balanced-HE diagonal when the
// design is balanced with r >= 2), with the pinned tolerances.
EquivalenceReport check_all(const ObservedData& obs);

// Exhaustive-enumeration certificate over every assignment with the given
// group sizes:
//   unbiasedness          mean of tau_RI equals the population effects;
//   sampling_covariance   the assignment-distribution covariance of tau_RI
//                         (divisor = assignment count: the expectation is an
//                         exact average over equally likely assignments)
//                         equals the closed-form sampling covariance;
//   neymanian_bias        mean Cov_Ney minus the true covariance equals
//                         (N(N-1))^{-1} sum_i (tau_i - tau)(tau_i - tau)';
//   conservative_diagonal no diagonal entry of that bias falls below
//                         -kConservativeTol.
// Accumulations use Neumaier-compensated summation; the reduction order is a
// fixed sequential fold so reports are byte-stable.
struct OracleReport {
  std::uint64_t assignment_count = 0;
  Eigen::VectorXd mean_estimate;
  Eigen::MatrixXd empirical_covariance;
  Eigen::MatrixXd mean_neymanian_covariance;
  Eigen::VectorXd population_effect_vector;
  Eigen::MatrixXd true_covariance;
  Eigen::MatrixXd bias_matrix;
  std::vector<CheckResult> discrepancies;

  bool all_pass() const;
};

OracleReport run_oracle(const PotentialOutcomeTable& table,
                        const std::vector<int>& group_sizes);

// Randomized certification corpus. Outcomes are integer-valued in [-9, 9] by
// default so most intermediates are exactly representable and a tolerance
// failure indicates a real bug; `continuous` switches to uniform reals.
struct FuzzConfig {
  int k_max = 3;
  int instances = 1000;
  std::uint64_t seed = 0;
  bool balanced = false;  // common replicate r in {2,3} instead of n_j in [2,6]
  bool continuous = false;
};

struct FuzzReport {
  FuzzConfig config;
  int instances_run = 0;
  std::vector<CheckResult> worst;     // per check name, worst instance seen
  std::vector<std::string> failures;  // one entry per failing (instance, check)
  // Largest entrywise |Cov_HE - Cov_HW| seen on an instance with unequal
  // group sizes; a positive value witnesses that the diagonal-only claim
  // cannot extend to the full matrix.
  double he_hw_full_gap = 0.0;
  bool he_hw_gap_applicable = false;

  bool all_pass() const { return failures.empty(); }
};

FuzzReport fuzz_suite(const FuzzConfig& config);

// Monte Carlo companion to run_oracle for designs too large to enumerate:
// seeded draws from the randomization distribution, with the same plug-in
// covariance divisor (reps) as the exact enumeration. Never a substitute for
// the oracle where enumeration is feasible.
struct SimulationReport {
  int reps = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd mc_standard_errors;  // sqrt(diag(empirical)/reps)
  Eigen::MatrixXd empirical_covariance;
  Eigen::MatrixXd mean_neymanian_covariance;
};

SimulationReport simulate_randomization(const PotentialOutcomeTable& table,
                                        const std::vector<int>& group_sizes,
                                        int reps, std::uint64_t seed);

// Neumaier-compensated scalar accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace fact2k

#endif  // FACT2K_VERIFY_HPP
