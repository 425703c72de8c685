#ifndef FACT2K_ESTIMATORS_HPP
#define FACT2K_ESTIMATORS_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fact2k/assignment.hpp"
#include "fact2k/design.hpp"

namespace fact2k {

enum class CovarianceKind { neymanian, huber_white, homoscedastic, truth };

const char* to_string(CovarianceKind kind);

// A length-2^K effect estimate with one covariance-estimate matrix and its
// provenance.
struct EffectEstimate {
  int k = 0;
  Eigen::VectorXd effects;
  Eigen::MatrixXd covariance;
  CovarianceKind covariance_kind = CovarianceKind::neymanian;
  std::vector<int> group_sizes;
};

// The N x 2^K regression matrix X: row i is the contrast row h~ of unit i's
// treatment, in unit order.
struct RegressionMatrix {
  int k = 0;
  Eigen::MatrixXd rows;
  std::vector<int> group_sizes;
};

// OLS fit of y_obs on X/2 (so effects = 2 * coefficients). Residuals and
// leverages are aligned with the ObservedData record order.
struct OlsFit {
  int k = 0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::VectorXd leverages;
  std::vector<int> group_sizes;
};

// Point estimator 2^{1-K} H' Ybar^obs alone; defined whenever every group is
// nonempty (variance estimation needs two replicates, the point does not).
Eigen::VectorXd ri_effects(const ObservedData& obs);

// Randomization-based estimate with the Neymanian covariance
//   4^{1-K} sum_j n_j^{-1} h~_j' h~_j s^2(z_j).
// Requires every n_j >= 2.
EffectEstimate estimate_ri(const ObservedData& obs);

RegressionMatrix build_regression_matrix(const ObservedData& obs);

// Closed form (X'X)^{-1} = 4^{-K} sum_j n_j^{-1} h~_j' h~_j: the rows of H
// are eigenvectors of X'X with eigenvalues 2^K n_j, so no general-purpose
// solver is needed. Requires every n_j >= 1.
Eigen::MatrixXd xtx_inverse(const std::vector<int>& group_sizes,
                            const ModelMatrix& m);

// Coefficients via the closed-form inverse; residual of unit i is its
// observed outcome minus its own group mean; leverage of every unit in group
// j is 1/n_j.
OlsFit fit_ols(const ObservedData& obs);

// Leverage-amended (HC2) sandwich:
//   4N (X'X)^{-1} [ N^{-1} sum_i x~_i' x~_i e_i^2 / (1 - h_i) ] (X'X)^{-1}.
// Numerically equal to the Neymanian covariance of estimate_ri. Requires
// every n_j >= 2 (leverage 1 leaves HC2 undefined).
Eigen::MatrixXd cov_hw(const OlsFit& fit, const ObservedData& obs);

// Homoscedastic-model covariance 4 sigma^2 (X'X)^{-1} with
// sigma^2 = sum e_i^2 / (N - 2^K). Requires N > 2^K.
Eigen::MatrixXd cov_he(const OlsFit& fit, const ObservedData& obs);

// Balanced-design reduction (all n_j equal a common r >= 2):
//   (4^{K-1} r)^{-1} sum_j h~_j' h~_j s^2(z_j).
// Throws on unbalanced input; use estimate_ri / cov_hw there.
Eigen::MatrixXd balanced_covariance(const ObservedData& obs);

// Standard normal quantile, Wichura's algorithm AS 241 (PPND16 constants).
double normal_quantile(double p);

struct ConfidenceInterval {
  EffectLabel label;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Normal-approximation interval tau_j +/- q_{1-alpha/2} sqrt(cov_jj) per
// component. Conservative under the Neymanian covariance, whose per-component
// bias is nonnegative. alpha must lie strictly inside (0, 1).
std::vector<ConfidenceInterval> confidence_intervals(const EffectEstimate& est,
                                                     double alpha);

}  // namespace fact2k

#endif  // FACT2K_ESTIMATORS_HPP
