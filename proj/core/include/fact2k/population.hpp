#ifndef FACT2K_POPULATION_HPP
#define FACT2K_POPULATION_HPP

#include <vector>

#include <Eigen/Core>

#include "fact2k/design.hpp"

namespace fact2k {

// The complete science: potential outcome Y_i(z_j) for every unit i and every
// treatment combination, columns in canonical z_1..z_{2^K} order. Rows are
// units 0..N-1. Dense, no missing values.
struct PotentialOutcomeTable {
  int k = 0;
  Eigen::MatrixXd values;  // N x 2^K

  int n_units() const { return static_cast<int>(values.rows()); }
  int n_treatments() const { return static_cast<int>(values.cols()); }
};

// Throws std::domain_error if dimensions are inconsistent with k or any
// value is non-finite.
void validate_table(const PotentialOutcomeTable& table);

// A factorial effect vector 2^{1-K} H' y, either for a single unit's
// potential outcomes or for the population average. Component order matches
// effect_labels; component 0 is twice the mean outcome.
struct EffectVector {
  enum class Scope { unit, population };

  Eigen::VectorXd values;
  Scope scope = Scope::population;
  int unit = -1;  // 0-based row when scope == unit
};

// Finite-population second moments of the potential outcomes, divisor N-1.
// group_covariances(j,j') = S(z_{j+1}, z_{j'+1}); its diagonal equals
// group_variances.
struct PopulationMoments {
  Eigen::VectorXd group_variances;
  Eigen::MatrixXd group_covariances;
};

// tau_i = 2^{1-K} H' Y_i. Throws std::out_of_range for a bad unit index.
EffectVector unit_effects(const PotentialOutcomeTable& table, int unit);

// tau = 2^{1-K} H' Ybar; equals the average of the unit effect vectors.
EffectVector population_effects(const PotentialOutcomeTable& table);

// S^2(z_j) and S(z_j, z_j'), divisor N-1. Throws when N < 2.
PopulationMoments population_moments(const PotentialOutcomeTable& table);

// Exact sampling covariance of the randomization estimator under complete
// randomization with fixed group sizes n_j:
//   4^{1-K} sum_j n_j^{-1} h~_j' h~_j S^2(z_j)
//     - (N(N-1))^{-1} sum_i (tau_i - tau)(tau_i - tau)'.
// Unobservable in a real experiment; computable here because the table holds
// the full science.
Eigen::MatrixXd true_sampling_covariance(const PotentialOutcomeTable& table,
                                         const std::vector<int>& group_sizes);

// (N(N-1))^{-1} sum_i (tau_i - tau)(tau_i - tau)': the expectation of the
// Neymanian covariance estimator minus the true sampling covariance.
// Positive semidefinite; zero iff the population is strictly additive.
Eigen::MatrixXd neymanian_bias(const PotentialOutcomeTable& table);

}  // namespace fact2k

#endif  // FACT2K_POPULATION_HPP
