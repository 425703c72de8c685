#include "fact2k/population.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fact2k {

namespace {

double effect_scale(int k) { return std::ldexp(1.0, -(k - 1)); }  // 2^{1-K}

void require_table_shape(const PotentialOutcomeTable& table) {
  if (table.k < 1 || table.k > kMaxFactors) {
    throw std::domain_error("potential-outcome table: invalid k = " +
                            std::to_string(table.k));
  }
  if (table.n_treatments() != (1 << table.k)) {
    throw std::domain_error("potential-outcome table: " +
                            std::to_string(table.n_treatments()) +
                            " treatment columns, expected 2^K = " +
                            std::to_string(1 << table.k));
  }
  if (table.n_units() < 1) {
    throw std::domain_error("potential-outcome table: no units");
  }
}

}  // namespace

void validate_table(const PotentialOutcomeTable& table) {
  require_table_shape(table);
  if (!table.values.allFinite()) {
    throw std::domain_error("potential-outcome table contains a non-finite value");
  }
}

EffectVector unit_effects(const PotentialOutcomeTable& table, int unit) {
  require_table_shape(table);
  if (unit < 0 || unit >= table.n_units()) {
    throw std::out_of_range("unit index " + std::to_string(unit) +
                            " outside [0, " + std::to_string(table.n_units()) +
                            ")");
  }
  const ModelMatrix m = build_model_matrix(table.k);
  EffectVector out;
  out.values = effect_scale(table.k) * m.tmul(table.values.row(unit).transpose());
  out.scope = EffectVector::Scope::unit;
  out.unit = unit;
  return out;
}

EffectVector population_effects(const PotentialOutcomeTable& table) {
  require_table_shape(table);
  const ModelMatrix m = build_model_matrix(table.k);
  const Eigen::VectorXd ybar =
      table.values.colwise().mean().transpose();
  EffectVector out;
  out.values = effect_scale(table.k) * m.tmul(ybar);
  out.scope = EffectVector::Scope::population;
  return out;
}

PopulationMoments population_moments(const PotentialOutcomeTable& table) {
  require_table_shape(table);
  const int n = table.n_units();
  if (n < 2) {
    throw std::domain_error("variance undefined: population has " +
                            std::to_string(n) + " unit(s), need at least 2");
  }
  const Eigen::MatrixXd centered =
      table.values.rowwise() - table.values.colwise().mean();
  PopulationMoments out;
  out.group_covariances = centered.transpose() * centered / (n - 1.0);
  out.group_variances = out.group_covariances.diagonal();
  return out;
}

Eigen::MatrixXd neymanian_bias(const PotentialOutcomeTable& table) {
  require_table_shape(table);
  const int n = table.n_units();
  if (n < 2) {
    throw std::domain_error("variance undefined: population has " +
                            std::to_string(n) + " unit(s), need at least 2");
  }
  const ModelMatrix m = build_model_matrix(table.k);
  const double scale = effect_scale(table.k);
  // Effect vectors of all units, one row each.
  Eigen::MatrixXd taus(n, m.dim);
  for (int i = 0; i < n; ++i) {
    taus.row(i) =
        (scale * m.tmul(table.values.row(i).transpose())).transpose();
  }
  const Eigen::MatrixXd centered = taus.rowwise() - taus.colwise().mean();
  return centered.transpose() * centered / (static_cast<double>(n) * (n - 1.0));
}

Eigen::MatrixXd true_sampling_covariance(const PotentialOutcomeTable& table,
                                         const std::vector<int>& group_sizes) {
  require_table_shape(table);
  const int dim = 1 << table.k;
  if (static_cast<int>(group_sizes.size()) != dim) {
    throw std::domain_error("group-size vector length " +
                            std::to_string(group_sizes.size()) +
                            " != 2^K = " + std::to_string(dim));
  }
  long long total = 0;
  for (int j = 0; j < dim; ++j) {
    if (group_sizes[j] < 1) {
      throw std::domain_error("group size n_" + std::to_string(j + 1) +
                              " must be >= 1 for the sampling covariance");
    }
    total += group_sizes[j];
  }
  if (total != table.n_units()) {
    throw std::domain_error("group sizes sum to " + std::to_string(total) +
                            " but the population has " +
                            std::to_string(table.n_units()) + " units");
  }

  const ModelMatrix m = build_model_matrix(table.k);
  const PopulationMoments moments = population_moments(table);
  Eigen::VectorXd weights(dim);
  for (int j = 0; j < dim; ++j) {
    weights[j] = moments.group_variances[j] / group_sizes[j];
  }
  const double scale2 = effect_scale(table.k) * effect_scale(table.k);
  return scale2 * weighted_row_outer_sum(m, weights) - neymanian_bias(table);
}

}  // namespace fact2k
