#include "fact2k/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fact2k {

namespace {

double effect_scale(int k) { return std::ldexp(1.0, -(k - 1)); }  // 2^{1-K}

void require_groups(const std::vector<int>& counts, int min_size,
                    const char* what) {
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < min_size) {
      throw std::domain_error(std::string(what) + ": group " +
                              std::to_string(j + 1) + " has " +
                              std::to_string(counts[j]) + " unit(s), needs " +
                              std::to_string(min_size));
    }
  }
}

}  // namespace

const char* to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::neymanian: return "neymanian";
    case CovarianceKind::huber_white: return "huber_white";
    case CovarianceKind::homoscedastic: return "homoscedastic";
    case CovarianceKind::truth: return "true";
  }
  return "unknown";
}

Eigen::VectorXd ri_effects(const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  return effect_scale(obs.k) * m.tmul(group_means(obs));
}

EffectEstimate estimate_ri(const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  const std::vector<int> counts = obs.group_sizes();
  require_groups(counts, 2, "Neymanian covariance");

  const Eigen::VectorXd s2 = group_sample_variances(obs);
  Eigen::VectorXd weights(m.dim);
  for (int j = 0; j < m.dim; ++j) weights[j] = s2[j] / counts[j];

  EffectEstimate est;
  est.k = obs.k;
  est.effects = ri_effects(obs);
  const double scale2 = effect_scale(obs.k) * effect_scale(obs.k);
  est.covariance = scale2 * weighted_row_outer_sum(m, weights);
  est.covariance_kind = CovarianceKind::neymanian;
  est.group_sizes = counts;
  return est;
}

RegressionMatrix build_regression_matrix(const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  RegressionMatrix x;
  x.k = obs.k;
  x.group_sizes = obs.group_sizes();
  x.rows.resize(obs.n_units(), m.dim);
  for (int i = 0; i < obs.n_units(); ++i) {
    x.rows.row(i) = m.row_as_double(obs.records[i].treatment);
  }
  return x;
}

Eigen::MatrixXd xtx_inverse(const std::vector<int>& group_sizes,
                            const ModelMatrix& m) {
  if (static_cast<int>(group_sizes.size()) != m.dim) {
    throw std::domain_error("group-size vector length " +
                            std::to_string(group_sizes.size()) +
                            " != 2^K = " + std::to_string(m.dim));
  }
  Eigen::VectorXd weights(m.dim);
  for (int j = 0; j < m.dim; ++j) {
    if (group_sizes[j] < 1) {
      throw std::domain_error("X'X is singular: group " + std::to_string(j + 1) +
                              " is empty");
    }
    weights[j] = 1.0 / group_sizes[j];
  }
  const double inv_dim2 = 1.0 / (static_cast<double>(m.dim) * m.dim);  // 4^{-K}
  return inv_dim2 * weighted_row_outer_sum(m, weights);
}

OlsFit fit_ols(const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  const std::vector<int> counts = obs.group_sizes();
  require_groups(counts, 1, "OLS fit");

  // X'y accumulated per unit, then solved with the closed-form inverse.
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(m.dim);
  for (const ObservedRecord& r : obs.records) {
    const std::span<const std::int8_t> hrow = m.row(r.treatment);
    for (int c = 0; c < m.dim; ++c) {
      xty[c] += hrow[c] > 0 ? r.outcome : -r.outcome;
    }
  }

  OlsFit fit;
  fit.k = obs.k;
  fit.group_sizes = counts;
  fit.coefficients = xtx_inverse(counts, m) * xty;

  const Eigen::VectorXd means = group_means(obs);
  fit.residuals.resize(obs.n_units());
  fit.leverages.resize(obs.n_units());
  for (int i = 0; i < obs.n_units(); ++i) {
    const ObservedRecord& r = obs.records[i];
    fit.residuals[i] = r.outcome - means[r.treatment];
    fit.leverages[i] = 1.0 / counts[r.treatment];
  }
  return fit;
}

Eigen::MatrixXd cov_hw(const OlsFit& fit, const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  const std::vector<int> counts = obs.group_sizes();
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 1) {
      throw std::domain_error("HC2 undefined with one replicate: group " +
                              std::to_string(j + 1) + " has leverage 1");
    }
  }
  require_groups(counts, 1, "HC2 covariance");
  const int n_units = obs.n_units();
  if (fit.residuals.size() != n_units || fit.leverages.size() != n_units) {
    throw std::domain_error("OLS fit does not match the observed data");
  }

  // Meat: N^{-1} sum_i x~_i' x~_i e_i^2/(1-h_i). Units sharing a treatment
  // share x~_i, so the inflated squared residuals group into row weights.
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(m.dim);
  for (int i = 0; i < n_units; ++i) {
    const ObservedRecord& r = obs.records[i];
    weights[r.treatment] +=
        fit.residuals[i] * fit.residuals[i] / (1.0 - fit.leverages[i]);
  }
  weights /= static_cast<double>(n_units);

  const Eigen::MatrixXd bread = xtx_inverse(counts, m);
  const Eigen::MatrixXd meat = weighted_row_outer_sum(m, weights);
  return 4.0 * n_units * bread * meat * bread;
}

Eigen::MatrixXd cov_he(const OlsFit& fit, const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  const std::vector<int> counts = obs.group_sizes();
  require_groups(counts, 1, "homoscedastic covariance");
  const int n_units = obs.n_units();
  if (n_units <= m.dim) {
    throw std::domain_error("no residual degrees of freedom: N = " +
                            std::to_string(n_units) + " <= 2^K = " +
                            std::to_string(m.dim));
  }
  const double sigma2 = fit.residuals.squaredNorm() / (n_units - m.dim);
  return 4.0 * sigma2 * xtx_inverse(counts, m);
}

Eigen::MatrixXd balanced_covariance(const ObservedData& obs) {
  const ModelMatrix m = build_model_matrix(obs.k);
  const std::vector<int> counts = obs.group_sizes();
  const int r = counts[0];
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] != r) {
      throw std::domain_error(
          "balanced covariance requires equal group sizes (n_1 = " +
          std::to_string(r) + ", n_" + std::to_string(j + 1) + " = " +
          std::to_string(counts[j]) +
          "); use estimate_ri / cov_hw for unbalanced designs");
    }
  }
  if (r < 2) {
    throw std::domain_error("balanced covariance needs replicate count >= 2, got " +
                            std::to_string(r));
  }
  const Eigen::VectorXd s2 = group_sample_variances(obs);
  const double scale2 = effect_scale(obs.k) * effect_scale(obs.k);  // 4^{1-K}
  return scale2 / r * weighted_row_outer_sum(m, s2);
}

// AS 241 (Wichura 1988), PPND16: relative accuracy around 1e-16, far inside
// the 1e-8 requirement.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1), got " +
                            std::to_string(p));
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

std::vector<ConfidenceInterval> confidence_intervals(const EffectEstimate& est,
                                                     double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie strictly in (0, 1), got " +
                            std::to_string(alpha));
  }
  const int dim = static_cast<int>(est.effects.size());
  for (int j = 0; j < dim; ++j) {
    if (est.covariance(j, j) < 0.0) {
      throw std::domain_error("covariance diagonal entry " + std::to_string(j) +
                              " is negative; intervals undefined");
    }
  }
  const double q = normal_quantile(1.0 - alpha / 2.0);
  const std::vector<EffectLabel> labels = effect_labels(est.k);
  std::vector<ConfidenceInterval> out(dim);
  for (int j = 0; j < dim; ++j) {
    const double half = q * std::sqrt(est.covariance(j, j));
    out[j] = {labels[j], est.effects[j], est.effects[j] - half,
              est.effects[j] + half};
  }
  return out;
}

}  // namespace fact2k
