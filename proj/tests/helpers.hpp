#ifndef FACT2K_TESTS_HELPERS_HPP
#define FACT2K_TESTS_HELPERS_HPP

// Test-side oracles, deliberately independent of the library's computation
// paths: the model matrix is rebuilt by literal block construction, OLS runs
// through Eigen's QR on the explicit regression matrix, and the HC2 sandwich
// uses the explicit hat matrix. Production code never calls anything here.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fact2k/assignment.hpp"
#include "fact2k/design.hpp"
#include "fact2k/population.hpp"

namespace fact2k::testing {

// Model matrix by the literal block recipe: column k holds 2^{K-k} copies of
// -1 then 2^{K-k} copies of +1, repeated 2^{k-1} times; interaction columns
// are explicit elementwise products, subsets by (size, lexicographic).
inline Eigen::MatrixXi reference_model_matrix(int k) {
  const int dim = 1 << k;
  std::vector<Eigen::VectorXi> mains(k + 1);
  for (int f = 1; f <= k; ++f) {
    Eigen::VectorXi col(dim);
    const int block = 1 << (k - f);
    int pos = 0;
    for (int rep = 0; rep < (1 << (f - 1)); ++rep) {
      for (int i = 0; i < block; ++i) col[pos++] = -1;
      for (int i = 0; i < block; ++i) col[pos++] = 1;
    }
    mains[f] = col;
  }

  Eigen::MatrixXi h(dim, dim);
  h.col(0).setOnes();
  int next = 1;
  std::vector<std::vector<int>> subsets;
  for (int size = 1; size <= k; ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i + 1;
    while (true) {
      subsets.push_back(idx);
      int i = size - 1;
      while (i >= 0 && idx[i] == k - (size - 1 - i)) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  for (const std::vector<int>& s : subsets) {
    Eigen::VectorXi col = Eigen::VectorXi::Ones(dim);
    for (int f : s) col = col.cwiseProduct(mains[f]);
    h.col(next++) = col;
  }
  return h;
}

// OLS through Eigen's ColPivHouseholderQR on the explicit X.
inline Eigen::VectorXd qr_ols_coefficients(const Eigen::MatrixXd& x,
                                           const Eigen::VectorXd& y) {
  return x.colPivHouseholderQr().solve(y);
}

// HC2 sandwich with a general-purpose inverse and explicit hat diagonal.
inline Eigen::MatrixXd explicit_hc2(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.rows());
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  const Eigen::VectorXd beta = qr_ols_coefficients(x, y);
  const Eigen::VectorXd resid = y - x * beta;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (int i = 0; i < n; ++i) {
    const double h = x.row(i) * xtx_inv * x.row(i).transpose();
    meat += x.row(i).transpose() * x.row(i) * (resid[i] * resid[i] / (1.0 - h));
  }
  meat /= static_cast<double>(n);
  return 4.0 * n * xtx_inv * meat * xtx_inv;
}

inline ObservedData make_observed(int k, const std::vector<int>& treatments,
                                  const std::vector<double>& outcomes) {
  ObservedData obs;
  obs.k = k;
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    obs.records.push_back(
        {static_cast<int>(i) + 1, treatments[i], outcomes[i]});
  }
  return obs;
}

// The K=1 population used throughout: Y(z_1) = (1,2,3,4), Y(z_2) = (2,4,6,8).
inline PotentialOutcomeTable k1_reference_table() {
  PotentialOutcomeTable table;
  table.k = 1;
  table.values.resize(4, 2);
  table.values << 1, 2, 2, 4, 3, 6, 4, 8;
  return table;
}

// Random integer-outcome instance with n_j >= 2 groups; deterministic in seed.
inline std::pair<PotentialOutcomeTable, ObservedData> random_instance(
    int k, std::vector<int> group_sizes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int dim = 1 << k;
  int n_units = 0;
  for (int nj : group_sizes) n_units += nj;
  PotentialOutcomeTable table;
  table.k = k;
  table.values.resize(n_units, dim);
  for (int i = 0; i < n_units; ++i) {
    for (int j = 0; j < dim; ++j) {
      table.values(i, j) =
          static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
    }
  }
  const Assignment a = draw_assignment(group_sizes, rng());
  return {table, observe(table, a)};
}

}  // namespace fact2k::testing

#endif  // FACT2K_TESTS_HELPERS_HPP
