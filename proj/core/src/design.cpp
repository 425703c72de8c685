#include "fact2k/design.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace fact2k {

namespace {

void require_valid_k(int k) {
  if (k < 1 || k > kMaxFactors) {
    throw std::domain_error("number of factors k must be within [1, " +
                            std::to_string(kMaxFactors) + "], got " +
                            std::to_string(k));
  }
}

// Factor-subset bitmask for a label; factor f occupies bit (K-f), so row r's
// main-effect level for factor f is +1 iff that bit of r is set.
std::uint32_t factor_mask(const EffectLabel& label, int k) {
  std::uint32_t mask = 0;
  for (int f : label.factors) mask |= 1u << (k - f);
  return mask;
}

}  // namespace

std::string EffectLabel::str() const {
  if (factors.empty()) return "null";
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += ':';
    out += std::to_string(factors[i]);
  }
  return out;
}

std::vector<EffectLabel> effect_labels(int k) {
  require_valid_k(k);
  std::vector<EffectLabel> labels;
  labels.reserve(std::size_t{1} << k);
  labels.push_back({});  // null effect
  // Subsets of {1..K} by size, lexicographic within a size.
  std::vector<int> subset;
  for (int size = 1; size <= k; ++size) {
    subset.assign(size, 0);
    for (int i = 0; i < size; ++i) subset[i] = i + 1;
    while (true) {
      labels.push_back({subset});
      int i = size - 1;
      while (i >= 0 && subset[i] == k - (size - 1 - i)) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
  return labels;
}

ModelMatrix build_model_matrix(int k) {
  require_valid_k(k);
  ModelMatrix m;
  m.k = k;
  m.dim = 1 << k;
  m.labels = effect_labels(k);
  m.entries.resize(static_cast<std::size_t>(m.dim) * m.dim);

  // Column c at row r is the product of its factors' main-effect levels:
  // -1 raised to the number of constituent factors whose level at r is -1.
  std::vector<std::uint32_t> masks(m.labels.size());
  for (std::size_t c = 0; c < m.labels.size(); ++c) {
    masks[c] = factor_mask(m.labels[c], k);
  }
  for (int r = 0; r < m.dim; ++r) {
    std::int8_t* out = m.entries.data() + static_cast<std::size_t>(r) * m.dim;
    const std::uint32_t low_bits = ~static_cast<std::uint32_t>(r);
    for (int c = 0; c < m.dim; ++c) {
      out[c] = (std::popcount(low_bits & masks[c]) & 1) ? -1 : 1;
    }
  }
  return m;
}

std::vector<TreatmentCombination> treatment_combinations(int k) {
  require_valid_k(k);
  const int dim = 1 << k;
  std::vector<TreatmentCombination> combos(dim);
  for (int j = 0; j < dim; ++j) {
    combos[j].index = j + 1;
    combos[j].levels.resize(k);
    for (int f = 1; f <= k; ++f) {
      combos[j].levels[f - 1] = (j >> (k - f)) & 1 ? 1 : -1;
    }
  }
  return combos;
}

Eigen::RowVectorXd ModelMatrix::row_as_double(int r) const {
  Eigen::RowVectorXd out(dim);
  const std::int8_t* src = entries.data() + static_cast<std::size_t>(r) * dim;
  for (int c = 0; c < dim; ++c) out[c] = static_cast<double>(src[c]);
  return out;
}

Eigen::MatrixXd ModelMatrix::dense() const {
  Eigen::MatrixXd out(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const std::int8_t* src = entries.data() + static_cast<std::size_t>(r) * dim;
    for (int c = 0; c < dim; ++c) out(r, c) = static_cast<double>(src[c]);
  }
  return out;
}

Eigen::VectorXd ModelMatrix::tmul(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (int r = 0; r < dim; ++r) {
    const std::int8_t* src = entries.data() + static_cast<std::size_t>(r) * dim;
    const double vr = v[r];
    for (int c = 0; c < dim; ++c) {
      out[c] += src[c] > 0 ? vr : -vr;
    }
  }
  return out;
}

namespace {

// Gram check over packed sign bits: for +-1 vectors a, b of length n,
// a.b = n - 2*popcount(bits(a) XOR bits(b)). Exact integer arithmetic.
bool gram_is_scaled_identity(const std::vector<std::uint64_t>& packed,
                             int vectors, int words, int length) {
  for (int a = 0; a < vectors; ++a) {
    const std::uint64_t* pa = packed.data() + static_cast<std::size_t>(a) * words;
    for (int b = a; b < vectors; ++b) {
      const std::uint64_t* pb = packed.data() + static_cast<std::size_t>(b) * words;
      std::int64_t mismatches = 0;
      for (int w = 0; w < words; ++w) {
        mismatches += std::popcount(pa[w] ^ pb[w]);
      }
      const std::int64_t dot = static_cast<std::int64_t>(length) - 2 * mismatches;
      if (dot != (a == b ? static_cast<std::int64_t>(length) : 0)) return false;
    }
  }
  return true;
}

// O(dim^3) exact integer fallback for matrices with entries outside {-1,+1}.
bool gram_is_scaled_identity_naive(const ModelMatrix& m, bool columns) {
  const int dim = m.dim;
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      std::int64_t dot = 0;
      for (int i = 0; i < dim; ++i) {
        dot += columns
                   ? static_cast<std::int64_t>(m.at(i, a)) * m.at(i, b)
                   : static_cast<std::int64_t>(m.at(a, i)) * m.at(b, i);
      }
      if (dot != (a == b ? static_cast<std::int64_t>(dim) : 0)) return false;
    }
  }
  return true;
}

}  // namespace

bool check_orthogonality(const ModelMatrix& m) {
  const int dim = m.dim;
  if (dim < 1 || m.entries.size() != static_cast<std::size_t>(dim) * dim) {
    return false;
  }
  bool all_pm1 = true;
  for (std::int8_t e : m.entries) {
    if (e != 1 && e != -1) {
      all_pm1 = false;
      break;
    }
  }
  if (!all_pm1) {
    return gram_is_scaled_identity_naive(m, /*columns=*/true) &&
           gram_is_scaled_identity_naive(m, /*columns=*/false);
  }

  const int words = (dim + 63) / 64;
  std::vector<std::uint64_t> rows(static_cast<std::size_t>(dim) * words, 0);
  std::vector<std::uint64_t> cols(static_cast<std::size_t>(dim) * words, 0);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if (m.at(r, c) < 0) continue;
      rows[static_cast<std::size_t>(r) * words + c / 64] |= 1ull << (c % 64);
      cols[static_cast<std::size_t>(c) * words + r / 64] |= 1ull << (r % 64);
    }
  }
  // HH' = 2^K I over rows, H'H = 2^K I over columns.
  return gram_is_scaled_identity(rows, dim, words, dim) &&
         gram_is_scaled_identity(cols, dim, words, dim);
}

Eigen::MatrixXd weighted_row_outer_sum(const ModelMatrix& m,
                                       const Eigen::VectorXd& weights) {
  if (weights.size() != m.dim) {
    throw std::domain_error("weighted_row_outer_sum: weight vector length " +
                            std::to_string(weights.size()) + " != 2^K = " +
                            std::to_string(m.dim));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.dim, m.dim);
  for (int j = 0; j < m.dim; ++j) {
    const Eigen::RowVectorXd hj = m.row_as_double(j);
    out.noalias() += weights[j] * (hj.transpose() * hj);
  }
  return out;
}

}  // namespace fact2k
