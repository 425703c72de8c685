#ifndef FACT2K_DESIGN_HPP
#define FACT2K_DESIGN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fact2k {

// Largest supported number of factors. The model matrix is stored dense,
// so 2^16 x 2^16 signed bytes is the practical ceiling.
inline constexpr int kMaxFactors = 16;

// One factorial effect: the sorted set of 1-based factor indices whose
// contrast columns multiply into the effect column. Empty set = null effect.
struct EffectLabel {
  std::vector<int> factors;

  bool is_null() const { return factors.empty(); }
  std::string str() const;  // "null", "2", "1:3", ...

  bool operator==(const EffectLabel&) const = default;
};

// The 2^K x 2^K model matrix H of +-1 entries, row-major.
//
// Column 0 is the all-ones null-effect column; columns 1..K are the main
// effects (column k holds blocks of 2^{K-k} copies of -1 then +1, repeated
// 2^{k-1} times); the remaining columns are interactions, grouped by subset
// size and ordered lexicographically within a size. Row j (0-based) is the
// contrast row of treatment combination z_{j+1}.
struct ModelMatrix {
  int k = 0;
  int dim = 0;                       // 2^K
  std::vector<std::int8_t> entries;  // row-major, dim*dim values in {-1,+1}
  std::vector<EffectLabel> labels;   // dim labels, canonical order

  int at(int row, int col) const {
    return entries[static_cast<std::size_t>(row) * dim + col];
  }
  std::span<const std::int8_t> row(int r) const {
    return {entries.data() + static_cast<std::size_t>(r) * dim,
            static_cast<std::size_t>(dim)};
  }

  Eigen::RowVectorXd row_as_double(int r) const;
  Eigen::MatrixXd dense() const;

  // H' v for a length-2^K vector v; signs applied entrywise, no H copy.
  Eigen::VectorXd tmul(const Eigen::VectorXd& v) const;
};

// One treatment combination z_j: the K factor levels of row `index` of
// (h_1,...,h_K). index is 1-based; z_1 is all -1, z_{2^K} all +1.
struct TreatmentCombination {
  int index = 0;
  std::vector<int> levels;
};

// Throws std::domain_error unless 1 <= k <= kMaxFactors.
ModelMatrix build_model_matrix(int k);

// The canonical label order: null, main effects 1..K, then interactions by
// (subset size, lexicographic sorted factor tuple).
std::vector<EffectLabel> effect_labels(int k);

std::vector<TreatmentCombination> treatment_combinations(int k);

// True iff H'H = HH' = 2^K I holds in exact integer arithmetic. Returns
// false (never throws) on any violation, including non +-1 entries.
bool check_orthogonality(const ModelMatrix& m);

// sum_j w_j * h~_j' h~_j over rows of H, a 2^K x 2^K symmetric matrix.
// This row-outer-product sum is the common kernel of X'X, its closed-form
// inverse, and every covariance formula in the estimators module.
Eigen::MatrixXd weighted_row_outer_sum(const ModelMatrix& m,
                                       const Eigen::VectorXd& weights);

}  // namespace fact2k

#endif  // FACT2K_DESIGN_HPP
