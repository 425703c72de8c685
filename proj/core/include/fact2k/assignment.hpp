#ifndef FACT2K_ASSIGNMENT_HPP
#define FACT2K_ASSIGNMENT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "fact2k/population.hpp"

namespace fact2k {

// RNG provenance string recorded in JSON reports so runs are replicable.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64 + Fisher-Yates (rejection-sampled bounded draws)";

// Enumeration refuses above this many assignments.
inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

// A realized treatment allocation: unit i receives treatment combination
// z_{treatment_of[i]+1}. Group sizes are fixed by design.
struct Assignment {
  int k = 0;
  std::vector<int> treatment_of;  // size N, values in [0, 2^K)
  std::vector<int> group_sizes;   // size 2^K, counts per treatment
};

// The experimenter's view: one (unit, treatment, outcome) record per unit.
// `unit` is a 1-based id carried through from the source for traceability;
// `treatment` is the 0-based index into the canonical z order.
struct ObservedRecord {
  int unit = 0;
  int treatment = 0;
  double outcome = 0.0;
};

struct ObservedData {
  int k = 0;
  std::vector<ObservedRecord> records;

  int n_units() const { return static_cast<int>(records.size()); }
  std::vector<int> group_sizes() const;
};

// Uniform integer in [0, bound) drawn from `gen` by modulo rejection;
// unbiased and reproducible independent of the standard library's
// distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound);

// Uniform draw over all N!/(prod n_j!) partitions of N units into groups of
// the given sizes: Fisher-Yates permutation of unit indices, then consecutive
// blocks of sizes n_1..n_{2^K}. Deterministic given seed. Group sizes may be
// zero here (estimation rejects them later); the vector length must be a
// power of two and sum to N >= 1.
Assignment draw_assignment(const std::vector<int>& group_sizes,
                           std::uint64_t seed);

// Exact multinomial count N!/(prod n_j!). Saturates at 2^63-1 when larger.
std::uint64_t count_assignments(const std::vector<int>& group_sizes);

// Streams every distinct assignment exactly once, lexicographically smallest
// treatment_of vector first. The constructor refuses (std::domain_error, with
// the computed count) when the count exceeds kEnumerationGuard.
class AssignmentEnumerator {
 public:
  explicit AssignmentEnumerator(std::vector<int> group_sizes);

  std::uint64_t count() const { return count_; }

  // Fills `out` with the next assignment; false once exhausted.
  bool next(Assignment& out);

  void reset();

 private:
  int k_ = 0;
  std::vector<int> group_sizes_;
  std::vector<int> current_;
  std::uint64_t count_ = 0;
  bool first_ = true;
  bool done_ = false;
};

// Reads off the one potential outcome per unit selected by the assignment.
ObservedData observe(const PotentialOutcomeTable& table, const Assignment& a);

// Ybar^obs(z_j) per group; throws naming any empty group.
Eigen::VectorXd group_means(const ObservedData& obs);

// s^2(z_j), divisor n_j - 1; throws unless every n_j >= 2.
Eigen::VectorXd group_sample_variances(const ObservedData& obs);

}  // namespace fact2k

#endif  // FACT2K_ASSIGNMENT_HPP
