#include "fact2k/assignment.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fact2k {

namespace {

// Validates the group-size vector and returns (k, N).
std::pair<int, long long> check_group_sizes(const std::vector<int>& n,
                                            bool allow_zero) {
  const std::size_t groups = n.size();
  if (groups < 2 || !std::has_single_bit(groups) ||
      groups > (std::size_t{1} << kMaxFactors)) {
    throw std::domain_error("group-size vector length " +
                            std::to_string(groups) +
                            " is not 2^K for a supported K");
  }
  long long total = 0;
  for (std::size_t j = 0; j < groups; ++j) {
    if (n[j] < 0 || (!allow_zero && n[j] == 0)) {
      throw std::domain_error("group size n_" + std::to_string(j + 1) +
                              " = " + std::to_string(n[j]) + " is invalid");
    }
    total += n[j];
  }
  if (total < 1) {
    throw std::domain_error("group sizes sum to zero; nothing to assign");
  }
  if (total > 100'000'000) {
    throw std::domain_error("N = " + std::to_string(total) +
                            " exceeds the supported maximum of 1e8 units");
  }
  return {std::countr_zero(groups), total};
}

}  // namespace

std::vector<int> ObservedData::group_sizes() const {
  std::vector<int> counts(std::size_t{1} << k, 0);
  for (const ObservedRecord& r : records) {
    if (r.treatment < 0 || r.treatment >= static_cast<int>(counts.size())) {
      throw std::domain_error("observed record for unit " +
                              std::to_string(r.unit) +
                              " has treatment index " +
                              std::to_string(r.treatment) + " outside [0, 2^K)");
    }
    ++counts[r.treatment];
  }
  return counts;
}

std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  if (bound == 0) throw std::domain_error("uniform_below: bound must be > 0");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % bound;
}

Assignment draw_assignment(const std::vector<int>& group_sizes,
                           std::uint64_t seed) {
  const auto [k, total] = check_group_sizes(group_sizes, /*allow_zero=*/true);
  const int n_units = static_cast<int>(total);

  std::vector<int> perm(n_units);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(seed);
  for (int i = n_units - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_below(gen, i + 1));
    std::swap(perm[i], perm[j]);
  }

  Assignment a;
  a.k = k;
  a.group_sizes = group_sizes;
  a.treatment_of.resize(n_units);
  int pos = 0;
  for (std::size_t j = 0; j < group_sizes.size(); ++j) {
    for (int c = 0; c < group_sizes[j]; ++c) {
      a.treatment_of[perm[pos++]] = static_cast<int>(j);
    }
  }
  return a;
}

std::uint64_t count_assignments(const std::vector<int>& group_sizes) {
  check_group_sizes(group_sizes, /*allow_zero=*/true);
  constexpr std::uint64_t kSaturated =
      std::numeric_limits<std::int64_t>::max();
  // Product of binomials C(remaining, n_j); each binomial built by exact
  // stepwise multiply/divide in 128-bit intermediates.
  unsigned long long remaining = 0;
  for (int nj : group_sizes) remaining += nj;
  unsigned __int128 total = 1;
  for (int nj : group_sizes) {
    unsigned __int128 binom = 1;
    for (int i = 1; i <= nj; ++i) {
      binom = binom * (remaining - nj + i) / i;
      if (binom > kSaturated) return kSaturated;
    }
    remaining -= nj;
    total *= binom;
    if (total > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(total);
}

AssignmentEnumerator::AssignmentEnumerator(std::vector<int> group_sizes)
    : group_sizes_(std::move(group_sizes)) {
  const auto [k, total] = check_group_sizes(group_sizes_, /*allow_zero=*/true);
  k_ = k;
  count_ = count_assignments(group_sizes_);
  if (count_ > kEnumerationGuard) {
    throw std::domain_error(
        "enumeration refused: " + std::to_string(count_) +
        " assignments exceed the guard of " + std::to_string(kEnumerationGuard));
  }
  current_.reserve(static_cast<std::size_t>(total));
  reset();
}

void AssignmentEnumerator::reset() {
  current_.clear();
  for (std::size_t j = 0; j < group_sizes_.size(); ++j) {
    current_.insert(current_.end(), group_sizes_[j], static_cast<int>(j));
  }
  // Already sorted ascending: the lexicographically smallest arrangement.
  first_ = true;
  done_ = false;
}

bool AssignmentEnumerator::next(Assignment& out) {
  if (done_) return false;
  if (first_) {
    first_ = false;
  } else if (!std::next_permutation(current_.begin(), current_.end())) {
    done_ = true;
    return false;
  }
  out.k = k_;
  out.treatment_of = current_;
  out.group_sizes = group_sizes_;
  return true;
}

ObservedData observe(const PotentialOutcomeTable& table, const Assignment& a) {
  if (a.k != table.k) {
    throw std::domain_error("assignment is for K = " + std::to_string(a.k) +
                            " but the table has K = " + std::to_string(table.k));
  }
  if (static_cast<int>(a.treatment_of.size()) != table.n_units()) {
    throw std::domain_error("assignment covers " +
                            std::to_string(a.treatment_of.size()) +
                            " units but the table has " +
                            std::to_string(table.n_units()));
  }
  ObservedData obs;
  obs.k = table.k;
  obs.records.resize(a.treatment_of.size());
  for (std::size_t i = 0; i < a.treatment_of.size(); ++i) {
    const int t = a.treatment_of[i];
    if (t < 0 || t >= table.n_treatments()) {
      throw std::domain_error("treatment index " + std::to_string(t) +
                              " for unit " + std::to_string(i + 1) +
                              " outside [0, 2^K)");
    }
    obs.records[i] = {static_cast<int>(i) + 1, t,
                      table.values(static_cast<Eigen::Index>(i), t)};
  }
  return obs;
}

Eigen::VectorXd group_means(const ObservedData& obs) {
  const int dim = 1 << obs.k;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(dim);
  const std::vector<int> counts = obs.group_sizes();
  for (const ObservedRecord& r : obs.records) sums[r.treatment] += r.outcome;
  for (int j = 0; j < dim; ++j) {
    if (counts[j] == 0) {
      throw std::domain_error("group " + std::to_string(j + 1) + " (z_" +
                              std::to_string(j + 1) +
                              ") is empty; group mean undefined");
    }
    sums[j] /= counts[j];
  }
  return sums;
}

Eigen::VectorXd group_sample_variances(const ObservedData& obs) {
  const int dim = 1 << obs.k;
  const std::vector<int> counts = obs.group_sizes();
  for (int j = 0; j < dim; ++j) {
    if (counts[j] < 2) {
      throw std::domain_error(
          "Neymanian variance needs two replicates: group " +
          std::to_string(j + 1) + " has " + std::to_string(counts[j]));
    }
  }
  const Eigen::VectorXd means = group_means(obs);
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
  for (const ObservedRecord& r : obs.records) {
    const double dev = r.outcome - means[r.treatment];
    ss[r.treatment] += dev * dev;
  }
  for (int j = 0; j < dim; ++j) ss[j] /= counts[j] - 1.0;
  return ss;
}

}  // namespace fact2k
