#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fact2k/assignment.hpp"
#include "fact2k/design.hpp"
#include "fact2k/estimators.hpp"
#include "fact2k/verify.hpp"

namespace {

using namespace fact2k;

void BM_BuildModelMatrix(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_model_matrix(k));
  }
}
BENCHMARK(BM_BuildModelMatrix)->DenseRange(2, 12, 2);

void BM_CheckOrthogonality(benchmark::State& state) {
  const ModelMatrix m = build_model_matrix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_orthogonality(m));
  }
}
BENCHMARK(BM_CheckOrthogonality)->DenseRange(2, 12, 2);

ObservedData balanced_instance(int k, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int dim = 1 << k;
  PotentialOutcomeTable table;
  table.k = k;
  table.values.resize(r * dim, dim);
  for (int i = 0; i < r * dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      table.values(i, j) =
          static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
    }
  }
  return observe(table, draw_assignment(std::vector<int>(dim, r), rng()));
}

void BM_EstimateRI(benchmark::State& state) {
  const ObservedData obs = balanced_instance(static_cast<int>(state.range(0)), 4, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_ri(obs));
  }
}
BENCHMARK(BM_EstimateRI)->DenseRange(1, 5, 1);

void BM_FitOlsPlusHC2(benchmark::State& state) {
  const ObservedData obs = balanced_instance(static_cast<int>(state.range(0)), 4, 2);
  for (auto _ : state) {
    const OlsFit fit = fit_ols(obs);
    benchmark::DoNotOptimize(cov_hw(fit, obs));
  }
}
BENCHMARK(BM_FitOlsPlusHC2)->DenseRange(1, 5, 1);

void BM_EnumerateAssignments(benchmark::State& state) {
  for (auto _ : state) {
    AssignmentEnumerator en({2, 2, 2, 2});
    Assignment a;
    std::uint64_t count = 0;
    while (en.next(a)) ++count;
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_EnumerateAssignments);

void BM_OracleK2(benchmark::State& state) {
  std::mt19937_64 rng(3);
  PotentialOutcomeTable table;
  table.k = 2;
  table.values.resize(8, 4);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 4; ++j) {
      table.values(i, j) =
          static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_oracle(table, {2, 2, 2, 2}));
  }
}
BENCHMARK(BM_OracleK2);

}  // namespace

BENCHMARK_MAIN();
