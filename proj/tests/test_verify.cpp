#include <doctest.h>

#include <vector>

#include "fact2k/verify.hpp"
#include "helpers.hpp"

using namespace fact2k;

TEST_SUITE("verify") {

TEST_CASE("point equivalence check on constant outcomes") {
  const ObservedData obs =
      testing::make_observed(1, {0, 0, 1, 1}, {4, 4, 4, 4});
  const CheckResult c = check_point_equivalence(obs);
  CHECK(c.discrepancy == 0.0);
  CHECK(c.pass);
  CHECK(c.name == "point_equivalence");
}

TEST_CASE("point equivalence on the K=1 worked example") {
  const ObservedData obs =
      testing::make_observed(1, {0, 0, 1, 1}, {1, 2, 6, 8});
  const CheckResult c = check_point_equivalence(obs);
  CHECK(c.discrepancy < 1e-12);
  CHECK(c.pass);
}

TEST_CASE("covariance equivalence: constant outcomes and worked example") {
  const ObservedData constant =
      testing::make_observed(1, {0, 0, 1, 1}, {4, 4, 4, 4});
  CHECK(check_cov_equivalence(constant).discrepancy == 0.0);

  const ObservedData worked =
      testing::make_observed(1, {0, 0, 1, 1}, {1, 2, 6, 8});
  const CheckResult c = check_cov_equivalence(worked);
  CHECK(c.discrepancy < 1e-12);
  CHECK(c.pass);

  const ObservedData singleton = testing::make_observed(1, {0, 1, 1}, {1, 2, 3});
  CHECK_THROWS_AS(check_cov_equivalence(singleton), std::domain_error);
}

TEST_CASE("leverage check passes on a random instance") {
  const auto [table, obs] = testing::random_instance(2, {2, 4, 3, 5}, 321);
  const CheckResult c = check_leverages(obs);
  CHECK(c.pass);
  CHECK(c.discrepancy <= kLeverageTol);
}

TEST_CASE("balanced-HE diagonal check") {
  const auto [table, obs] = testing::random_instance(2, {2, 2, 2, 2}, 404);
  const CheckResult c = check_balanced_he(obs);
  CHECK(c.pass);
  CHECK(c.discrepancy <= kBalancedHeTol);

  const ObservedData unbalanced =
      testing::make_observed(1, {0, 0, 1, 1, 1}, {1, 2, 3, 4, 5});
  CHECK_THROWS_AS(check_balanced_he(unbalanced), std::domain_error);
}

TEST_CASE("check_all records the instance summary") {
  const auto [table, obs] = testing::random_instance(1, {2, 3}, 11);
  const EquivalenceReport report = check_all(obs);
  CHECK(report.instance.k == 1);
  CHECK(report.instance.n_units == 5);
  CHECK(report.instance.group_sizes == std::vector<int>{2, 3});
  CHECK(report.instance.fingerprint != 0);
  CHECK(report.all_pass());
  CHECK(report.checks.size() >= 3);
  // Same data, same fingerprint; different data, different fingerprint.
  CHECK(check_all(obs).instance.fingerprint == report.instance.fingerprint);
  ObservedData tweaked = obs;
  tweaked.records[0].outcome += 1.0;
  CHECK(check_all(tweaked).instance.fingerprint != report.instance.fingerprint);
}

TEST_CASE("oracle on the K=1 reference table certifies all identities") {
  const OracleReport report =
      run_oracle(testing::k1_reference_table(), {2, 2});
  CHECK(report.assignment_count == 6);
  CHECK(report.all_pass());

  CHECK(report.mean_estimate[0] == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(report.mean_estimate[1] == doctest::Approx(2.5).epsilon(1e-12));

  Eigen::MatrixXd want_cov(2, 2);
  want_cov << 5.0 / 12, 5.0 / 4, 5.0 / 4, 15.0 / 4;
  CHECK((report.empirical_covariance - want_cov).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((report.true_covariance - want_cov).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd want_bias(2, 2);
  want_bias << 15.0 / 4, 5.0 / 4, 5.0 / 4, 5.0 / 12;
  CHECK((report.bias_matrix - want_bias).cwiseAbs().maxCoeff() < 1e-12);
  // The effect-variance bias entry matches mean(Neymanian) - truth.
  CHECK(report.mean_neymanian_covariance(1, 1) - report.true_covariance(1, 1) ==
        doctest::Approx(5.0 / 12).epsilon(1e-10));

  REQUIRE(report.discrepancies.size() == 4);
  for (const CheckResult& c : report.discrepancies) CHECK(c.pass);
}

TEST_CASE("oracle on a fuzzed K=2 instance over all 2520 assignments") {
  std::mt19937_64 rng(98765);
  PotentialOutcomeTable table;
  table.k = 2;
  table.values.resize(8, 4);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 4; ++j) {
      table.values(i, j) =
          static_cast<double>(static_cast<int>(uniform_below(rng, 19)) - 9);
    }
  }
  const OracleReport report = run_oracle(table, {2, 2, 2, 2});
  CHECK(report.assignment_count == 2520);
  CHECK(report.all_pass());
}

TEST_CASE("oracle on an identical-rows population: zero bias, exact match") {
  PotentialOutcomeTable table;
  table.k = 1;
  table.values.resize(4, 2);
  for (int i = 0; i < 4; ++i) table.values.row(i) << 3, 7;
  const OracleReport report = run_oracle(table, {2, 2});
  CHECK(report.bias_matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK((report.mean_neymanian_covariance - report.true_covariance)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK(report.all_pass());
}

TEST_CASE("oracle preconditions") {
  const PotentialOutcomeTable t = testing::k1_reference_table();
  CHECK_THROWS_AS(run_oracle(t, {1, 3}), std::domain_error);   // n_j < 2
  CHECK_THROWS_AS(run_oracle(t, {2, 4}), std::domain_error);   // sum mismatch
}

TEST_CASE("fuzz: zero instances is an empty, passing report") {
  FuzzConfig config;
  config.instances = 0;
  config.seed = 5;
  const FuzzReport report = fuzz_suite(config);
  CHECK(report.instances_run == 0);
  CHECK(report.worst.empty());
  CHECK(report.all_pass());
}

TEST_CASE("fuzz: fixed seed reproduces the identical report") {
  FuzzConfig config;
  config.k_max = 3;
  config.instances = 40;
  config.seed = 42;
  const FuzzReport a = fuzz_suite(config);
  const FuzzReport b = fuzz_suite(config);
  CHECK(a.instances_run == b.instances_run);
  REQUIRE(a.worst.size() == b.worst.size());
  for (std::size_t i = 0; i < a.worst.size(); ++i) {
    CHECK(a.worst[i].name == b.worst[i].name);
    CHECK(a.worst[i].discrepancy == b.worst[i].discrepancy);  // bitwise
    CHECK(a.worst[i].pass == b.worst[i].pass);
  }
  CHECK(a.he_hw_full_gap == b.he_hw_full_gap);
  CHECK(a.failures == b.failures);
}

TEST_CASE("fuzz: unbalanced corpus passes at the pinned tolerances") {
  FuzzConfig config;
  config.k_max = 3;
  config.instances = 150;
  config.seed = 7;
  const FuzzReport report = fuzz_suite(config);
  CHECK(report.instances_run == 150);
  CHECK(report.all_pass());
  CHECK(report.failures.empty());
  // A generic unbalanced instance separates HE from HC2 on the full matrix.
  CHECK(report.he_hw_gap_applicable);
  CHECK(report.he_hw_full_gap > 1e-6);
}

TEST_CASE("fuzz: balanced corpus exercises the HE diagonal identity") {
  FuzzConfig config;
  config.k_max = 3;
  config.instances = 60;
  config.seed = 11;
  config.balanced = true;
  const FuzzReport report = fuzz_suite(config);
  CHECK(report.all_pass());
  bool saw_balanced_check = false;
  for (const CheckResult& c : report.worst) {
    if (c.name == "balanced_he_diagonal") {
      saw_balanced_check = true;
      CHECK(c.tolerance == kBalancedHeTol);
    }
  }
  CHECK(saw_balanced_check);
  CHECK_FALSE(report.he_hw_gap_applicable);
}

TEST_CASE("fuzz: continuous outcome mode also passes") {
  FuzzConfig config;
  config.k_max = 2;
  config.instances = 50;
  config.seed = 3;
  config.continuous = true;
  CHECK(fuzz_suite(config).all_pass());
}

TEST_CASE("fuzz config validation") {
  FuzzConfig config;
  config.k_max = 5;
  CHECK_THROWS_AS(fuzz_suite(config), std::domain_error);
  config.k_max = 2;
  config.instances = -1;
  CHECK_THROWS_AS(fuzz_suite(config), std::domain_error);
}

TEST_CASE("simulation: one rep equals a single estimate") {
  const PotentialOutcomeTable table = testing::k1_reference_table();
  const SimulationReport sim = simulate_randomization(table, {2, 2}, 1, 9);
  std::mt19937_64 rng(9);
  const EffectEstimate single =
      estimate_ri(observe(table, draw_assignment({2, 2}, rng())));
  CHECK((sim.mean_estimate - single.effects).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sim.empirical_covariance.cwiseAbs().maxCoeff() == 0.0);
  CHECK((sim.mean_neymanian_covariance - single.covariance)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("simulation: 1e5 draws land within 3 MC standard errors") {
  const PotentialOutcomeTable table = testing::k1_reference_table();
  const SimulationReport sim =
      simulate_randomization(table, {2, 2}, 100000, 2024);
  const Eigen::VectorXd truth = population_effects(table).values;  // (7.5, 2.5)
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(sim.mean_estimate[j] - truth[j]) <
          3.0 * sim.mc_standard_errors[j]);
  }
}

TEST_CASE("simulation: fixed seed reproduces the report bitwise") {
  const PotentialOutcomeTable table = testing::k1_reference_table();
  const SimulationReport a = simulate_randomization(table, {2, 2}, 200, 5);
  const SimulationReport b = simulate_randomization(table, {2, 2}, 200, 5);
  CHECK((a.mean_estimate - b.mean_estimate).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.empirical_covariance - b.empirical_covariance)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK_THROWS_AS(simulate_randomization(table, {2, 2}, 0, 5),
                  std::domain_error);
}

TEST_CASE("compensated summation survives a cancellation-heavy series") {
  KahanSum acc;
  acc.add(1.0);
  for (int i = 0; i < 10000; ++i) acc.add(1e-16);
  acc.add(-1.0);
  CHECK(acc.value() == doctest::Approx(1e-12).epsilon(1e-9));
}

}  // TEST_SUITE
