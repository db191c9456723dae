#include <doctest.h>

#include <bit>
#include <cmath>
#include <stdexcept>

#include "nsc/discrete_law.hpp"
#include "nsc/errors.hpp"
#include "nsc/functional.hpp"
#include "nsc/oracle.hpp"

TEST_SUITE("discrete-oracle") {

TEST_CASE("MCAR law factorizes into independent indicators") {
  const double a = -0.5;
  auto comp = nsc::mcar_components(3, 0, a);
  const auto law = nsc::build_discrete_law(comp);
  const double q = 1.0 / (1.0 + std::exp(a));  // P(R_i = 1)
  double total = 0.0;
  for (std::uint32_t r = 0; r < 8; ++r) {
    double pr = 0.0;
    for (std::uint32_t l = 0; l < 8; ++l) pr += law.prob(r, l, 0);
    const int obs = std::popcount(r);
    CHECK(pr == doctest::Approx(std::pow(q, obs) * std::pow(1.0 - q, 3 - obs)).epsilon(1e-12));
    total += pr;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(nsc::verify_nsc(law) < 1e-12);
}

TEST_CASE("true functional matches hand enumeration") {
  auto comp = nsc::mcar_components(3, 0);
  comp.lx_weights = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto law = nsc::build_discrete_law(comp);
  CHECK(nsc::true_functional(law, nsc::TargetFunctional::product()) == doctest::Approx(8.0 / 36.0));
  // L1 = 1 on odd l codes: 2 + 4 + 6 + 8
  CHECK(nsc::true_functional(law, nsc::TargetFunctional::mean(0)) == doctest::Approx(20.0 / 36.0));
}

TEST_CASE("law dimensions are capped") {
  CHECK_THROWS_AS(nsc::random_nsc_components(5, 6, 1), std::invalid_argument);
  CHECK_NOTHROW(nsc::build_discrete_law(nsc::random_nsc_components(3, 2, 1)));
  auto comp = nsc::mcar_components(3, 0);
  comp.lx_weights.assign(7, 1.0);
  CHECK_THROWS_AS(nsc::build_discrete_law(comp), std::invalid_argument);
}

TEST_CASE("zero complete-case probability is a positivity failure") {
  auto comp = nsc::mcar_components(3, 0);
  comp.main[1] = [](std::span<const double>, std::span<const double>) { return 2000.0; };
  CHECK_THROWS_AS(nsc::build_discrete_law(comp), nsc::PositivityError);
  CHECK_NOTHROW(nsc::build_discrete_law(comp, false));
}

TEST_CASE("randomized NSC laws pass every identity") {
  for (int j = 0; j < 4; ++j) {
    const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, 2 * (j % 2), 100 + j));
    const auto b = nsc::TargetFunctional::product();
    CHECK(nsc::verify_nsc(law) < 1e-10);
    const auto id = nsc::verify_identification(law, b);
    CHECK(id.reconstruction_error < 1e-10);
    CHECK(id.beta_error < 1e-10);
    const auto inf = nsc::verify_if_mean_zero(law, b);
    CHECK(std::abs(inf.phi_odds) < 1e-10);
    CHECK(std::abs(inf.phi_adj) < 1e-10);
    CHECK(std::abs(nsc::verify_if_mean_zero(law, b, 0.1).phi_odds) > 1e-3);
    CHECK(std::abs(nsc::verify_double_robustness(law, nsc::DrScenario::pi_wrong, b)) < 1e-10);
    CHECK(std::abs(nsc::verify_double_robustness(law, nsc::DrScenario::pm_wrong, b)) < 1e-10);
    CHECK(std::abs(nsc::verify_double_robustness(law, nsc::DrScenario::both_wrong, b)) > 1e-3);
    const auto sym = nsc::verify_symmetry(law);
    CHECK(sym.pair_asymmetry < 1e-10);
    CHECK(sym.pair_l_dependence < 1e-10);
    CHECK(sym.gamma_pairing_spread < 1e-10);
    CHECK(sym.gamma_l_variation < 1e-10);
    CHECK(nsc::verify_enumeration_closure(law, b) < 1e-10);
  }
}

TEST_CASE("self-censoring controls break no self-censoring and reconstruction") {
  for (int j = 0; j < 3; ++j) {
    const auto law = nsc::build_discrete_law(nsc::self_censoring_components(3, 2 * (j % 2), 7 + j));
    CHECK(nsc::verify_nsc(law) > 1e-3);
    CHECK(nsc::verify_identification(law, nsc::TargetFunctional::product()).reconstruction_error > 1e-3);
    CHECK_THROWS_AS(nsc::selection_model_of(law), std::invalid_argument);
  }
}

TEST_CASE("oracle suite passes with default options") {
  nsc::OracleSuiteOptions opt;
  opt.nsc_laws = 6;
  opt.self_censoring_laws = 2;
  const auto checks = nsc::run_oracle_suite(opt);
  CHECK(checks.size() >= 15);
  for (const auto& c : checks) {
    INFO(c.name << " = " << c.value);
    CHECK(c.pass);
  }
}

}  // TEST_SUITE
