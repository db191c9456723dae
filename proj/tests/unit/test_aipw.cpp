#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nsc/aipw.hpp"
#include "nsc/discrete_law.hpp"
#include "nsc/experiment.hpp"
#include "nsc/oracle.hpp"
#include "nsc/simgen.hpp"

namespace {

nsc::EstimatorConfig saturated_config() {
  nsc::EstimatorConfig c;
  c.family = nsc::BasisFamily::saturated;
  c.compute_se = false;
  return c;
}

}  // namespace

TEST_SUITE("aipw-estimator") {

TEST_CASE("population AIPW and IPW equal the enumerated truth on NSC laws") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int p = seed % 2 == 0 ? 0 : 2;
    const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, p, 900 + seed));
    const auto data = law.observed_data();
    for (const auto& f : {nsc::TargetFunctional::product(), nsc::TargetFunctional::mean(2),
                          nsc::TargetFunctional::cell({1, 0, 1})}) {
      const double truth = nsc::true_functional(law, f);
      CHECK(nsc::estimate_aipw(data, f, saturated_config()).beta_hat == doctest::Approx(truth).epsilon(1e-8));
      CHECK(nsc::estimate_ipw(data, f, saturated_config()).beta_hat == doctest::Approx(truth).epsilon(1e-8));
    }
  }
}

TEST_CASE("under MCAR the complete-case mean is unbiased") {
  const auto law = nsc::build_discrete_law(nsc::mcar_components(3, 0));
  const auto f = nsc::TargetFunctional::product();
  const double truth = nsc::true_functional(law, f);
  CHECK(nsc::estimate_complete_case(law.observed_data(), f).beta_hat == doctest::Approx(truth).epsilon(1e-12));
  CHECK(nsc::estimate_aipw(law.observed_data(), f, saturated_config()).beta_hat ==
        doctest::Approx(truth).epsilon(1e-8));
}

TEST_CASE("MNAR law biases the complete-case mean but not AIPW") {
  const auto law = nsc::BinaryORParams::binary1().law();
  const auto f = nsc::TargetFunctional::product();
  const double truth = nsc::true_functional(law, f);
  const auto data = law.observed_data();
  CHECK(std::abs(nsc::estimate_complete_case(data, f).beta_hat - truth) > 0.1);
  CHECK(nsc::estimate_aipw(data, f, saturated_config()).beta_hat == doctest::Approx(truth).epsilon(1e-8));
}

TEST_CASE("stacked equations vanish at the fitted parameters") {
  const auto data = nsc::simulate_setting(nsc::Setting::binary1, 3000, 5).masked;
  auto config = nsc::setting_config(nsc::Setting::binary1, nsc::Misspec::none);
  const auto eq = nsc::build_stacked_equations(data, nsc::TargetFunctional::product(), config);
  CHECK(eq.mean(eq.omega_hat()).cwiseAbs().maxCoeff() < 1e-7);
  const auto v = nsc::sandwich_variance(eq, eq.omega_hat());
  CHECK(v.rows() == eq.size());
  const double se = std::sqrt(v(eq.size() - 1, eq.size() - 1));
  const auto rep = nsc::estimate_aipw(data, nsc::TargetFunctional::product(), config);
  CHECK(rep.sandwich_se == doctest::Approx(se).epsilon(1e-10));
  CHECK(se > 0.0);
  CHECK(se < 0.1);
}

TEST_CASE("bootstrap is reproducible and independent of the thread count") {
  const auto data = nsc::simulate_setting(nsc::Setting::binary1, 1500, 11).masked;
  auto config = nsc::setting_config(nsc::Setting::binary1, nsc::Misspec::none);
  config.compute_se = false;
  const auto f = nsc::TargetFunctional::product();
  const auto a = nsc::bootstrap_ci(data, f, config, 20, 7, 0.05, nsc::EstimatorKind::aipw, 1);
  const auto b = nsc::bootstrap_ci(data, f, config, 20, 7, 0.05, nsc::EstimatorKind::aipw, 3);
  CHECK(a.replicates == b.replicates);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo < a.hi);
  const auto c = nsc::bootstrap_ci(data, f, config, 20, 8, 0.05, nsc::EstimatorKind::aipw, 1);
  CHECK(c.replicates != a.replicates);
}

TEST_CASE("type 7 quantiles") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(nsc::quantile_sorted(v, 0.5) == doctest::Approx(2.5));
  CHECK(nsc::quantile_sorted(v, 0.0) == doctest::Approx(1.0));
  CHECK(nsc::quantile_sorted(v, 1.0) == doctest::Approx(4.0));
  CHECK(nsc::quantile_sorted(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("joint table of a binary law sums to one and matches the truth") {
  const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, 0, 31));
  auto config = saturated_config();
  const auto table = nsc::joint_distribution_binary(law.observed_data(), config);
  CHECK(std::accumulate(table.probability.begin(), table.probability.end(), 0.0) == doctest::Approx(1.0));
  for (std::uint32_t l = 0; l < 8; ++l) {
    CHECK(table.probability[l] == doctest::Approx(law.lx_prob(l, 0)).epsilon(1e-7));
  }
}

TEST_CASE("a dataset without complete cases is rejected") {
  nsc::DatasetBuilder b(3, 0);
  const double l[3] = {1, 0, 1};
  b.add(nsc::Pattern::parse("011"), l, {});
  b.add(nsc::Pattern::parse("101"), l, {});
  const auto data = std::move(b).build();
  CHECK_THROWS(nsc::estimate_aipw(data, nsc::TargetFunctional::product(), saturated_config()));
}

}  // TEST_SUITE
