#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nsc/experiment.hpp"
#include "nsc/oracle.hpp"
#include "nsc/simgen.hpp"

namespace {

// E[L_j] = sum_r w_r (Sigma0 h(r))_j, written out independently of GaussianCGParams::truth.
double mixture_mean(const nsc::GaussianCGParams& g, int j) {
  double s = 0.0;
  for (std::size_t r = 0; r < g.pattern_weights.size(); ++r) {
    double m = 0.0;
    for (Eigen::Index c = 0; c < g.sigma0.cols(); ++c) m += g.sigma0(j, c) * g.h[r][c];
    s += g.pattern_weights[r] * m;
  }
  return s;
}

// E[L1 L2 L3] from the unnormalized p(L, X) weights.
double product_moment(const nsc::BinaryORParams& b) {
  const auto comp = b.components();
  double all = 0.0, hit = 0.0;
  for (std::size_t c = 0; c < comp.lx_weights.size(); ++c) {
    all += comp.lx_weights[c];
    if ((c & 7u) == 7u) hit += comp.lx_weights[c];
  }
  return hit / all;
}

}  // namespace

TEST_SUITE("simgen") {

TEST_CASE("pattern weights are (10,9,8,7,6,5,10,4)/59 in listing order") {
  const auto w = nsc::default_pattern_weights();
  const double listed[8] = {10, 9, 8, 7, 6, 5, 10, 4};
  const char* order[8] = {"100", "010", "110", "001", "101", "011", "111", "000"};
  for (int t = 0; t < 8; ++t) {
    CHECK(w[nsc::Pattern::parse(order[t]).index()] == doctest::Approx(listed[t] / 59.0).epsilon(1e-15));
  }
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("closed-form truths of the Gaussian settings") {
  const auto g1 = nsc::GaussianCGParams::gauss1();
  const auto g2 = nsc::GaussianCGParams::gauss2();
  CHECK(std::abs(mixture_mean(g1, 2) - 2.415593220) < 1e-9);
  CHECK(std::abs(g1.truth(2) - 2.415593220) < 1e-9);
  CHECK(std::abs(mixture_mean(g2, 2) - 16.715118644) < 1e-9);
  CHECK(std::abs(g2.truth(2) - 16.715118644) < 1e-9);
  CHECK(std::abs(nsc::setting_truth(nsc::Setting::gauss1) - 2.415593) < 5e-7);
  CHECK(std::abs(nsc::setting_truth(nsc::Setting::gauss2) - 16.71512) < 5e-6);
}

TEST_CASE("complete-case means of gauss1") {
  const auto mu = nsc::GaussianCGParams::gauss1().mu0(nsc::Pattern::complete(3));
  CHECK(mu[0] == doctest::Approx(6.96));
  CHECK(mu[1] == doctest::Approx(9.24));
  CHECK(mu[2] == doctest::Approx(1.02));
}

TEST_CASE("the Gaussian presets satisfy no self-censoring") {
  CHECK(nsc::GaussianCGParams::gauss1().nsc_violation() < 1e-12);
  CHECK(nsc::GaussianCGParams::gauss2().nsc_violation() < 1e-12);
  auto bad = nsc::GaussianCGParams::gauss1();
  bad.h[nsc::Pattern::parse("011").index()][0] += 0.5;
  CHECK(bad.nsc_violation() == doctest::Approx(0.5));
}

TEST_CASE("invalid chain-graph parameters are rejected") {
  auto g = nsc::GaussianCGParams::gauss1();
  g.pattern_weights[0] += 0.1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  auto s = nsc::GaussianCGParams::gauss1();
  s.sigma0(0, 0) = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("binary preset truths are frozen") {
  CHECK(std::abs(product_moment(nsc::BinaryORParams::binary1()) - 0.322027473) < 1e-9);
  CHECK(std::abs(product_moment(nsc::BinaryORParams::binary2()) - 0.321358554) < 1e-9);
  CHECK(std::abs(nsc::setting_truth(nsc::Setting::binary1) - 0.322027473) < 1e-9);
  CHECK(std::abs(nsc::setting_truth(nsc::Setting::binary2) - 0.321358554) < 1e-9);
}

TEST_CASE("binary presets are NSC laws with MNAR complete cases") {
  for (const auto& b : {nsc::BinaryORParams::binary1(), nsc::BinaryORParams::binary2()}) {
    const auto law = b.law();
    CHECK(nsc::verify_nsc(law) < 1e-12);
    const auto data = law.observed_data();
    const auto cc = nsc::estimate_complete_case(data, nsc::TargetFunctional::product()).beta_hat;
    CHECK(cc < 0.2);
  }
}

TEST_CASE("samplers are deterministic in the seed") {
  const auto a = nsc::simulate_setting(nsc::Setting::gauss2, 200, 9);
  const auto b = nsc::simulate_setting(nsc::Setting::gauss2, 200, 9);
  const auto c = nsc::simulate_setting(nsc::Setting::gauss2, 200, 10);
  bool same = true, differ = false;
  for (std::size_t r = 0; r < 200; ++r) {
    for (int j = 0; j < 3; ++j) {
      same = same && a.full.l(r)[j] == b.full.l(r)[j];
      differ = differ || a.full.l(r)[j] != c.full.l(r)[j];
    }
    same = same && a.masked.pattern(r) == b.masked.pattern(r);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("masked data hide exactly the unobserved coordinates") {
  const auto s = nsc::simulate_setting(nsc::Setting::gauss1, 500, 3);
  for (std::size_t r = 0; r < 500; ++r) {
    const auto& pat = s.masked.pattern(r);
    CHECK(s.full.pattern(r).is_complete());
    for (int j = 0; j < 3; ++j) {
      if (pat.observed(j)) {
        CHECK(s.masked.l(r)[j] == s.full.l(r)[j]);
      } else {
        CHECK(std::isnan(s.masked.l(r)[j]));
      }
    }
  }
}

TEST_CASE("sampled pattern frequencies and moments match the chain graph") {
  const std::size_t n = 100000;
  const auto g = nsc::GaussianCGParams::gauss1();
  const auto s = nsc::sample_gaussian_cg(g, n, 2024);
  std::vector<double> freq(8, 0.0);
  double l3 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    freq[s.masked.pattern(r).index()] += 1.0 / n;
    l3 += s.full.l(r)[2] / n;
  }
  for (int idx = 0; idx < 8; ++idx) CHECK(std::abs(freq[idx] - g.pattern_weights[idx]) < 0.005);
  // sd(L3) is about 3.5, so the MC error of the mean is about 0.011
  CHECK(std::abs(l3 - 2.415593220) < 0.05);
}

TEST_CASE("exact law sampling reproduces cell probabilities") {
  const auto law = nsc::BinaryORParams::binary1().law();
  const std::size_t n = 200000;
  const auto s = nsc::sample_law(law, n, 17);
  double cc = 0.0;
  for (std::size_t r = 0; r < n; ++r) cc += s.masked.pattern(r).is_complete() ? 1.0 / n : 0.0;
  double p_cc = 0.0;
  for (std::uint32_t l = 0; l < 8; ++l) p_cc += law.prob(7, l, 0);
  CHECK(std::abs(cc - p_cc) < 0.004);
}

TEST_CASE("the covariate transform needs positive input") {
  const auto t = nsc::misspecify_covariates({2.0, 2.0});
  CHECK(t[0] == doctest::Approx(0.0));
  CHECK(t[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(nsc::misspecify_covariates({0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(nsc::misspecify_covariates({1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("summary statistics of a trial vector") {
  const auto s = nsc::summarize("x", {1.0, 2.0, 3.0}, 2.5, 1);
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.bias == doctest::Approx(-0.5));
  CHECK(s.percent_bias == doctest::Approx(-20.0));
  CHECK(s.variance == doctest::Approx(1.0));
  CHECK(s.mse == doctest::Approx((2.25 + 0.25 + 0.25) / 3.0));
  CHECK(s.mc_se == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(s.failed == 1);
}

TEST_CASE("experiments are reproducible across thread counts") {
  const auto a = nsc::run_experiment(nsc::Setting::binary1, 800, 4, 3, nsc::Misspec::none, {false, 1});
  const auto b = nsc::run_experiment(nsc::Setting::binary1, 800, 4, 3, nsc::Misspec::none, {false, 3});
  std::ostringstream sa, sb;
  nsc::write_trials_csv(sa, a);
  nsc::write_trials_csv(sb, b);
  CHECK(sa.str() == sb.str());
  std::ostringstream ta, tb;
  nsc::write_summary_csv(ta, a);
  nsc::write_summary_csv(tb, b);
  CHECK(ta.str() == tb.str());
}

TEST_CASE("settings without covariates refuse misspecification") {
  CHECK_THROWS_AS(nsc::setting_config(nsc::Setting::gauss1, nsc::Misspec::both), std::invalid_argument);
  CHECK_THROWS_AS(nsc::setting_config(nsc::Setting::binary1, nsc::Misspec::outcome), std::invalid_argument);
  CHECK_NOTHROW(nsc::setting_config(nsc::Setting::gauss2, nsc::Misspec::both));
  CHECK_THROWS_AS(nsc::parse_setting("gauss3"), std::invalid_argument);
}

}  // TEST_SUITE
