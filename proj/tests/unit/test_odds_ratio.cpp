#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nsc/basis.hpp"
#include "nsc/model_io.hpp"
#include "nsc/odds_ratio.hpp"
#include "nsc/simgen.hpp"

using nsc::LinearPredictor;
using nsc::Pattern;

namespace {

const int kAll[] = {0, 1};

// delta_h_i linear in L_{-i} plus an L x X interaction; baselines linear in X.
nsc::SelectionModel random_model(std::uint64_t seed, bool with_theta) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 0.7);
  auto coef = [&](std::size_t n) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (auto& v : c) v = z(gen);
    return c;
  };
  std::vector<LinearPredictor> dh, base;
  for (int i = 0; i < 3; ++i) {
    const std::uint32_t others = 7u & ~(1u << i);
    auto b = nsc::bases::linear_in(3, others, {}, false);
    dh.emplace_back(b, coef(b.size()));
    auto h = nsc::bases::covariates(kAll, true);
    base.emplace_back(h, coef(h.size()));
  }
  std::optional<nsc::ThetaTerms> theta;
  if (with_theta) {
    nsc::ThetaTerms t;
    for (int j = 0; j < 3; ++j) {
      auto b = nsc::bases::linear_in(3, 1u << j, kAll, true);
      t.pair[j] = LinearPredictor(b, coef(b.size()));
    }
    auto b = nsc::bases::covariates(kAll, true);
    t.triple = LinearPredictor(b, coef(b.size()));
    theta = t;
  }
  return nsc::SelectionModel(nsc::OddsRatioSpec(3, dh), base, theta);
}

}  // namespace

TEST_SUITE("odds-ratio-engine") {

TEST_CASE("independence with zero logits gives the uniform multinomial") {
  std::vector<LinearPredictor> dh, base;
  for (int i = 0; i < 3; ++i) {
    dh.emplace_back(nsc::bases::linear_in(3, 7u & ~(1u << i), {}, false));
    base.emplace_back(nsc::bases::covariates({}, true));
  }
  const nsc::SelectionModel m(nsc::OddsRatioSpec(3, dh), base);
  const double l[3] = {0.3, -1.0, 2.0};
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    CHECK(nsc::pattern_prob(m, Pattern(idx, 3), l, {}) == doctest::Approx(0.125).epsilon(1e-14));
  }
}

TEST_CASE("independence factorization holds without interactions") {
  const auto m = random_model(3, false);
  const double l[3] = {0.2, 1.1, -0.4};
  const double x[2] = {0.5, -1.5};
  const auto probs = nsc::pattern_prob_all(m, l, x);
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    double expect = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double p_miss = 1.0 / (1.0 + std::exp(-m.main_effect(i, l, x)));
      expect *= ((idx >> i) & 1u) ? 1.0 - p_miss : p_miss;
    }
    CHECK(probs[idx] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("pattern probabilities sum to one") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> z(0.0, 2.0);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto m = random_model(seed, seed % 2 == 0);
    const double l[3] = {z(gen), z(gen), z(gen)};
    const double x[2] = {z(gen), z(gen)};
    const auto probs = nsc::pattern_prob_all(m, l, x);
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : probs) CHECK(p > 0.0);
  }
}

TEST_CASE("odds ratio is one at the reference point") {
  const auto m = random_model(5, true);
  const std::vector<double> l0 = {0.0, 0.0, 0.0};
  const double x[2] = {1.3, -0.2};
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    CHECK(nsc::odds_ratio_eval(m.odds(), Pattern(idx, 3), l0, x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  std::vector<LinearPredictor> dh;
  const std::vector<double> ref = {1.0, 2.0, 3.0};
  for (int i = 0; i < 3; ++i) {
    auto b = nsc::bases::linear_in(3, 7u & ~(1u << i), {}, false, ref);
    dh.emplace_back(b, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(b.size()), 0.7));
  }
  const nsc::OddsRatioSpec spec(3, dh, ref);
  CHECK(spec.anchored());
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    CHECK(nsc::odds_ratio_eval(spec, Pattern(idx, 3), ref, {}) == doctest::Approx(1.0));
  }
}

TEST_CASE("larger delta_h coefficient raises the odds ratio of patterns missing that variable") {
  auto b = nsc::bases::linear_in(3, 6u, {}, false);
  std::vector<LinearPredictor> low, high;
  for (int i = 0; i < 3; ++i) {
    auto bi = nsc::bases::linear_in(3, 7u & ~(1u << i), {}, false);
    low.emplace_back(bi, Eigen::VectorXd::Constant(2, 0.2));
    high.emplace_back(bi, Eigen::VectorXd::Constant(2, 0.2));
  }
  high[0].coef[0] = 0.9;
  const nsc::OddsRatioSpec lo(3, low), hi(3, high);
  const double l[3] = {0.0, 1.5, 0.5};
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    const Pattern r(idx, 3);
    if (r.observed(0)) {
      CHECK(nsc::odds_ratio_eval(hi, r, l, {}) == doctest::Approx(nsc::odds_ratio_eval(lo, r, l, {})));
    } else {
      CHECK(nsc::odds_ratio_eval(hi, r, l, {}) > nsc::odds_ratio_eval(lo, r, l, {}));
    }
  }
}

TEST_CASE("a delta_h reading its own variable is rejected") {
  std::vector<LinearPredictor> dh;
  for (int i = 0; i < 3; ++i) dh.emplace_back(nsc::bases::linear_in(3, 7u, {}, false));
  CHECK_THROWS_AS(nsc::OddsRatioSpec(3, dh), std::invalid_argument);
}

TEST_CASE("selection models survive a serialization round trip") {
  const auto m = random_model(9, true);
  const auto text = nsc::serialize(m);
  const auto back = nsc::parse_selection_model(text);
  CHECK(nsc::serialize(back) == text);
  const double l[3] = {0.4, -0.3, 1.2};
  const double x[2] = {0.1, 0.9};
  const auto a = nsc::pattern_prob_all(m, l, x);
  const auto b = nsc::pattern_prob_all(back, l, x);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
}

TEST_CASE("binary preset odds ratios by direct substitution") {
  const auto spec = nsc::BinaryORParams::binary2().odds_ratio_spec();
  const std::vector<double> l{1.0, 1.0, 0.0};
  const std::vector<double> x{0.0, 0.0};
  CHECK(spec.eval(2, l, x) == doctest::Approx(0.5).epsilon(1e-15));
  // 0.5 + 0.5 + 0.2 - 0.9 + 0.7 at L1 = 1, L2 = 0, X = (1, 1)
  CHECK(spec.eval(2, std::vector<double>{1.0, 0.0, 0.0}, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nsc::odds_ratio_eval(spec, nsc::Pattern::parse("110"), l, x) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

}  // TEST_SUITE
