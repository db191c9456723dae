#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "nsc/discrete_law.hpp"
#include "nsc/errors.hpp"
#include "nsc/nuisance.hpp"
#include "nsc/oracle.hpp"
#include "nsc/solvers.hpp"

namespace {

struct SatBases {
  std::vector<nsc::BasisSpec> delta, baseline, means;
  nsc::ThetaBases theta;
};

SatBases saturated_bases(int p) {
  std::vector<int> cols;
  for (int m = 0; m < p; ++m) cols.push_back(m);
  SatBases b;
  for (int i = 0; i < 3; ++i) {
    b.delta.push_back(nsc::bases::saturated(3, 7u & ~(1u << i), cols, true, false));
    b.baseline.push_back(nsc::bases::saturated(3, 0, cols, false, true));
    b.means.push_back(nsc::bases::saturated(3, 0, cols, false, true));
    b.theta.pair[i] = nsc::bases::saturated(3, 1u << i, cols, false, true);
  }
  b.theta.triple = nsc::bases::saturated(3, 0, cols, false, true);
  return b;
}

nsc::SelectionModel fitted_main_effects(const nsc::Dataset& data, const SatBases& b) {
  std::vector<nsc::LinearPredictor> dh, base;
  for (int i = 0; i < 3; ++i) {
    const auto fit = nsc::fit_univariate_selection(data, i, b.delta[i], b.baseline[i]);
    const auto qd = static_cast<Eigen::Index>(b.delta[i].size());
    dh.emplace_back(b.delta[i], fit.coefficients.head(qd));
    base.emplace_back(b.baseline[i], fit.coefficients.tail(fit.coefficients.size() - qd));
  }
  return nsc::SelectionModel(nsc::OddsRatioSpec(3, dh), base);
}

}  // namespace

TEST_SUITE("nuisance-fit") {

TEST_CASE("logistic regression recovers its coefficients on a large sample") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const int n = 200000;
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  const Eigen::Vector3d beta(-0.4, 0.8, -1.2);
  for (int r = 0; r < n; ++r) {
    design.row(r) << 1.0, z(gen), z(gen);
    const double p = 1.0 / (1.0 + std::exp(-design.row(r).dot(beta)));
    y[r] = u(gen) < p ? 1.0 : 0.0;
  }
  const auto fit = nsc::fit_logistic(design, y, Eigen::VectorXd::Ones(n));
  REQUIRE(fit.converged);
  for (int j = 0; j < 3; ++j) CHECK(fit.coefficients[j] == doctest::Approx(beta[j]).epsilon(0.03));
  CHECK(fit.covariance_contribution.rows() == 3);
}

TEST_CASE("constant response is reported as separation") {
  Eigen::MatrixXd design(4, 2);
  design << 1, 0.1, 1, 0.2, 1, 0.3, 1, 0.4;
  CHECK_THROWS_AS(nsc::fit_logistic(design, Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4)),
                  nsc::SeparationError);
}

TEST_CASE("perfectly separated data trips the coefficient bound") {
  Eigen::MatrixXd design(6, 2);
  Eigen::VectorXd y(6);
  for (int r = 0; r < 6; ++r) {
    design.row(r) << 1.0, r - 2.5;
    y[r] = r < 3 ? 0.0 : 1.0;
  }
  CHECK_THROWS_AS(nsc::fit_logistic(design, y, Eigen::VectorXd::Ones(6)), nsc::SeparationError);
}

TEST_CASE("small slopes on large-scale covariates are not mistaken for separation") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const int n = 20000;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    const double x = 1000.0 + 0.01 * z(gen);
    design.row(r) << 1.0, x;
    y[r] = u(gen) < 1.0 / (1.0 + std::exp(-60.0 * (x - 1000.0))) ? 1.0 : 0.0;
  }
  const auto fit = nsc::fit_logistic(design, y, Eigen::VectorXd::Ones(n));
  CHECK(fit.converged);
  CHECK(fit.coefficients[1] == doctest::Approx(60.0).epsilon(0.1));
}

TEST_CASE("newton solves a smooth nonlinear system") {
  auto f = [](const Eigen::VectorXd& t) {
    Eigen::VectorXd v(2);
    v << std::exp(t[0]) - 2.0, t[0] * t[1] - 1.0;
    return v;
  };
  // the Jacobian is singular wherever t0 = 0
  const auto fit = nsc::solve_newton(f, Eigen::VectorXd::Constant(2, 0.5));
  REQUIRE(fit.converged);
  CHECK(fit.coefficients[0] == doctest::Approx(std::log(2.0)));
  CHECK(fit.coefficients[1] == doctest::Approx(1.0 / std::log(2.0)));
}

TEST_CASE("rank-deficient least squares is rejected") {
  Eigen::MatrixXd design(3, 2);
  design << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(nsc::weighted_least_squares(design, Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(3)),
                  nsc::SingularError);
}

TEST_CASE("saturated univariate fits recover the main effects of an NSC law") {
  for (int p : {0, 2}) {
    const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, p, 100 + p));
    const auto data = law.observed_data();
    const auto b = saturated_bases(p);
    const auto fitted = fitted_main_effects(data, b);
    const auto truth = nsc::selection_model_of(law);
    double err = 0.0;
    for (std::uint32_t x = 0; x < (1u << p); ++x) {
      for (std::uint32_t l = 0; l < 8; ++l) {
        const auto lv = law.l_values(l);
        const auto xv = law.x_values(x);
        for (int i = 0; i < 3; ++i) {
          err = std::max(err, std::abs(fitted.main_effect(i, lv, xv) - truth.main_effect(i, lv, xv)));
        }
      }
    }
    CHECK(err < 1e-7);
  }
}

TEST_CASE("interaction equations return zero on an independence law") {
  const auto law = nsc::build_discrete_law(nsc::mcar_components(3, 0));
  const auto data = law.observed_data();
  const auto b = saturated_bases(0);
  const auto fit = nsc::fit_theta_ipw(data, nsc::selection_model_of(law), b.theta);
  REQUIRE(fit.converged);
  CHECK(fit.coefficients.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("interaction equations recover the pattern law on random NSC laws") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const int p = seed == 3 ? 2 : 0;
    const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, p, seed));
    const auto data = law.observed_data();
    const auto b = saturated_bases(p);
    const auto truth = nsc::selection_model_of(law);
    const auto fit = nsc::fit_theta_ipw(data, truth, b.theta);
    REQUIRE(fit.converged);
    nsc::SelectionModel model = truth;
    model.theta() = nsc::theta_terms(b.theta, fit.coefficients);
    double err = 0.0;
    for (std::uint32_t x = 0; x < (1u << p); ++x) {
      for (std::uint32_t l = 0; l < 8; ++l) {
        const auto a = nsc::pattern_prob_all(model, law.l_values(l), law.x_values(x));
        for (std::uint32_t r = 0; r < 8; ++r) {
          const double direct = law.prob(r, l, x) / law.lx_prob(l, x);
          err = std::max(err, std::abs(a[r] - direct));
        }
      }
    }
    CHECK(err < 1e-8);
    CHECK(nsc::verify_u_theta(law) < 1e-12);
  }
}

TEST_CASE("doubly robust odds ratio survives a wrong baseline") {
  const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, 2, 77));
  const auto data = law.observed_data();
  const auto b = saturated_bases(2);
  nsc::SolverOptions tight;
  tight.tol = 1e-12;
  for (int i = 0; i < 3; ++i) {
    const auto uni = nsc::fit_univariate_selection(data, i, b.delta[i], b.baseline[i]);
    const auto qd = static_cast<Eigen::Index>(b.delta[i].size());
    Eigen::VectorXd wrong = uni.coefficients.tail(uni.coefficients.size() - qd);
    wrong.array() += 0.3;
    const auto fm = nsc::fit_feature_means(data, b.delta[i], b.means[i]);
    nsc::FeatureMeanModel means{b.means[i], Eigen::Map<const Eigen::MatrixXd>(
                                                fm.coefficients.data(),
                                                static_cast<Eigen::Index>(b.means[i].size()), qd)};
    const auto dr = nsc::fit_or_doubly_robust(data, i, b.delta[i], nsc::LinearPredictor(b.baseline[i], wrong), means,
                                              tight);
    REQUIRE(dr.converged);
    CHECK((dr.coefficients - uni.coefficients.head(qd)).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("odds ratio equations are mean zero under one wrong component") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto law = nsc::build_discrete_law(nsc::random_nsc_components(3, 2, 500 + seed));
    CHECK(nsc::verify_odds_ratio_equation(law, nsc::OddsEquationScenario::baseline_wrong) < 1e-10);
    CHECK(nsc::verify_odds_ratio_equation(law, nsc::OddsEquationScenario::means_wrong) < 1e-10);
  }
}

}  // TEST_SUITE
