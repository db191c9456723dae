#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nsc/basis.hpp"
#include "nsc/dataset.hpp"
#include "nsc/functional.hpp"
#include "nsc/odds_ratio.hpp"
#include "nsc/solvers.hpp"

namespace nsc {

/// Basis features per record. Rows whose pattern hides a coordinate the basis
/// reads are left at zero, so indicator-weighted sums never see NaN.
Eigen::MatrixXd design_matrix(const BasisSpec& basis, const Dataset& data);
/// Features with L fixed at `l` for every record; X varies per record.
Eigen::MatrixXd design_matrix_at(const BasisSpec& basis, const Dataset& data, std::span<const double> l);

Eigen::VectorXd weight_vector(const Dataset& data);
Eigen::VectorXd pattern_indicator(const Dataset& data, const Pattern& r);
/// R_i for every record.
Eigen::VectorXd observed_indicator(const Dataset& data, int i);
/// 1(R_{-i} = 1) for every record.
Eigen::VectorXd others_observed(const Dataset& data, int i);

/// E[d | R = 1, X] for the odds-ratio features d, linear in an X basis.
struct FeatureMeanModel {
  BasisSpec x_basis;
  Eigen::MatrixXd coef;  // x_basis.size() x number of features
};

/// Interaction bases for K = 3 and the instruments of their estimating
/// equations. Instruments default to the bases themselves.
struct ThetaBases {
  std::array<BasisSpec, 3> pair;
  BasisSpec triple;
  std::optional<std::array<BasisSpec, 4>> g;

  std::size_t size() const { return pair[0].size() + pair[1].size() + pair[2].size() + triple.size(); }
};

/// Per-record design pieces for the interaction equations.
struct ThetaDesign {
  Eigen::VectorXd complete;
  std::array<Eigen::VectorXd, 4> in_pattern;  // 100, 010, 001, 000
  std::array<Eigen::MatrixXd, 4> basis;
  std::array<Eigen::MatrixXd, 4> g;
};

ThetaDesign make_theta_design(const Dataset& data, const ThetaBases& bases);
ThetaTerms theta_terms(const ThetaBases& bases, const Eigen::VectorXd& coef);

/// Per-record estimating functions, one row per record.
namespace ee {

/// Score of logit P(R_i=1 | R_{-i}=1) = h psi_x - d psi_lx, psi = (psi_lx, psi_x).
Eigen::MatrixXd univariate_selection(const Eigen::VectorXd& eligible, const Eigen::VectorXd& r_i,
                                     const Eigen::MatrixXd& d, const Eigen::MatrixXd& h,
                                     const Eigen::VectorXd& psi);

/// Normal equations of the complete-case regressions of d on hm; columns are
/// vec(m) in column-major order.
Eigen::MatrixXd feature_means(const Eigen::VectorXd& complete, const Eigen::MatrixXd& d,
                              const Eigen::MatrixXd& hm, const Eigen::MatrixXd& m);

/// 1(R_{-i}=1) (R_i - expit(h psi_x)) (d - E[d|R=1,X]) exp{-(1-R_i) d psi_lx}.
Eigen::MatrixXd odds_ratio_dr(const Eigen::VectorXd& eligible, const Eigen::VectorXd& r_i,
                              const Eigen::MatrixXd& d, const Eigen::MatrixXd& h, const Eigen::VectorXd& psi_x,
                              const Eigen::MatrixXd& hm, const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& psi_lx);

/// g_k [1(R=1) pi_{r_k}/pi_J - 1(R=r_k)] for the three pairs and the triple;
/// `main` holds the main effects (n x 3), read on complete rows only.
Eigen::MatrixXd theta_ipw(const ThetaDesign& design, const Eigen::MatrixXd& main, const Eigen::VectorXd& theta);

/// 1(R=1) OR z (b - z mu).
Eigen::MatrixXd pattern_mixture(const Eigen::VectorXd& complete, const Eigen::VectorXd& odds_ratio,
                                const Eigen::MatrixXd& z, const Eigen::VectorXd& b, const Eigen::VectorXd& mu);

}  // namespace ee

FitResult fit_univariate_selection(const Dataset& data, int i, const BasisSpec& delta_basis,
                                   const BasisSpec& baseline_basis, const SolverOptions& options = {});

FitResult fit_feature_means(const Dataset& data, const BasisSpec& features, const BasisSpec& x_basis);

/// Doubly robust estimate of psi_{i,LX}; consistent when either the baseline
/// or the feature-mean model is correct.
FitResult fit_or_doubly_robust(const Dataset& data, int i, const BasisSpec& delta_basis,
                               const LinearPredictor& baseline, const FeatureMeanModel& means,
                               const SolverOptions& options = {}, Eigen::VectorXd start = {});

/// Joint root of the K = 3 interaction equations given the main effects of
/// `model` (its own interaction terms are ignored).
FitResult fit_theta_ipw(const Dataset& data, const SelectionModel& model, const ThetaBases& bases,
                        const SolverOptions& options = {});

enum class MixtureMode { weighted_regression, ratio };

/// E[b(L) | R = r, L_(r), X] as a linear predictor over a basis on the
/// observed coordinates of r.
struct MixtureComponent {
  Pattern pattern;
  BasisSpec basis;
  MixtureMode mode = MixtureMode::weighted_regression;
  Eigen::VectorXd coef;
  Eigen::VectorXd denominator_coef;  // ratio mode only

  double predict(std::span<const double> l, std::span<const double> x) const;
};

class PatternMixtureModel {
 public:
  void set(MixtureComponent component);
  const MixtureComponent* find(const Pattern& r) const;
  double predict(const Pattern& r, std::span<const double> l, std::span<const double> x) const;
  const std::vector<MixtureComponent>& components() const { return components_; }

 private:
  std::vector<MixtureComponent> components_;
};

/// Complete-case regression of b(L) on `basis` weighted by OR(r, L | X).
MixtureComponent fit_pattern_mixture(const Dataset& data, const Pattern& r, const SelectionModel& model,
                                     const TargetFunctional& b, const BasisSpec& basis,
                                     MixtureMode mode = MixtureMode::weighted_regression);

}  // namespace nsc
