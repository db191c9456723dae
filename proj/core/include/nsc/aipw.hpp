#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsc/basis.hpp"
#include "nsc/dataset.hpp"
#include "nsc/functional.hpp"
#include "nsc/nuisance.hpp"
#include "nsc/odds_ratio.hpp"
#include "nsc/solvers.hpp"

namespace nsc {

enum class EstimatorKind { aipw, ipw, complete_case };
enum class BasisFamily { linear, saturated };
/// How a nuisance family sees X: as is, through the (log(1/X1+1/X2),
/// sqrt(X1 X2)) transform, or not at all.
enum class CovariateMap { identity, transformed, dropped };
/// Estimator of the odds-ratio parameters psi_LX. The doubly robust equation
/// only adds protection when X is present; without X the intercept-only
/// baseline is saturated and the logistic fit is used. `automatic` picks
/// between the two on that basis.
enum class OddsEstimator { automatic, doubly_robust, logistic };

/// Bases for every nuisance component. Column indices refer to the design
/// covariates, which are [X | transformed X] whenever a family is mapped.
struct NuisanceBases {
  std::vector<BasisSpec> delta_h;       // per variable, over (L_{-i}, X)
  std::vector<BasisSpec> baseline;      // per variable, over X
  std::vector<BasisSpec> feature_mean;  // per variable, over X; E[delta_h features | R=1, X]
  std::optional<ThetaBases> theta;      // K = 3 only
  std::function<BasisSpec(const Pattern&)> mixture;
};

struct EstimatorConfig {
  BasisFamily family = BasisFamily::linear;
  CovariateMap selection_covariates = CovariateMap::identity;  // baselines and interactions
  CovariateMap outcome_covariates = CovariateMap::identity;    // mixtures and feature means
  MixtureMode mixture_mode = MixtureMode::weighted_regression;
  OddsEstimator odds_estimator = OddsEstimator::automatic;
  /// Fit the K = 3 interaction terms when their patterns are supported.
  bool fit_theta = true;
  /// Floor on pi_J.
  double clip = 1e-6;
  bool compute_se = true;
  /// Reference point l0; zeros when empty.
  std::vector<double> reference;
  SolverOptions solver;
  /// Replaces the family defaults (after covariate mapping is decided by the caller).
  std::optional<NuisanceBases> bases;
  /// Known nuisances instead of fitted ones.
  std::optional<SelectionModel> selection_override;
  std::optional<PatternMixtureModel> mixture_override;
};

/// Default bases for K variables and p raw covariates under `config`.
NuisanceBases default_bases(int k, int p, const EstimatorConfig& config);

/// Raw X, or [X | transformed X] when any family is mapped to the transform.
Dataset design_covariates(const Dataset& data, const EstimatorConfig& config);

struct SolverDiagnostics {
  int newton_iterations = 0;
  double max_residual = 0.0;
};

struct EstimateReport {
  std::string functional;
  EstimatorKind estimator = EstimatorKind::aipw;
  double beta_hat = 0.0;
  double sandwich_se = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::pair<double, double>> bootstrap_ci;
  std::size_t n = 0;
  std::size_t n_complete = 0;
  std::size_t n_clipped_weights = 0;
  SupportTable patterns_used;
  std::vector<Pattern> dropped_patterns;
  std::vector<std::string> warnings;
  SolverDiagnostics diagnostics;
  std::optional<SelectionModel> selection;
  std::optional<PatternMixtureModel> mixture;
};

/// All estimating equations of the estimator stacked into one system over
/// Omega = (selection logits, feature means, odds ratios, interactions,
/// mixture regressions, beta), with per-record values V(Omega).
class StackedEquations {
 public:
  struct Block {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
  };

  StackedEquations(StackedEquations&&) noexcept;
  StackedEquations& operator=(StackedEquations&&) noexcept;
  ~StackedEquations();

  const Eigen::VectorXd& omega_hat() const;
  const std::vector<Block>& blocks() const;
  Eigen::Index size() const;
  /// n x size matrix of per-record estimating functions.
  Eigen::MatrixXd scores(const Eigen::VectorXd& omega) const;
  /// Weighted mean of scores; zero at omega_hat up to solver tolerance.
  Eigen::VectorXd mean(const Eigen::VectorXd& omega) const;
  /// Central-difference Jacobian of mean(); blocks that cannot depend on a
  /// parameter are not re-evaluated.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& omega, double rel_step = 1e-5) const;
  const Dataset& data() const;

  /// The estimate report without standard errors.
  const EstimateReport& report() const;

  struct Impl;

 private:
  explicit StackedEquations(std::unique_ptr<Impl> impl);
  friend StackedEquations build_stacked_equations(const Dataset&, const TargetFunctional&, const EstimatorConfig&,
                                                  EstimatorKind);
  std::unique_ptr<Impl> impl_;
};

/// Fits every nuisance and beta, returning the stacked system at its root.
StackedEquations build_stacked_equations(const Dataset& data, const TargetFunctional& functional,
                                         const EstimatorConfig& config, EstimatorKind kind = EstimatorKind::aipw);

/// (1/n) A^{-1} B A^{-T} for the stacked system at omega.
Eigen::MatrixXd sandwich_variance(const StackedEquations& equations, const Eigen::VectorXd& omega);

EstimateReport estimate(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config,
                        EstimatorKind kind);
EstimateReport estimate_aipw(const Dataset& data, const TargetFunctional& functional,
                             const EstimatorConfig& config = {});
EstimateReport estimate_ipw(const Dataset& data, const TargetFunctional& functional,
                            const EstimatorConfig& config = {});
EstimateReport estimate_complete_case(const Dataset& data, const TargetFunctional& functional);

struct BootstrapResult {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> replicates;  // successful replicates in replicate order
  std::size_t n_failed = 0;
};

/// Percentile interval from B nonparametric bootstrap replicates, nuisances
/// refit per replicate. Replicate t resamples with seed derive_seed(seed, t).
/// Throws NumericalError when more than 10% of replicates fail.
BootstrapResult bootstrap_ci(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config,
                             int replicates, std::uint64_t seed, double alpha = 0.05,
                             EstimatorKind kind = EstimatorKind::aipw, int threads = 1);

/// Type-7 sample quantile of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double prob);

struct JointTable {
  int k = 0;
  std::vector<double> raw;          // per cell, cell index bit i = L_{i+1}
  std::vector<double> probability;  // raw / normalization
  double normalization = 1.0;
};

/// AIPW estimate of every cell probability of a binary L, renormalized.
JointTable joint_distribution_binary(const Dataset& data, const EstimatorConfig& config = {},
                                     EstimatorKind kind = EstimatorKind::aipw);

/// Odds ratio between L_i and L_j (0-based) from the 2 x 2 margin of a table.
double cell_odds_ratio(const JointTable& table, int i, int j);

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& text);

}  // namespace nsc
