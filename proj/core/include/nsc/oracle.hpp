#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsc/discrete_law.hpp"
#include "nsc/functional.hpp"
#include "nsc/nuisance.hpp"
#include "nsc/odds_ratio.hpp"

namespace nsc {

/// Exact E[b(L)] by enumeration.
double true_functional(const DiscreteLaw& law, const TargetFunctional& b);

/// Largest |log OR(R_i, L_i | R_{-i}, L_{-i}, X)| over i and every context;
/// zero exactly when no self-censoring holds.
double verify_nsc(const DiscreteLaw& law);

struct IdentificationReport {
  /// max |p_hat(r | l, x) - p(r | l, x)| with p_hat rebuilt from observed-data cells only.
  double reconstruction_error = 0.0;
  double beta_true = 0.0;
  /// beta through OR-weighted complete-case pattern-mixture means.
  double beta_reconstructed = 0.0;
  double beta_error = 0.0;
};

IdentificationReport verify_identification(const DiscreteLaw& law, const TargetFunctional& b);

struct SymmetryReport {
  /// Pairwise odds ratios between indicators computed from either conditional.
  double pair_asymmetry = 0.0;
  /// Variation of the pairwise odds ratio given R_k = 1 over (L_i, L_j).
  double pair_l_dependence = 0.0;
  /// Spread of the three-way interaction across the three index pairings.
  double gamma_pairing_spread = 0.0;
  /// Variation of the three-way interaction over L.
  double gamma_l_variation = 0.0;
};

/// K = 3 only.
SymmetryReport verify_symmetry(const DiscreteLaw& law);

/// Consistency of enumerated quantities with the parametric machinery:
/// table normalization, pattern probabilities from the selection model, and
/// pattern-mixture means from the odds-ratio formula. Returns the max discrepancy.
double verify_enumeration_closure(const DiscreteLaw& law, const TargetFunctional& b);

/// Exact selection model of an NSC law (saturated bases, reference zero).
/// Throws std::invalid_argument when the law violates no self-censoring or
/// has interactions beyond what the model holds.
SelectionModel selection_model_of(const DiscreteLaw& law);

/// Pattern-mixture means E[b | r, l_(r), x] under the law, or, when `odds`
/// is given, the OR-weighted complete-case means implied by that model.
PatternMixtureModel mixture_model_of(const DiscreteLaw& law, const TargetFunctional& b,
                                     const SelectionModel* odds = nullptr);

struct InfluenceReport {
  double phi_odds = 0.0;  // population mean of the AIPW estimating function
  double phi_adj = 0.0;   // population mean of the projection adjustment
};

/// Both evaluated at beta_true + beta_shift with the true nuisances.
InfluenceReport verify_if_mean_zero(const DiscreteLaw& law, const TargetFunctional& b, double beta_shift = 0.0);

enum class DrScenario { both_correct, pi_wrong, pm_wrong, both_wrong, or_wrong };
std::string to_string(DrScenario s);

/// Population mean of the AIPW equation at the true beta when the named
/// nuisances are shifted by 0.3 in every coefficient.
double verify_double_robustness(const DiscreteLaw& law, DrScenario scenario, const TargetFunctional& b);

/// Sup-norm of the population mean of the interaction equations at the true
/// parameters, with the first three-way coefficient shifted by `theta_shift`.
double verify_u_theta(const DiscreteLaw& law, double theta_shift = 0.0);

enum class OddsEquationScenario { correct, baseline_wrong, means_wrong, both_wrong };

/// Sup-norm over variables of the population mean of the doubly robust
/// odds-ratio equation at the true odds ratio.
double verify_odds_ratio_equation(const DiscreteLaw& law, OddsEquationScenario scenario);

struct OracleCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool must_exceed = false;  // pass when value > threshold instead of value <= threshold
  bool pass = false;
};

struct OracleSuiteOptions {
  std::uint64_t seed = 20240601;
  int nsc_laws = 20;
  int self_censoring_laws = 5;
};

/// Randomized NSC laws (K = 3, p alternating 0 and 2) plus self-censoring
/// controls. Each check reports the worst value over its laws.
std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& options = {});

}  // namespace nsc
