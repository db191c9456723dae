#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "nsc/basis.hpp"
#include "nsc/pattern.hpp"

namespace nsc {

/// Per-variable log-odds-ratio functions delta_h_i(L_{-i}, X).
///
/// The joint odds ratio relative to the complete pattern is
///   OR(r, l | x) = exp{ sum_i (1 - r_i) * delta_h_i(l_{-i}, x) },
/// so a positive delta_h_i makes L_i more likely to be missing.
class OddsRatioSpec {
 public:
  OddsRatioSpec() = default;
  OddsRatioSpec(int k, std::vector<LinearPredictor> delta_h, std::vector<double> reference = {});

  int k() const { return k_; }
  const LinearPredictor& delta_h(int i) const { return delta_h_[i]; }
  LinearPredictor& delta_h(int i) { return delta_h_[i]; }
  /// Reference point l0; zeros unless configured.
  const std::vector<double>& reference() const { return reference_; }

  /// delta_h_i evaluated on a full-length L vector (L_i itself is never read).
  double eval(int i, std::span<const double> l, std::span<const double> x) const;
  double log_odds_ratio(const Pattern& r, std::span<const double> l, std::span<const double> x) const;
  bool anchored() const;

 private:
  int k_ = 0;
  std::vector<LinearPredictor> delta_h_;
  std::vector<double> reference_;
};

/// delta_h_i at L_{-i} = `l_minus_i` (length K-1, variable order with i removed).
double delta_h_eval(const OddsRatioSpec& spec, int i, std::span<const double> l_minus_i,
                    std::span<const double> x);
double odds_ratio_eval(const OddsRatioSpec& spec, const Pattern& r, std::span<const double> l,
                       std::span<const double> x);

/// Missingness-indicator interactions for K = 3.
///
/// pair[k] is the log odds ratio between the two indicators other than R_k,
/// given R_k = 1; under no self-censoring it depends on (L_k, X) only.
/// triple is the three-way interaction, a function of X only.
struct ThetaTerms {
  std::array<LinearPredictor, 3> pair;
  LinearPredictor triple;
};

/// Parametric selection model for p(R | L, X) under no self-censoring:
///   logit p(R_i = 1 | R_{-i} = 1, L_{-i}, X) = h_{i,X}(X) - delta_h_i(L_{-i}, X)
/// combined through the odds-ratio factorization, with the K = 3 interaction
/// terms when present. All pattern quantities are computed on the log scale.
class SelectionModel {
 public:
  SelectionModel() = default;
  SelectionModel(OddsRatioSpec odds, std::vector<LinearPredictor> baseline,
                 std::optional<ThetaTerms> theta = std::nullopt);

  int k() const { return odds_.k(); }
  std::size_t n_patterns() const { return std::size_t{1} << k(); }
  const OddsRatioSpec& odds() const { return odds_; }
  OddsRatioSpec& odds() { return odds_; }
  const LinearPredictor& baseline(int i) const { return baseline_[i]; }
  LinearPredictor& baseline(int i) { return baseline_[i]; }
  const std::optional<ThetaTerms>& theta() const { return theta_; }
  std::optional<ThetaTerms>& theta() { return theta_; }

  /// log p(R_i=0 | R_{-i}=1, L_{-i}, X) / p(R_i=1 | R_{-i}=1, L_{-i}, X).
  double main_effect(int i, std::span<const double> l, std::span<const double> x) const;
  /// log pi_r / pi_J (the unnormalized log pattern weight, zero for r = 1).
  double log_numerator(const Pattern& r, std::span<const double> l, std::span<const double> x) const;
  /// All 2^K log numerators, indexed by pattern index.
  void log_numerators(std::span<const double> l, std::span<const double> x, std::span<double> out) const;
  /// Same, from precomputed main effects.
  void log_numerators(std::span<const double> main, std::span<const double> l, std::span<const double> x,
                      std::span<double> out) const;
  /// log OR(r, l | x) relative to the reference point, including any
  /// L-dependent interaction terms.
  double log_odds_ratio(const Pattern& r, std::span<const double> l, std::span<const double> x) const;

 private:
  OddsRatioSpec odds_;
  std::vector<LinearPredictor> baseline_;
  std::optional<ThetaTerms> theta_;
};

double pattern_prob(const SelectionModel& model, const Pattern& r, std::span<const double> l,
                    std::span<const double> x);
std::vector<double> pattern_prob_all(const SelectionModel& model, std::span<const double> l,
                                     std::span<const double> x);
/// Normalizes log numerators in place into probabilities; returns log C.
double normalize_log_weights(std::span<double> log_w);

}  // namespace nsc
