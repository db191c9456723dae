#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsc/aipw.hpp"
#include "nsc/functional.hpp"
#include "nsc/simgen.hpp"

namespace nsc {

enum class Setting { gauss1, gauss2, binary1, binary2 };
/// Which nuisance family sees distorted covariates.
enum class Misspec { none, outcome, missingness, both };

std::string to_string(Setting s);
std::string to_string(Misspec m);
Setting parse_setting(const std::string& text);
Misspec parse_misspec(const std::string& text);

/// Exact E[b(L)] of a registered setting.
double setting_truth(Setting s);
TargetFunctional setting_functional(Setting s);
/// Estimator configuration; throws std::invalid_argument when the setting
/// has no covariates to misspecify.
EstimatorConfig setting_config(Setting s, Misspec m);
SimulatedData simulate_setting(Setting s, std::size_t n, std::uint64_t seed);

struct ExperimentOptions {
  bool compute_se = false;
  int threads = 1;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double aipw = 0.0;
  double ipw = 0.0;
  double cc = 0.0;
  double aipw_se = 0.0;
  bool aipw_ok = false;
  bool ipw_ok = false;
  bool cc_ok = false;
  std::string error;
};

struct EstimatorSummary {
  std::string estimator;
  double mean = 0.0;
  double bias = 0.0;
  double percent_bias = 0.0;  // 100 * bias / truth
  double mse = 0.0;
  double variance = 0.0;     // sample variance across trials
  double mc_se = 0.0;        // sqrt(variance / completed)
  double mean_se2 = 0.0;     // mean squared sandwich SE (AIPW with SEs only)
  std::size_t completed = 0;
  std::size_t failed = 0;
};

struct ExperimentResult {
  Setting setting = Setting::gauss1;
  Misspec misspec = Misspec::none;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double truth = 0.0;
  std::vector<TrialResult> trials;
  std::vector<EstimatorSummary> summaries;  // aipw, ipw, cc
  /// More than 5% of AIPW trials failed.
  bool failure_rate_exceeded = false;

  const EstimatorSummary& summary(const std::string& estimator) const;
};

/// Trial t draws data with derive_seed(seed, t); results do not depend on the thread count.
ExperimentResult run_experiment(Setting s, std::size_t n, std::size_t trials, std::uint64_t seed, Misspec m,
                                const ExperimentOptions& options = {});

/// Summary statistics of a set of estimates with compensated summation.
EstimatorSummary summarize(const std::string& estimator, const std::vector<double>& values, double truth,
                           std::size_t failed);

void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_trials_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace nsc
