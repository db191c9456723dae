#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsc/dataset.hpp"
#include "nsc/discrete_law.hpp"
#include "nsc/odds_ratio.hpp"

namespace nsc {

/// Conditional Gaussian chain graph: R ~ categorical(weights) and
/// (L, X) | R = r ~ N(Sigma0 h(r), Sigma0).
struct GaussianCGParams {
  int k = 3;
  int p = 0;
  std::vector<double> pattern_weights;  // by pattern index
  Eigen::MatrixXd sigma0;               // (K + p) square
  std::vector<Eigen::VectorXd> h;       // by pattern index, length K + p

  Eigen::VectorXd mu0(const Pattern& r) const { return sigma0 * h[r.index()]; }
  /// E[L_{j+1}] under the mixture.
  double truth(int j) const;
  /// Largest |h_i(r with bit i set) - h_i(r with bit i cleared)| over i < K.
  double nsc_violation() const;
  /// Throws std::invalid_argument on shape, weight or positive-definiteness problems.
  void validate() const;

  static GaussianCGParams gauss1();
  static GaussianCGParams gauss2();
};

/// Pattern weights 10, 9, 8, 7, 6, 5, 10, 4 over 59 in the order
/// 100, 010, 110, 001, 101, 011, 111, 000.
std::vector<double> default_pattern_weights();

struct SimulatedData {
  Dataset full;    // every L observed
  Dataset masked;  // L_i hidden where r_i = 0
};

SimulatedData sample_gaussian_cg(const GaussianCGParams& params, std::size_t n, std::uint64_t seed);

/// Binary K = 3 law with the fixed odds-ratio functions delta_h_i and a
/// calibrated baseline:
///   a_i(l, x) = c_i + delta_h_i(l_{-i}, x)          (log odds of R_i = 0 given R_{-i} = 1)
///   p(l | x) proportional to exp(alpha sum l + gamma sum_{i<j} l_i l_j + 0.3 x1 l1 - 0.2 x2 l3)
///   pairwise missingness interaction `pair`; all-missing pattern gets pair + triple.
struct BinaryORParams {
  int p = 0;  // 0 or 2
  std::array<double, 3> c{};
  double alpha = 0.0;
  double gamma = 0.0;
  double pair = 0.0;
  double triple = 0.0;
  std::array<double, 4> x_prob{0.3, 0.2, 0.25, 0.25};  // by x1 + 2 x2
  double x1_l1 = 0.3;
  double x2_l3 = -0.2;

  /// delta_h_i(l_{-i}, x) on a full-length l; X terms vanish when p = 0.
  double delta_h(int i, std::span<const double> l, std::span<const double> x) const;
  LawComponents components() const;
  DiscreteLaw law() const { return build_discrete_law(components()); }
  /// The delta_h functions as an odds-ratio specification (reference zeros).
  OddsRatioSpec odds_ratio_spec() const;

  static BinaryORParams binary1();
  static BinaryORParams binary2();
};

SimulatedData sample_binary_or(const BinaryORParams& params, std::size_t n, std::uint64_t seed);
/// Exact draws from an enumerated law.
SimulatedData sample_law(const DiscreteLaw& law, std::size_t n, std::uint64_t seed);

/// (X1, X2) -> (log(1/X1 + 1/X2), sqrt(X1 X2)); requires X1, X2 > 0.
std::array<double, 2> misspecify_covariates(std::array<double, 2> x);

}  // namespace nsc
