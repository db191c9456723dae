#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "nsc/dataset.hpp"

namespace nsc {

using CellFn = std::function<double(std::span<const double> l, std::span<const double> x)>;

/// Binary law of (R, L, X) from log-linear missingness terms:
///   log p(R = r | l, x) / p(R = 1 | l, x) = sum over nonempty S within the
///   missing set of r of lambda_S(l, x),
/// where lambda_{i} = main[i] is the log odds of R_i = 0 given R_{-i} = 1.
/// No self-censoring holds when lambda_S never reads L_S.
struct LawComponents {
  int k = 3;
  int p = 0;
  /// Unnormalized p(L, X) by cell index l | (x << k); empty means uniform.
  std::vector<double> lx_weights;
  std::vector<CellFn> main;
  /// Missing-set mask (two or more bits) to lambda_S.
  std::map<std::uint32_t, CellFn> interactions;
};

/// Maximum number of (R, L, X) cells a law may enumerate.
inline constexpr int kMaxLawBits = 14;

class DiscreteLaw {
 public:
  DiscreteLaw() = default;

  int k() const { return k_; }
  int p() const { return p_; }
  std::size_t n_cells() const { return table_.size(); }
  /// Cell index r | (l << k) | (x << 2k).
  std::size_t cell(std::uint32_t r, std::uint32_t l, std::uint32_t x) const {
    return r | (static_cast<std::size_t>(l) << k_) | (static_cast<std::size_t>(x) << (2 * k_));
  }
  double prob(std::uint32_t r, std::uint32_t l, std::uint32_t x) const { return table_[cell(r, l, x)]; }
  double lx_prob(std::uint32_t l, std::uint32_t x) const { return lx_[l | (static_cast<std::size_t>(x) << k_)]; }
  const std::vector<double>& table() const { return table_; }
  const LawComponents& components() const { return components_; }

  /// lambda_S at (l, x) from the components (zero when S has no term).
  double lambda(std::uint32_t subset, std::uint32_t l, std::uint32_t x) const;
  /// log p(r | l, x) / p(1 | l, x).
  double log_numerator(std::uint32_t missing, std::uint32_t l, std::uint32_t x) const;

  /// Observed-data cells (r, l_(r), x) weighted by their probability.
  Dataset observed_data() const;
  /// Every (l, x) cell fully observed, weighted by p(l, x).
  Dataset full_data() const;

  std::vector<double> l_values(std::uint32_t l) const;
  std::vector<double> x_values(std::uint32_t x) const;

 private:
  friend DiscreteLaw build_discrete_law(LawComponents components, bool require_positivity);
  int k_ = 0;
  int p_ = 0;
  LawComponents components_;
  std::vector<double> lx_;
  std::vector<double> table_;
};

/// Enumerates the joint table; throws PositivityError when some p(R=1 | l, x)
/// underflows to zero and positivity is demanded.
DiscreteLaw build_discrete_law(LawComponents components, bool require_positivity = true);

/// Random law satisfying no self-censoring: every lambda_S is a random
/// function of (L_{-S}, X) with entries of size about `scale`.
LawComponents random_nsc_components(int k, int p, std::uint64_t seed, double scale = 0.8);

/// Same, with R_i's main effect also reading L_i for every i.
LawComponents self_censoring_components(int k, int p, std::uint64_t seed, double strength = 1.5);

/// Independent coordinates and MCAR missingness.
LawComponents mcar_components(int k, int p, double missing_log_odds = -0.5);

/// Random positive function of the coordinates in the masks, tabulated on the binary cube.
CellFn random_cell_function(std::uint32_t l_mask, std::uint32_t x_mask, std::uint64_t seed, double scale);

}  // namespace nsc
