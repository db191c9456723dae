#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nsc/pattern.hpp"

namespace nsc {

/// n records of (pattern, observed L coordinates, always-observed X).
///
/// L is stored row-major with NaN in exactly the coordinates the pattern marks
/// missing. Records carry a nonnegative weight (1 for sampled data); weighted
/// datasets are how population-level expectations over a discrete law are
/// pushed through the same estimating equations as sample data.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int k, int p);

  int k() const { return k_; }
  int p() const { return p_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }

  const Pattern& pattern(std::size_t row) const { return patterns_[row]; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  std::span<const double> l(std::size_t row) const {
    return {l_.data() + row * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }
  std::span<const double> x(std::size_t row) const {
    return {x_.data() + row * static_cast<std::size_t>(p_), static_cast<std::size_t>(p_)};
  }
  double weight(std::size_t row) const { return weights_[row]; }
  double total_weight() const { return total_weight_; }
  bool unit_weights() const { return unit_weights_; }

  /// Observed (0-based index, value) pairs of a record.
  std::vector<std::pair<int, double>> l_obs(std::size_t row) const;

  /// Rows in the given order (repetition allowed); weights are carried over.
  Dataset select(std::span<const std::size_t> rows) const;
  /// Same records with the covariate matrix replaced (row-major, width p).
  Dataset with_covariates(std::vector<double> x, int p) const;
  /// Same records with replacement weights.
  Dataset with_weights(std::vector<double> weights) const;

 private:
  friend class DatasetBuilder;

  int k_ = 0;
  int p_ = 0;
  std::vector<Pattern> patterns_;
  std::vector<double> l_;
  std::vector<double> x_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
  bool unit_weights_ = true;
};

class DatasetBuilder {
 public:
  DatasetBuilder(int k, int p);

  /// `l` has length K; coordinates missing under `pattern` are ignored.
  DatasetBuilder& add(const Pattern& pattern, std::span<const double> l, std::span<const double> x,
                      double weight = 1.0);
  void reserve(std::size_t n);
  std::size_t size() const { return data_.patterns_.size(); }
  Dataset build() &&;

 private:
  Dataset data_;
};

struct SupportTable {
  int k = 0;
  std::size_t n = 0;
  /// Record counts indexed by pattern index.
  std::vector<std::size_t> counts;
  /// Weighted mass per pattern (equals counts for unit weights).
  std::vector<double> mass;
  /// Per variable i: both the leave-i-out pattern and the complete pattern occur.
  std::vector<bool> leave_one_out_ok;

  std::size_t count(const Pattern& r) const { return counts[r.index()]; }
  std::size_t complete_count() const { return counts.back(); }
  bool supported(const Pattern& r) const { return mass[r.index()] > 0.0; }
  bool identification_ok() const;
};

SupportTable pattern_support(const Dataset& data);

}  // namespace nsc
