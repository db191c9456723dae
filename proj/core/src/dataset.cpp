#include "nsc/dataset.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsc {

Dataset::Dataset(int k, int p) : k_(k), p_(p) {
  if (k < kMinVariables || k > kMaxVariables) throw std::invalid_argument("dataset: K out of range");
  if (p < 0) throw std::invalid_argument("dataset: p must be nonnegative");
}

std::vector<std::pair<int, double>> Dataset::l_obs(std::size_t row) const {
  std::vector<std::pair<int, double>> out;
  const auto values = l(row);
  for (int i = 0; i < k_; ++i) {
    if (patterns_[row].observed(i)) out.emplace_back(i, values[i]);
  }
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  DatasetBuilder builder(k_, p_);
  builder.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("dataset: row index out of range");
    builder.add(patterns_[r], l(r), x(r), weights_[r]);
  }
  return std::move(builder).build();
}

Dataset Dataset::with_covariates(std::vector<double> x, int p) const {
  if (p < 0 || x.size() != size() * static_cast<std::size_t>(p)) {
    throw std::invalid_argument("dataset: covariate matrix has wrong shape");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: covariates must be finite");
  }
  Dataset out = *this;
  out.p_ = p;
  out.x_ = std::move(x);
  return out;
}

Dataset Dataset::with_weights(std::vector<double> weights) const {
  if (weights.size() != size()) throw std::invalid_argument("dataset: weight vector has wrong length");
  Dataset out = *this;
  out.total_weight_ = 0.0;
  out.unit_weights_ = true;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("dataset: weights must be finite and >= 0");
    out.total_weight_ += w;
    if (w != 1.0) out.unit_weights_ = false;
  }
  out.weights_ = std::move(weights);
  return out;
}

DatasetBuilder::DatasetBuilder(int k, int p) : data_(k, p) {}

void DatasetBuilder::reserve(std::size_t n) {
  data_.patterns_.reserve(n);
  data_.l_.reserve(n * data_.k_);
  data_.x_.reserve(n * data_.p_);
  data_.weights_.reserve(n);
}

DatasetBuilder& DatasetBuilder::add(const Pattern& pattern, std::span<const double> l,
                                    std::span<const double> x, double weight) {
  if (pattern.k() != data_.k_) throw std::invalid_argument("dataset: pattern has wrong K");
  if (l.size() != static_cast<std::size_t>(data_.k_)) throw std::invalid_argument("dataset: L row has wrong length");
  if (x.size() != static_cast<std::size_t>(data_.p_)) throw std::invalid_argument("dataset: X row has wrong length");
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("dataset: weights must be finite and >= 0");
  for (int i = 0; i < data_.k_; ++i) {
    if (pattern.observed(i)) {
      if (!std::isfinite(l[i])) throw std::invalid_argument("dataset: observed L value is not finite");
      data_.l_.push_back(l[i]);
    } else {
      data_.l_.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: X values must be finite");
    data_.x_.push_back(v);
  }
  data_.patterns_.push_back(pattern);
  data_.weights_.push_back(weight);
  data_.total_weight_ += weight;
  if (weight != 1.0) data_.unit_weights_ = false;
  return *this;
}

Dataset DatasetBuilder::build() && { return std::move(data_); }

bool SupportTable::identification_ok() const {
  for (bool ok : leave_one_out_ok) {
    if (!ok) return false;
  }
  return true;
}

SupportTable pattern_support(const Dataset& data) {
  SupportTable table;
  table.k = data.k();
  table.n = data.size();
  const std::size_t J = pattern_count(data.k());
  table.counts.assign(J, 0);
  table.mass.assign(J, 0.0);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto idx = data.pattern(r).index();
    ++table.counts[idx];
    table.mass[idx] += data.weight(r);
  }
  const bool complete = table.mass[J - 1] > 0.0;
  table.leave_one_out_ok.resize(data.k());
  for (int i = 0; i < data.k(); ++i) {
    const auto loo = Pattern::leave_one_out(data.k(), i).index();
    table.leave_one_out_ok[i] = complete && table.mass[loo] > 0.0;
  }
  return table;
}

}  // namespace nsc
