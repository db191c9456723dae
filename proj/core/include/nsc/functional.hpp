#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nsc {

/// Full-data target beta = E[b(L)]; b never reads R or X.
class TargetFunctional {
 public:
  enum class Kind { coordinate_mean, product, cell_indicator, custom };
  using Fn = std::function<double(std::span<const double>)>;

  TargetFunctional() = default;

  /// E[L_i], i 0-based.
  static TargetFunctional mean(int i);
  /// E[prod_{i in mask} L_i]; mask 0 means every coordinate.
  static TargetFunctional product(std::uint32_t mask = 0);
  /// P(L = cell) for a binary cell.
  static TargetFunctional cell(std::vector<int> cell);
  static TargetFunctional custom(std::string name, Fn fn);
  /// "mean:L3", "product", "product:L1L2", "cell:101".
  static TargetFunctional parse(const std::string& text, int k);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double operator()(std::span<const double> l) const;

 private:
  Kind kind_ = Kind::coordinate_mean;
  std::string name_;
  int index_ = 0;
  std::uint32_t mask_ = 0;
  std::vector<int> cell_;
  Fn fn_;
};

}  // namespace nsc
