#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nsc {

/// One feature: a product of factors (L_j - l0_j), (1 - L_j), X_m, (1 - X_m),
/// or a named user transform. Indices are 0-based; an empty product is the
/// constant 1.
struct BasisTerm {
  std::uint32_t l_mask = 0;
  std::uint32_t l_complement_mask = 0;
  std::uint32_t x_mask = 0;
  std::uint32_t x_complement_mask = 0;
  std::string transform;
  /// L coordinates a transform reads; used for dependency checks.
  std::uint32_t transform_l_support = 0;

  static BasisTerm constant() { return {}; }
  static BasisTerm linear(int j);
  static BasisTerm complement(int j);
  static BasisTerm product(int j, int k);
  static BasisTerm covariate(int m);
  static BasisTerm covariate_complement(int m);
  static BasisTerm covariate_product(int m, int n);
  static BasisTerm interaction(int j, int m);
  static BasisTerm monomial(std::uint32_t l_mask, std::uint32_t x_mask);
  static BasisTerm user(std::string tag, std::uint32_t l_support);

  std::uint32_t l_support() const { return l_mask | l_complement_mask | transform_l_support; }
  std::uint32_t x_support() const { return x_mask | x_complement_mask; }
  bool is_transform() const { return !transform.empty(); }
  std::string name() const;

  bool operator==(const BasisTerm&) const = default;
};

using TransformFn = std::function<double(std::span<const double> l, std::span<const double> x)>;

/// Named user transforms, resolved when a basis is bound.
class TransformRegistry {
 public:
  struct Entry {
    TransformFn fn;
    bool anchored = false;
  };
  void add(const std::string& tag, TransformFn fn, bool anchored = false);
  const Entry* find(const std::string& tag) const;

 private:
  std::map<std::string, Entry> entries_;
};

/// Ordered feature list with a reference point l0 for the (L_j - l0_j) factors.
class BasisSpec {
 public:
  BasisSpec() = default;
  explicit BasisSpec(std::vector<BasisTerm> terms, std::vector<double> l0 = {},
                     const TransformRegistry* registry = nullptr);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<BasisTerm>& terms() const { return terms_; }
  const std::vector<double>& l0() const { return l0_; }

  double term_value(std::size_t t, std::span<const double> l, std::span<const double> x) const;
  void evaluate(std::span<const double> l, std::span<const double> x, std::span<double> out) const;
  Eigen::VectorXd evaluate(std::span<const double> l, std::span<const double> x) const;
  double dot(std::span<const double> l, std::span<const double> x, const Eigen::VectorXd& coef) const;

  std::uint32_t l_support() const;
  std::uint32_t x_support() const;
  /// Every term vanishes at L = l0 whatever X is.
  bool anchored() const;
  bool has_constant() const;
  BasisSpec concat(const BasisSpec& other) const;
  std::string describe() const;

 private:
  std::vector<BasisTerm> terms_;
  std::vector<double> l0_;
  std::vector<const TransformRegistry::Entry*> fns_;
};

/// Basis plus coefficients: a linear predictor eta(l, x) = features . coef.
struct LinearPredictor {
  BasisSpec basis;
  Eigen::VectorXd coef;

  LinearPredictor() = default;
  LinearPredictor(BasisSpec b, Eigen::VectorXd c);
  explicit LinearPredictor(BasisSpec b);  // zero coefficients

  double operator()(std::span<const double> l, std::span<const double> x) const {
    return basis.dot(l, x, coef);
  }
};

/// Builders. `l0` may be empty (zeros); column lists are 0-based.
namespace bases {

BasisSpec linear_in(int k, std::uint32_t l_mask, std::span<const int> x_cols, bool intercept,
                    std::vector<double> l0 = {});
BasisSpec covariates(std::span<const int> x_cols, bool intercept);
/// All products over subsets of the listed coordinates (binary saturation);
/// `require_l` keeps only terms with at least one L factor.
BasisSpec saturated(int k, std::uint32_t l_mask, std::span<const int> x_cols, bool require_l,
                    bool include_constant, std::vector<double> l0 = {});

}  // namespace bases

}  // namespace nsc
