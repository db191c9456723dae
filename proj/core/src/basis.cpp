#include "nsc/basis.hpp"

#include <bit>
#include <stdexcept>

namespace nsc {

namespace {

std::uint32_t bit(int j) {
  if (j < 0 || j >= 32) throw std::invalid_argument("basis: coordinate index out of range");
  return 1u << j;
}

template <typename F>
void for_each_bit(std::uint32_t mask, F&& f) {
  while (mask != 0) {
    const int j = std::countr_zero(mask);
    f(j);
    mask &= mask - 1;
  }
}

}  // namespace

namespace {

BasisTerm make_term(std::uint32_t l, std::uint32_t lc, std::uint32_t x, std::uint32_t xc) {
  BasisTerm t;
  t.l_mask = l;
  t.l_complement_mask = lc;
  t.x_mask = x;
  t.x_complement_mask = xc;
  return t;
}

}  // namespace

BasisTerm BasisTerm::linear(int j) { return make_term(bit(j), 0, 0, 0); }
BasisTerm BasisTerm::complement(int j) { return make_term(0, bit(j), 0, 0); }
BasisTerm BasisTerm::product(int j, int k) { return make_term(bit(j) | bit(k), 0, 0, 0); }
BasisTerm BasisTerm::covariate(int m) { return make_term(0, 0, bit(m), 0); }
BasisTerm BasisTerm::covariate_complement(int m) { return make_term(0, 0, 0, bit(m)); }
BasisTerm BasisTerm::covariate_product(int m, int n) { return make_term(0, 0, bit(m) | bit(n), 0); }
BasisTerm BasisTerm::interaction(int j, int m) { return make_term(bit(j), 0, bit(m), 0); }
BasisTerm BasisTerm::monomial(std::uint32_t l_mask, std::uint32_t x_mask) { return make_term(l_mask, 0, x_mask, 0); }
BasisTerm BasisTerm::user(std::string tag, std::uint32_t l_support) {
  BasisTerm t;
  t.transform = std::move(tag);
  t.transform_l_support = l_support;
  return t;
}

std::string BasisTerm::name() const {
  if (is_transform()) return "@" + transform;
  std::string out;
  auto append = [&](const std::string& factor) {
    if (!out.empty()) out += "*";
    out += factor;
  };
  for_each_bit(l_mask, [&](int j) { append("L" + std::to_string(j + 1)); });
  for_each_bit(l_complement_mask, [&](int j) { append("(1-L" + std::to_string(j + 1) + ")"); });
  for_each_bit(x_mask, [&](int m) { append("X" + std::to_string(m + 1)); });
  for_each_bit(x_complement_mask, [&](int m) { append("(1-X" + std::to_string(m + 1) + ")"); });
  return out.empty() ? "1" : out;
}

void TransformRegistry::add(const std::string& tag, TransformFn fn, bool anchored) {
  if (tag.empty()) throw std::invalid_argument("transform registry: empty tag");
  entries_[tag] = Entry{std::move(fn), anchored};
}

const TransformRegistry::Entry* TransformRegistry::find(const std::string& tag) const {
  const auto it = entries_.find(tag);
  return it == entries_.end() ? nullptr : &it->second;
}

BasisSpec::BasisSpec(std::vector<BasisTerm> terms, std::vector<double> l0, const TransformRegistry* registry)
    : terms_(std::move(terms)), l0_(std::move(l0)) {
  fns_.resize(terms_.size(), nullptr);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& term = terms_[t];
    if (!term.is_transform()) continue;
    const auto* entry = registry ? registry->find(term.transform) : nullptr;
    if (entry == nullptr) throw std::invalid_argument("basis: unknown transform '" + term.transform + "'");
    fns_[t] = entry;
  }
  const std::uint32_t lsup = l_support();
  if (!l0_.empty() && lsup != 0 && static_cast<std::size_t>(std::bit_width(lsup)) > l0_.size()) {
    throw std::invalid_argument("basis: reference point shorter than referenced L coordinates");
  }
}

double BasisSpec::term_value(std::size_t t, std::span<const double> l, std::span<const double> x) const {
  const auto& term = terms_[t];
  if (fns_[t] != nullptr) return fns_[t]->fn(l, x);
  double v = 1.0;
  for (std::uint32_t mask = term.l_mask; mask != 0; mask &= mask - 1) {
    const int j = std::countr_zero(mask);
    v *= l[j] - (l0_.empty() ? 0.0 : l0_[j]);
  }
  for (std::uint32_t mask = term.l_complement_mask; mask != 0; mask &= mask - 1) {
    v *= 1.0 - l[std::countr_zero(mask)];
  }
  for (std::uint32_t mask = term.x_mask; mask != 0; mask &= mask - 1) {
    v *= x[std::countr_zero(mask)];
  }
  for (std::uint32_t mask = term.x_complement_mask; mask != 0; mask &= mask - 1) {
    v *= 1.0 - x[std::countr_zero(mask)];
  }
  return v;
}

void BasisSpec::evaluate(std::span<const double> l, std::span<const double> x, std::span<double> out) const {
  for (std::size_t t = 0; t < terms_.size(); ++t) out[t] = term_value(t, l, x);
}

Eigen::VectorXd BasisSpec::evaluate(std::span<const double> l, std::span<const double> x) const {
  Eigen::VectorXd out(terms_.size());
  evaluate(l, x, std::span<double>(out.data(), terms_.size()));
  return out;
}

double BasisSpec::dot(std::span<const double> l, std::span<const double> x, const Eigen::VectorXd& coef) const {
  double s = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    if (coef[t] != 0.0) s += coef[t] * term_value(t, l, x);
  }
  return s;
}

std::uint32_t BasisSpec::l_support() const {
  std::uint32_t s = 0;
  for (const auto& t : terms_) s |= t.l_support();
  return s;
}

std::uint32_t BasisSpec::x_support() const {
  std::uint32_t s = 0;
  for (const auto& t : terms_) s |= t.x_support();
  return s;
}

bool BasisSpec::anchored() const {
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& term = terms_[t];
    if (fns_[t] != nullptr) {
      if (!fns_[t]->anchored) return false;
      continue;
    }
    if (term.l_mask != 0) continue;
    bool vanishes = false;
    for (std::uint32_t mask = term.l_complement_mask; mask != 0; mask &= mask - 1) {
      const int j = std::countr_zero(mask);
      if (!l0_.empty() && l0_[j] == 1.0) vanishes = true;
    }
    if (!vanishes) return false;
  }
  return true;
}

bool BasisSpec::has_constant() const {
  for (const auto& t : terms_) {
    if (t == BasisTerm::constant()) return true;
  }
  return false;
}

BasisSpec BasisSpec::concat(const BasisSpec& other) const {
  BasisSpec out = *this;
  out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
  out.fns_.insert(out.fns_.end(), other.fns_.begin(), other.fns_.end());
  if (out.l0_.empty()) out.l0_ = other.l0_;
  return out;
}

std::string BasisSpec::describe() const {
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += " + ";
    out += t.name();
  }
  return out.empty() ? "(empty)" : out;
}

LinearPredictor::LinearPredictor(BasisSpec b, Eigen::VectorXd c) : basis(std::move(b)), coef(std::move(c)) {
  if (static_cast<std::size_t>(coef.size()) != basis.size()) {
    throw std::invalid_argument("linear predictor: coefficient count does not match basis size");
  }
}

LinearPredictor::LinearPredictor(BasisSpec b) : basis(std::move(b)), coef(Eigen::VectorXd::Zero(basis.size())) {}

namespace bases {

BasisSpec linear_in(int k, std::uint32_t l_mask, std::span<const int> x_cols, bool intercept, std::vector<double> l0) {
  std::vector<BasisTerm> terms;
  if (intercept) terms.push_back(BasisTerm::constant());
  for (int j = 0; j < k; ++j) {
    if ((l_mask >> j) & 1u) terms.push_back(BasisTerm::linear(j));
  }
  for (int m : x_cols) terms.push_back(BasisTerm::covariate(m));
  return BasisSpec(std::move(terms), std::move(l0));
}

BasisSpec covariates(std::span<const int> x_cols, bool intercept) {
  std::vector<BasisTerm> terms;
  if (intercept) terms.push_back(BasisTerm::constant());
  for (int m : x_cols) terms.push_back(BasisTerm::covariate(m));
  return BasisSpec(std::move(terms));
}

BasisSpec saturated(int k, std::uint32_t l_mask, std::span<const int> x_cols, bool require_l, bool include_constant,
                    std::vector<double> l0) {
  std::vector<int> l_cols;
  for (int j = 0; j < k; ++j) {
    if ((l_mask >> j) & 1u) l_cols.push_back(j);
  }
  const std::size_t nl = l_cols.size();
  const std::size_t nx = x_cols.size();
  if (nl + nx > 20) throw std::invalid_argument("basis: saturated basis too large");
  std::vector<BasisTerm> terms;
  for (std::uint32_t subset = 0; subset < (1u << (nl + nx)); ++subset) {
    std::uint32_t lm = 0;
    std::uint32_t xm = 0;
    for (std::size_t a = 0; a < nl; ++a) {
      if ((subset >> a) & 1u) lm |= 1u << l_cols[a];
    }
    for (std::size_t b = 0; b < nx; ++b) {
      if ((subset >> (nl + b)) & 1u) xm |= 1u << x_cols[b];
    }
    if (subset == 0 && !include_constant) continue;
    if (require_l && lm == 0) continue;
    terms.push_back(BasisTerm::monomial(lm, xm));
  }
  return BasisSpec(std::move(terms), std::move(l0));
}

}  // namespace bases

}  // namespace nsc
