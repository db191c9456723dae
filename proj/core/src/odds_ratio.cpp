#include "nsc/odds_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsc/errors.hpp"

namespace nsc {

OddsRatioSpec::OddsRatioSpec(int k, std::vector<LinearPredictor> delta_h, std::vector<double> reference)
    : k_(k), delta_h_(std::move(delta_h)), reference_(std::move(reference)) {
  if (k < kMinVariables || k > kMaxVariables) throw std::invalid_argument("odds ratio: K out of range");
  if (delta_h_.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("odds ratio: need one delta_h function per variable");
  }
  if (reference_.empty()) reference_.assign(k, 0.0);
  if (reference_.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("odds ratio: reference point must have length K");
  }
  for (int i = 0; i < k; ++i) {
    const auto support = delta_h_[i].basis.l_support();
    if ((support >> i) & 1u) {
      throw std::invalid_argument("odds ratio: delta_h_" + std::to_string(i + 1) + " depends on L" +
                                  std::to_string(i + 1) + " (self-censoring)");
    }
    if (support >> k) throw std::invalid_argument("odds ratio: basis references L beyond K");
  }
}

double OddsRatioSpec::eval(int i, std::span<const double> l, std::span<const double> x) const {
  return delta_h_[i](l, x);
}

double OddsRatioSpec::log_odds_ratio(const Pattern& r, std::span<const double> l, std::span<const double> x) const {
  double s = 0.0;
  for (int i = 0; i < k_; ++i) {
    if (!r.observed(i)) s += eval(i, l, x);
  }
  return s;
}

bool OddsRatioSpec::anchored() const {
  return std::all_of(delta_h_.begin(), delta_h_.end(), [](const auto& d) { return d.basis.anchored(); });
}

double delta_h_eval(const OddsRatioSpec& spec, int i, std::span<const double> l_minus_i, std::span<const double> x) {
  const int k = spec.k();
  if (i < 0 || i >= k) throw std::invalid_argument("delta_h_eval: variable index out of range");
  if (l_minus_i.size() != static_cast<std::size_t>(k - 1)) {
    throw std::invalid_argument("delta_h_eval: L_{-i} must have length K-1");
  }
  std::vector<double> l(k, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0, a = 0; j < k; ++j) {
    if (j != i) l[j] = l_minus_i[a++];
  }
  return spec.eval(i, l, x);
}

double odds_ratio_eval(const OddsRatioSpec& spec, const Pattern& r, std::span<const double> l,
                       std::span<const double> x) {
  if (r.k() != spec.k() || l.size() != static_cast<std::size_t>(spec.k())) {
    throw std::invalid_argument("odds_ratio_eval: dimension mismatch");
  }
  return std::exp(spec.log_odds_ratio(r, l, x));
}

SelectionModel::SelectionModel(OddsRatioSpec odds, std::vector<LinearPredictor> baseline,
                               std::optional<ThetaTerms> theta)
    : odds_(std::move(odds)), baseline_(std::move(baseline)), theta_(std::move(theta)) {
  const int k = odds_.k();
  if (baseline_.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("selection model: need one baseline per variable");
  }
  for (const auto& b : baseline_) {
    if (b.basis.l_support() != 0) throw std::invalid_argument("selection model: baseline must depend on X only");
  }
  if (theta_) {
    if (k != 3) throw std::invalid_argument("selection model: interaction terms are only supported for K = 3");
    for (int j = 0; j < 3; ++j) {
      if (theta_->pair[j].basis.l_support() & ~(1u << j)) {
        throw std::invalid_argument("selection model: pair interaction " + std::to_string(j + 1) +
                                    " may depend on L" + std::to_string(j + 1) + " only");
      }
    }
    if (theta_->triple.basis.l_support() != 0) {
      throw std::invalid_argument("selection model: three-way interaction must not depend on L");
    }
  }
}

double SelectionModel::main_effect(int i, std::span<const double> l, std::span<const double> x) const {
  return odds_.eval(i, l, x) - baseline_[i](l, x);
}

void SelectionModel::log_numerators(std::span<const double> main, std::span<const double> l,
                                    std::span<const double> x, std::span<double> out) const {
  const int k = this->k();
  const std::uint32_t full = (1u << k) - 1u;
  double pair[3] = {0.0, 0.0, 0.0};
  double triple = 0.0;
  if (theta_) {
    for (int j = 0; j < 3; ++j) pair[j] = theta_->pair[j](l, x);
    triple = theta_->triple(l, x);
  }
  for (std::uint32_t idx = 0; idx <= full; ++idx) {
    const std::uint32_t missing = full & ~idx;
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      if ((missing >> i) & 1u) s += main[i];
    }
    if (theta_) {
      for (int j = 0; j < 3; ++j) {
        const std::uint32_t others = full & ~(1u << j);
        if ((missing & others) == others) s += pair[j];
      }
      if (missing == full) s += triple;
    }
    out[idx] = s;
  }
}

void SelectionModel::log_numerators(std::span<const double> l, std::span<const double> x, std::span<double> out) const {
  double buf[kMaxVariables];
  for (int i = 0; i < k(); ++i) buf[i] = main_effect(i, l, x);
  log_numerators(std::span<const double>(buf, k()), l, x, out);
}

double SelectionModel::log_numerator(const Pattern& r, std::span<const double> l, std::span<const double> x) const {
  const int k = this->k();
  const std::uint32_t full = (1u << k) - 1u;
  const std::uint32_t missing = r.missing_mask();
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    if ((missing >> i) & 1u) s += main_effect(i, l, x);
  }
  if (theta_) {
    for (int j = 0; j < 3; ++j) {
      const std::uint32_t others = full & ~(1u << j);
      if ((missing & others) == others) s += theta_->pair[j](l, x);
    }
    if (missing == full) s += theta_->triple(l, x);
  }
  return s;
}

double SelectionModel::log_odds_ratio(const Pattern& r, std::span<const double> l, std::span<const double> x) const {
  return log_numerator(r, l, x) - log_numerator(r, odds_.reference(), x);
}

double normalize_log_weights(std::span<double> log_w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_w) {
    if (std::isnan(v)) throw PositivityError("pattern probabilities: NaN log weight");
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx)) throw PositivityError("pattern probabilities: every pattern weight underflows");
  double total = 0.0;
  for (double& v : log_w) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : log_w) v /= total;
  return mx + std::log(total);
}

std::vector<double> pattern_prob_all(const SelectionModel& model, std::span<const double> l, std::span<const double> x) {
  if (l.size() != static_cast<std::size_t>(model.k())) throw std::invalid_argument("pattern_prob: L has wrong length");
  std::vector<double> out(model.n_patterns());
  model.log_numerators(l, x, out);
  normalize_log_weights(out);
  return out;
}

double pattern_prob(const SelectionModel& model, const Pattern& r, std::span<const double> l, std::span<const double> x) {
  if (r.k() != model.k()) throw std::invalid_argument("pattern_prob: pattern has wrong K");
  return pattern_prob_all(model, l, x)[r.index()];
}

}  // namespace nsc
