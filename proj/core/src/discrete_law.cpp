#include "nsc/discrete_law.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nsc/errors.hpp"
#include "nsc/odds_ratio.hpp"
#include "nsc/rng.hpp"

namespace nsc {

namespace {

std::uint32_t bits_of(std::span<const double> v, std::uint32_t mask) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < v.size() && j < 32; ++j) {
    if (((mask >> j) & 1u) && v[j] > 0.5) out |= 1u << j;
  }
  return out;
}

// Compresses the bits of `v` selected by `mask` into consecutive positions.
std::uint32_t pack(std::uint32_t v, std::uint32_t mask) {
  std::uint32_t out = 0;
  int pos = 0;
  for (int j = 0; j < 32; ++j) {
    if ((mask >> j) & 1u) {
      if ((v >> j) & 1u) out |= 1u << pos;
      ++pos;
    }
  }
  return out;
}

}  // namespace

std::vector<double> DiscreteLaw::l_values(std::uint32_t l) const {
  std::vector<double> v(k_);
  for (int j = 0; j < k_; ++j) v[j] = (l >> j) & 1u;
  return v;
}

std::vector<double> DiscreteLaw::x_values(std::uint32_t x) const {
  std::vector<double> v(p_);
  for (int m = 0; m < p_; ++m) v[m] = (x >> m) & 1u;
  return v;
}

double DiscreteLaw::lambda(std::uint32_t subset, std::uint32_t l, std::uint32_t x) const {
  if (subset == 0) return 0.0;
  const auto lv = l_values(l);
  const auto xv = x_values(x);
  if (std::popcount(subset) == 1) {
    const int i = std::countr_zero(subset);
    return components_.main[i](lv, xv);
  }
  auto it = components_.interactions.find(subset);
  return it == components_.interactions.end() ? 0.0 : it->second(lv, xv);
}

double DiscreteLaw::log_numerator(std::uint32_t missing, std::uint32_t l, std::uint32_t x) const {
  const auto lv = l_values(l);
  const auto xv = x_values(x);
  double s = 0.0;
  for (int i = 0; i < k_; ++i) {
    if ((missing >> i) & 1u) s += components_.main[i](lv, xv);
  }
  for (const auto& [subset, fn] : components_.interactions) {
    if ((missing & subset) == subset) s += fn(lv, xv);
  }
  return s;
}

DiscreteLaw build_discrete_law(LawComponents c, bool require_positivity) {
  if (c.k < kMinVariables || c.p < 0) throw std::invalid_argument("discrete law: bad dimensions");
  if (2 * c.k + c.p > kMaxLawBits) {
    throw std::invalid_argument("discrete law: 2K + p = " + std::to_string(2 * c.k + c.p) +
                                " exceeds the enumeration cap " + std::to_string(kMaxLawBits));
  }
  if (static_cast<int>(c.main.size()) != c.k) throw std::invalid_argument("discrete law: need K main effects");
  const std::uint32_t full = (1u << c.k) - 1u;
  for (const auto& [subset, fn] : c.interactions) {
    if ((subset & ~full) || std::popcount(subset) < 2 || !fn) {
      throw std::invalid_argument("discrete law: interaction subsets need two or more variables");
    }
  }
  const std::size_t n_lx = std::size_t{1} << (c.k + c.p);
  if (c.lx_weights.empty()) c.lx_weights.assign(n_lx, 1.0);
  if (c.lx_weights.size() != n_lx) throw std::invalid_argument("discrete law: p(L, X) table has wrong size");

  DiscreteLaw law;
  law.k_ = c.k;
  law.p_ = c.p;
  double total = 0.0;
  for (double w : c.lx_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("discrete law: negative cell weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("discrete law: empty p(L, X)");
  law.lx_.resize(n_lx);
  for (std::size_t i = 0; i < n_lx; ++i) law.lx_[i] = c.lx_weights[i] / total;
  law.components_ = std::move(c);

  const int k = law.k_;
  const std::size_t n_r = std::size_t{1} << k;
  law.table_.assign(n_r * n_lx, 0.0);
  std::vector<double> logw(n_r);
  for (std::uint32_t x = 0; x < (1u << law.p_); ++x) {
    for (std::uint32_t l = 0; l <= full; ++l) {
      for (std::uint32_t r = 0; r <= full; ++r) logw[r] = law.log_numerator(full & ~r, l, x);
      normalize_log_weights(logw);
      if (require_positivity && !(logw[full] > 0.0)) {
        throw PositivityError("discrete law: p(R = 1 | l, x) is zero");
      }
      const double plx = law.lx_prob(l, x);
      for (std::uint32_t r = 0; r <= full; ++r) law.table_[law.cell(r, l, x)] = plx * logw[r];
    }
  }
  return law;
}

Dataset DiscreteLaw::observed_data() const {
  const std::uint32_t full = (1u << k_) - 1u;
  DatasetBuilder b(k_, p_);
  for (std::uint32_t x = 0; x < (1u << p_); ++x) {
    const auto xv = x_values(x);
    for (std::uint32_t r = 0; r <= full; ++r) {
      const std::uint32_t miss = full & ~r;
      // Enumerate observed configurations (l restricted to r) and sum over the rest.
      for (std::uint32_t lo = r;; lo = (lo - 1) & r) {
        double mass = 0.0;
        for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
          mass += prob(r, lo | lm, x);
          if (lm == 0) break;
        }
        if (mass > 0.0) {
          auto lv = l_values(lo);
          for (int j = 0; j < k_; ++j) {
            if ((miss >> j) & 1u) lv[j] = std::nan("");
          }
          b.add(Pattern(r, k_), lv, xv, mass);
        }
        if (lo == 0) break;
      }
    }
  }
  return std::move(b).build();
}

Dataset DiscreteLaw::full_data() const {
  const std::uint32_t full = (1u << k_) - 1u;
  DatasetBuilder b(k_, p_);
  for (std::uint32_t x = 0; x < (1u << p_); ++x) {
    for (std::uint32_t l = 0; l <= full; ++l) {
      const double w = lx_prob(l, x);
      if (w > 0.0) b.add(Pattern::complete(k_), l_values(l), x_values(x), w);
    }
  }
  return std::move(b).build();
}

CellFn random_cell_function(std::uint32_t l_mask, std::uint32_t x_mask, std::uint64_t seed, double scale) {
  Rng rng(seed);
  const int bits = std::popcount(l_mask) + std::popcount(x_mask);
  std::vector<double> table(std::size_t{1} << bits);
  for (double& v : table) v = scale * (2.0 * rng.uniform() - 1.0);
  const int shift = std::popcount(l_mask);
  return [table = std::move(table), l_mask, x_mask, shift](std::span<const double> l, std::span<const double> x) {
    const std::uint32_t idx = pack(bits_of(l, l_mask), l_mask) | (pack(bits_of(x, x_mask), x_mask) << shift);
    return table[idx];
  };
}

namespace {

LawComponents random_components(int k, int p, std::uint64_t seed, double scale) {
  if (k < kMinVariables || 2 * k + p > kMaxLawBits) throw std::invalid_argument("random law: bad dimensions");
  LawComponents c;
  c.k = k;
  c.p = p;
  Rng rng(derive_seed(seed, 0));
  c.lx_weights.resize(std::size_t{1} << (k + p));
  for (double& w : c.lx_weights) w = std::exp(0.6 * rng.normal());
  const std::uint32_t full = (1u << k) - 1u;
  const std::uint32_t xall = (1u << p) - 1u;
  std::uint64_t counter = 1;
  for (int i = 0; i < k; ++i) {
    auto f = random_cell_function(full & ~(1u << i), xall, derive_seed(seed, counter++), scale);
    const double offset = -0.6;
    c.main.push_back([f, offset](std::span<const double> l, std::span<const double> x) { return offset + f(l, x); });
  }
  for (std::uint32_t s = 1; s <= full; ++s) {
    if (std::popcount(s) < 2) continue;
    c.interactions[s] = random_cell_function(full & ~s, xall, derive_seed(seed, counter++), 0.5 * scale);
  }
  return c;
}

}  // namespace

LawComponents random_nsc_components(int k, int p, std::uint64_t seed, double scale) {
  return random_components(k, p, seed, scale);
}

LawComponents self_censoring_components(int k, int p, std::uint64_t seed, double strength) {
  LawComponents c = random_components(k, p, seed, 0.8);
  for (int i = 0; i < k; ++i) {
    auto f = c.main[i];
    c.main[i] = [f, i, strength](std::span<const double> l, std::span<const double> x) {
      return f(l, x) + strength * (l[i] > 0.5 ? 1.0 : 0.0);
    };
  }
  return c;
}

LawComponents mcar_components(int k, int p, double missing_log_odds) {
  LawComponents c;
  c.k = k;
  c.p = p;
  for (int i = 0; i < k; ++i) {
    c.main.push_back([missing_log_odds](std::span<const double>, std::span<const double>) { return missing_log_odds; });
  }
  return c;
}

}  // namespace nsc
