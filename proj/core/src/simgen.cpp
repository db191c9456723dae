#include "nsc/simgen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nsc/rng.hpp"

namespace nsc {

namespace {

constexpr const char* kListingOrder[8] = {"100", "010", "110", "001", "101", "011", "111", "000"};

std::vector<Eigen::VectorXd> h_table(const std::vector<std::vector<double>>& rows) {
  std::vector<Eigen::VectorXd> h(8);
  for (int t = 0; t < 8; ++t) {
    const auto r = Pattern::parse(kListingOrder[t]);
    h[r.index()] = Eigen::Map<const Eigen::VectorXd>(rows[t].data(), static_cast<Eigen::Index>(rows[t].size()));
  }
  return h;
}

}  // namespace

std::vector<double> default_pattern_weights() {
  const double w[8] = {10, 9, 8, 7, 6, 5, 10, 4};
  std::vector<double> out(8);
  for (int t = 0; t < 8; ++t) out[Pattern::parse(kListingOrder[t]).index()] = w[t] / 59.0;
  return out;
}

double GaussianCGParams::truth(int j) const {
  double s = 0.0;
  for (std::size_t r = 0; r < pattern_weights.size(); ++r) {
    if (pattern_weights[r] > 0.0) s += pattern_weights[r] * sigma0.row(j).dot(h[r]);
  }
  return s;
}

double GaussianCGParams::nsc_violation() const {
  double worst = 0.0;
  const std::uint32_t full = (1u << k) - 1u;
  for (int i = 0; i < k; ++i) {
    for (std::uint32_t r = 0; r <= full; ++r) {
      if ((r >> i) & 1u) continue;
      const std::uint32_t s = r | (1u << i);
      worst = std::max(worst, std::abs(h[s](i) - h[r](i)));
    }
  }
  return worst;
}

void GaussianCGParams::validate() const {
  const Eigen::Index d = k + p;
  if (k < kMinVariables || k > kMaxVariables || p < 0) throw std::invalid_argument("gaussian params: bad dimensions");
  if (pattern_weights.size() != pattern_count(k) || h.size() != pattern_count(k)) {
    throw std::invalid_argument("gaussian params: need 2^K pattern weights and h vectors");
  }
  double total = 0.0;
  for (double w : pattern_weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("gaussian params: negative pattern weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("gaussian params: weights must sum to 1");
  for (const auto& v : h) {
    if (v.size() != d) throw std::invalid_argument("gaussian params: h(r) must have length K + p");
  }
  if (sigma0.rows() != d || sigma0.cols() != d) throw std::invalid_argument("gaussian params: Sigma0 shape");
  if (!sigma0.isApprox(sigma0.transpose(), 1e-12)) throw std::invalid_argument("gaussian params: Sigma0 not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma0);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian params: Sigma0 not positive definite");
}

GaussianCGParams GaussianCGParams::gauss1() {
  GaussianCGParams g;
  g.k = 3;
  g.p = 0;
  g.pattern_weights = default_pattern_weights();
  g.sigma0.resize(3, 3);
  g.sigma0 << 4.4, 1.3, -2.8,
              1.3, 3.2, 1.3,
              -2.8, 1.3, 3.5;
  g.h = h_table({{1.4, 1.6, 0.9},
                 {1.9, 1.1, 1.4},
                 {1.9, 1.6, 0.2},
                 {0.5, 1.9, 2.1},
                 {0.5, 2.4, 0.9},
                 {1.0, 1.9, 1.4},
                 {1.0, 2.4, 0.2},
                 {1.4, 1.1, 2.1}});
  return g;
}

GaussianCGParams GaussianCGParams::gauss2() {
  GaussianCGParams g;
  g.k = 3;
  g.p = 2;
  g.pattern_weights = default_pattern_weights();
  g.sigma0.resize(5, 5);
  g.sigma0 << 3.88, 2.66, 1.24, 1.60, 0.30,
              2.66, 3.24, 2.66, 2.26, 0.96,
              1.24, 2.66, 3.70, 1.64, 0.64,
              1.60, 2.26, 1.64, 2.00, 0.60,
              0.30, 0.96, 0.64, 0.60, 1.70;
  g.h = h_table({{1.4, 1.6, 0.9, 2.05, 4.15},
                 {1.9, 1.1, 1.4, 2.6, 2.6},
                 {1.9, 1.6, 0.2, 2.6, 3.7},
                 {0.5, 1.9, 2.1, 3.0, 2.7},
                 {0.5, 2.4, 0.9, 2.95, 3.75},
                 {1.0, 1.9, 1.4, 3.8, 2.1},
                 {1.0, 2.4, 0.2, 3.45, 3.45},
                 {1.4, 1.1, 2.1, 1.75, 3.35}});
  return g;
}

SimulatedData sample_gaussian_cg(const GaussianCGParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  const int k = params.k;
  const int d = params.k + params.p;
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(params.sigma0).matrixL();
  std::vector<double> cumulative(params.pattern_weights.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < cumulative.size(); ++r) cumulative[r] = (acc += params.pattern_weights[r]);
  std::vector<Eigen::VectorXd> mu(cumulative.size());
  for (std::size_t r = 0; r < mu.size(); ++r) mu[r] = params.sigma0 * params.h[r];

  Rng rng(seed);
  DatasetBuilder full(k, params.p), masked(k, params.p);
  full.reserve(n);
  masked.reserve(n);
  Eigen::VectorXd z(d), draw(d);
  const auto complete = Pattern::complete(k);
  for (std::size_t row = 0; row < n; ++row) {
    const auto r = static_cast<std::uint32_t>(rng.categorical(cumulative));
    for (int j = 0; j < d; ++j) z(j) = rng.normal();
    draw = mu[r] + chol * z;
    std::span<const double> l(draw.data(), k), x(draw.data() + k, params.p);
    full.add(complete, l, x);
    masked.add(Pattern(r, k), l, x);
  }
  return {std::move(full).build(), std::move(masked).build()};
}

double BinaryORParams::delta_h(int i, std::span<const double> l, std::span<const double> x) const {
  const double x1 = p > 0 ? x[0] : 0.0;
  const double x2 = p > 0 ? x[1] : 0.0;
  const bool has_x = p > 0;
  switch (i) {
    case 0:
      return -0.8 * (1 - l[1]) + 0.6 * l[2] + (has_x ? 0.5 * x1 + 0.7 * x2 + 0.7 * x1 * x2 : 0.0);
    case 1:
      return -0.8 * (1 - l[0]) + 0.7 * l[2] + (has_x ? -0.7 * (1 - x1) - 0.5 * x2 + 0.7 * x1 * x2 : 0.0);
    case 2:
      return 0.5 * l[0] + 0.5 * (1 - l[1]) + (has_x ? 0.2 * x1 - 0.9 * x2 + 0.7 * x1 * x2 : 0.0);
    default:
      throw std::invalid_argument("binary params: variable index out of range");
  }
}

LawComponents BinaryORParams::components() const {
  if (p != 0 && p != 2) throw std::invalid_argument("binary params: p must be 0 or 2");
  LawComponents c;
  c.k = 3;
  c.p = p;
  const std::uint32_t nx = 1u << p;
  c.lx_weights.resize(std::size_t{8} * nx);
  for (std::uint32_t x = 0; x < nx; ++x) {
    const double x1 = x & 1u, x2 = (x >> 1) & 1u;
    double z = 0.0;
    std::array<double, 8> w{};
    for (std::uint32_t l = 0; l < 8; ++l) {
      const double l1 = l & 1u, l2 = (l >> 1) & 1u, l3 = (l >> 2) & 1u;
      double s = alpha * (l1 + l2 + l3) + gamma * (l1 * l2 + l1 * l3 + l2 * l3);
      if (p > 0) s += x1_l1 * x1 * l1 + x2_l3 * x2 * l3;
      w[l] = std::exp(s);
      z += w[l];
    }
    const double px = p > 0 ? x_prob[x] : 1.0;
    for (std::uint32_t l = 0; l < 8; ++l) c.lx_weights[l | (x << 3)] = px * w[l] / z;
  }
  const BinaryORParams self = *this;
  for (int i = 0; i < 3; ++i) {
    c.main.push_back([self, i](std::span<const double> l, std::span<const double> x) {
      return self.c[i] + self.delta_h(i, l, x);
    });
  }
  const double pr = pair;
  for (std::uint32_t s : {3u, 5u, 6u}) {
    c.interactions[s] = [pr](std::span<const double>, std::span<const double>) { return pr; };
  }
  // The all-missing pattern collects all three pairs; net it back to pair + triple.
  const double tr = triple - 2.0 * pair;
  c.interactions[7u] = [tr](std::span<const double>, std::span<const double>) { return tr; };
  return c;
}

OddsRatioSpec BinaryORParams::odds_ratio_spec() const {
  struct Piece {
    BasisTerm term;
    double coef;
  };
  auto predictor = [&](const std::vector<Piece>& l_terms, const std::vector<Piece>& x_terms) {
    std::vector<BasisTerm> terms;
    std::vector<double> coef;
    for (const auto& t : l_terms) terms.push_back(t.term), coef.push_back(t.coef);
    if (p > 0) {
      for (const auto& t : x_terms) terms.push_back(t.term), coef.push_back(t.coef);
    }
    return LinearPredictor(BasisSpec(terms), Eigen::Map<const Eigen::VectorXd>(coef.data(), coef.size()));
  };
  std::vector<LinearPredictor> dh;
  dh.push_back(predictor({{BasisTerm::complement(1), -0.8}, {BasisTerm::linear(2), 0.6}},
                         {{BasisTerm::covariate(0), 0.5},
                          {BasisTerm::covariate(1), 0.7},
                          {BasisTerm::covariate_product(0, 1), 0.7}}));
  dh.push_back(predictor({{BasisTerm::complement(0), -0.8}, {BasisTerm::linear(2), 0.7}},
                         {{BasisTerm::covariate_complement(0), -0.7},
                          {BasisTerm::covariate(1), -0.5},
                          {BasisTerm::covariate_product(0, 1), 0.7}}));
  dh.push_back(predictor({{BasisTerm::linear(0), 0.5}, {BasisTerm::complement(1), 0.5}},
                         {{BasisTerm::covariate(0), 0.2},
                          {BasisTerm::covariate(1), -0.9},
                          {BasisTerm::covariate_product(0, 1), 0.7}}));
  return OddsRatioSpec(3, std::move(dh));
}

// Calibrated so that E[L1 L2 L3] is near 0.321 while the complete-case mean is near 0.167.
BinaryORParams BinaryORParams::binary1() {
  BinaryORParams b;
  b.p = 0;
  b.c = {-0.35, -0.03, 0.16};
  b.alpha = -0.28;
  b.gamma = 0.66;
  b.pair = 0.41;
  b.triple = -0.54;
  return b;
}

BinaryORParams BinaryORParams::binary2() {
  BinaryORParams b;
  b.p = 2;
  b.c = {-0.07, -0.18, 0.25};
  b.alpha = -0.09;
  b.gamma = 0.53;
  b.pair = -0.25;
  b.triple = 0.87;
  return b;
}

SimulatedData sample_law(const DiscreteLaw& law, std::size_t n, std::uint64_t seed) {
  const int k = law.k();
  const auto& table = law.table();
  std::vector<double> cumulative(table.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < table.size(); ++c) cumulative[c] = (acc += table[c]);
  Rng rng(seed);
  DatasetBuilder full(k, law.p()), masked(k, law.p());
  full.reserve(n);
  masked.reserve(n);
  const std::uint32_t kmask = (1u << k) - 1u;
  const auto complete = Pattern::complete(k);
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t c = rng.categorical(cumulative);
    const auto r = static_cast<std::uint32_t>(c & kmask);
    const auto l = law.l_values(static_cast<std::uint32_t>((c >> k) & kmask));
    const auto x = law.x_values(static_cast<std::uint32_t>(c >> (2 * k)));
    full.add(complete, l, x);
    masked.add(Pattern(r, k), l, x);
  }
  return {std::move(full).build(), std::move(masked).build()};
}

SimulatedData sample_binary_or(const BinaryORParams& params, std::size_t n, std::uint64_t seed) {
  return sample_law(params.law(), n, seed);
}

std::array<double, 2> misspecify_covariates(std::array<double, 2> x) {
  if (!(x[0] > 0.0) || !(x[1] > 0.0)) {
    throw std::invalid_argument("misspecify_covariates: X1 and X2 must be positive");
  }
  return {std::log(1.0 / x[0] + 1.0 / x[1]), std::sqrt(x[0] * x[1])};
}

}  // namespace nsc
