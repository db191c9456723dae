#include "nsc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsc/aipw.hpp"
#include "nsc/rng.hpp"

namespace nsc {

namespace {

using Fn = std::function<double(std::span<const double>, std::span<const double>)>;

std::uint32_t to_bits(std::span<const double> v) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] > 0.5) out |= 1u << j;
  }
  return out;
}

std::vector<int> all_columns(int p) {
  std::vector<int> cols(p);
  for (int m = 0; m < p; ++m) cols[m] = m;
  return cols;
}

// Coefficients of a saturated monomial basis by Moebius inversion on the
// binary cube; f is evaluated with every coordinate outside a term at zero.
LinearPredictor mobius_fit(BasisSpec basis, int k, int p, const Fn& f) {
  Eigen::VectorXd coef(static_cast<Eigen::Index>(basis.size()));
  std::vector<double> l(k), x(p);
  for (std::size_t t = 0; t < basis.size(); ++t) {
    const auto& term = basis.terms()[t];
    if (term.l_complement_mask || term.x_complement_mask || term.is_transform()) {
      throw std::invalid_argument("mobius_fit: basis must hold plain monomials");
    }
    const std::uint32_t sl = term.l_mask, sx = term.x_mask;
    double c = 0.0;
    for (std::uint32_t tl = sl;; tl = (tl - 1) & sl) {
      for (std::uint32_t tx = sx;; tx = (tx - 1) & sx) {
        for (int j = 0; j < k; ++j) l[j] = (tl >> j) & 1u;
        for (int m = 0; m < p; ++m) x[m] = (tx >> m) & 1u;
        const int flips = std::popcount(sl ^ tl) + std::popcount(sx ^ tx);
        c += (flips % 2 ? -1.0 : 1.0) * f(l, x);
        if (tx == 0) break;
      }
      if (tl == 0) break;
    }
    coef[static_cast<Eigen::Index>(t)] = c;
  }
  return LinearPredictor(std::move(basis), std::move(coef));
}

double lx_index_prob(const DiscreteLaw& law, std::uint32_t l, std::uint32_t x) { return law.lx_prob(l, x); }

// Observed-data mass P(R = r, L_(r) = l_(r), X = x).
double observed_mass(const DiscreteLaw& law, std::uint32_t r, std::uint32_t l, std::uint32_t x) {
  const std::uint32_t full = (1u << law.k()) - 1u;
  const std::uint32_t miss = full & ~r;
  const std::uint32_t lo = l & r;
  double s = 0.0;
  for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
    s += law.prob(r, lo | lm, x);
    if (lm == 0) break;
  }
  return s;
}

struct PopulationSetup {
  Dataset data;
  double beta = 0.0;
};

PopulationSetup population(const DiscreteLaw& law, const TargetFunctional& b) {
  return {law.observed_data(), true_functional(law, b)};
}

double aipw_population_mean(const DiscreteLaw& law, const TargetFunctional& b, const SelectionModel& selection,
                            const PatternMixtureModel& mixture, double beta) {
  const auto pop = law.observed_data();
  EstimatorConfig config;
  config.family = BasisFamily::saturated;
  config.compute_se = false;
  config.selection_override = selection;
  config.mixture_override = mixture;
  const auto eqs = build_stacked_equations(pop, b, config, EstimatorKind::aipw);
  Eigen::VectorXd omega = eqs.omega_hat();
  omega[omega.size() - 1] = beta;
  return eqs.mean(omega)[omega.size() - 1];
}

void shift_all(LinearPredictor& lp, double by) { lp.coef.array() += by; }

}  // namespace

double true_functional(const DiscreteLaw& law, const TargetFunctional& b) {
  const std::uint32_t full = (1u << law.k()) - 1u;
  double s = 0.0;
  for (std::uint32_t x = 0; x < (1u << law.p()); ++x) {
    for (std::uint32_t l = 0; l <= full; ++l) s += lx_index_prob(law, l, x) * b(law.l_values(l));
  }
  return s;
}

double verify_nsc(const DiscreteLaw& law) {
  const int k = law.k();
  const std::uint32_t full = (1u << k) - 1u;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    const std::uint32_t bit = 1u << i;
    for (std::uint32_t x = 0; x < (1u << law.p()); ++x) {
      for (std::uint32_t r = 0; r <= full; ++r) {
        if (r & bit) continue;
        for (std::uint32_t l = 0; l <= full; ++l) {
          if (l & bit) continue;
          const double a = law.prob(r, l, x), b = law.prob(r | bit, l, x);
          const double c = law.prob(r, l | bit, x), d = law.prob(r | bit, l | bit, x);
          worst = std::max(worst, std::abs(std::log(a) + std::log(d) - std::log(b) - std::log(c)));
        }
      }
    }
  }
  return worst;
}

IdentificationReport verify_identification(const DiscreteLaw& law, const TargetFunctional& b) {
  const int k = law.k();
  const std::uint32_t full = (1u << k) - 1u;
  const std::uint32_t nx = 1u << law.p();
  const std::size_t n_lx = std::size_t{1} << (k + law.p());
  auto lx = [k](std::uint32_t l, std::uint32_t x) { return l | (static_cast<std::size_t>(x) << k); };

  // lambda_hat[T] over (l, x), built in order of |T| from observed-data cells only.
  std::vector<std::vector<double>> lam(std::size_t{1} << k, std::vector<double>(n_lx, 0.0));
  std::vector<std::uint32_t> order;
  for (std::uint32_t t = 1; t <= full; ++t) order.push_back(t);
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint32_t a, std::uint32_t c) { return std::popcount(a) < std::popcount(c); });
  for (std::uint32_t t : order) {
    const std::uint32_t r = full & ~t;
    for (std::uint32_t x = 0; x < nx; ++x) {
      for (std::uint32_t l = 0; l <= full; ++l) {
        if (l & t) continue;  // lambda_T does not read L_T; fill all l_T at once
        double den = 0.0;
        for (std::uint32_t lt = t;; lt = (lt - 1) & t) {
          const std::uint32_t ll = l | lt;
          double s = 0.0;
          for (std::uint32_t u = (t - 1) & t; u != 0; u = (u - 1) & t) s += lam[u][lx(ll, x)];
          den += law.prob(full, ll, x) * std::exp(s);
          if (lt == 0) break;
        }
        const double value = std::log(observed_mass(law, r, l, x) / den);
        for (std::uint32_t lt = t;; lt = (lt - 1) & t) {
          lam[t][lx(l | lt, x)] = value;
          if (lt == 0) break;
        }
      }
    }
  }

  IdentificationReport rep;
  std::vector<double> logw(std::size_t{1} << k);
  for (std::uint32_t x = 0; x < nx; ++x) {
    for (std::uint32_t l = 0; l <= full; ++l) {
      for (std::uint32_t r = 0; r <= full; ++r) {
        const std::uint32_t miss = full & ~r;
        double s = 0.0;
        for (std::uint32_t u = miss; u != 0; u = (u - 1) & miss) s += lam[u][lx(l, x)];
        logw[r] = s;
      }
      normalize_log_weights(logw);
      const double plx = law.lx_prob(l, x);
      for (std::uint32_t r = 0; r <= full; ++r) {
        rep.reconstruction_error = std::max(rep.reconstruction_error, std::abs(logw[r] - law.prob(r, l, x) / plx));
      }
    }
  }

  // Pattern-mixture means by OR-weighting the complete-case cells.
  rep.beta_true = true_functional(law, b);
  double beta = 0.0;
  for (std::uint32_t x = 0; x < nx; ++x) {
    for (std::uint32_t r = 0; r <= full; ++r) {
      const std::uint32_t miss = full & ~r;
      for (std::uint32_t lo = r;; lo = (lo - 1) & r) {
        double num = 0.0, den = 0.0;
        for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
          const std::uint32_t ll = lo | lm;
          double s = 0.0;
          for (std::uint32_t u = miss; u != 0; u = (u - 1) & miss) s += lam[u][lx(ll, x)];
          const double w = law.prob(full, ll, x) * std::exp(s);
          num += w * b(law.l_values(ll));
          den += w;
          if (lm == 0) break;
        }
        beta += observed_mass(law, r, lo, x) * num / den;
        if (lo == 0) break;
      }
    }
  }
  rep.beta_reconstructed = beta;
  rep.beta_error = std::abs(beta - rep.beta_true);
  return rep;
}

SymmetryReport verify_symmetry(const DiscreteLaw& law) {
  if (law.k() != 3) throw std::invalid_argument("verify_symmetry: K = 3 only");
  const std::uint32_t full = 7u;
  SymmetryReport rep;
  // log OR between R_i and R_j with R_k fixed at rk, from cell probabilities.
  auto log_or = [&](int i, int j, int rk_bit, std::uint32_t l, std::uint32_t x, bool via_i) {
    const int kk = 3 - i - j;
    const std::uint32_t base = rk_bit ? (1u << kk) : 0u;
    auto c = [&](int ri, int rj) { return law.prob(base | (ri << i) | (rj << j), l, x); };
    // conditional odds of R_i = 0 given R_j, or of R_j = 0 given R_i
    if (via_i) return std::log(c(0, 0) / c(1, 0)) - std::log(c(0, 1) / c(1, 1));
    return std::log(c(0, 0) / c(0, 1)) - std::log(c(1, 0) / c(1, 1));
  };
  for (std::uint32_t x = 0; x < (1u << law.p()); ++x) {
    double gamma_ref = std::numeric_limits<double>::quiet_NaN();
    for (std::uint32_t l = 0; l <= full; ++l) {
      double gammas[3];
      for (int kk = 0; kk < 3; ++kk) {
        const int i = kk == 0 ? 1 : 0;
        const int j = kk == 2 ? 1 : 2;
        const double a = log_or(i, j, 1, l, x, true);
        rep.pair_asymmetry = std::max(rep.pair_asymmetry, std::abs(a - log_or(i, j, 1, l, x, false)));
        // Compare with L_i = L_j = 0 at the same L_k.
        const std::uint32_t l_ref = l & (1u << kk);
        rep.pair_l_dependence = std::max(rep.pair_l_dependence, std::abs(a - log_or(i, j, 1, l_ref, x, true)));
        gammas[kk] = log_or(i, j, 0, l, x, true) - a;
      }
      const double lo = std::min({gammas[0], gammas[1], gammas[2]});
      const double hi = std::max({gammas[0], gammas[1], gammas[2]});
      rep.gamma_pairing_spread = std::max(rep.gamma_pairing_spread, hi - lo);
      if (std::isnan(gamma_ref)) gamma_ref = gammas[0];
      rep.gamma_l_variation = std::max(rep.gamma_l_variation, std::abs(gammas[0] - gamma_ref));
    }
  }
  return rep;
}

SelectionModel selection_model_of(const DiscreteLaw& law) {
  const int k = law.k(), p = law.p();
  if (verify_nsc(law) > 1e-9) throw std::invalid_argument("selection_model_of: law violates no self-censoring");
  const auto& comps = law.components();
  if (k != 3 && !comps.interactions.empty()) {
    throw std::invalid_argument("selection_model_of: indicator interactions are modeled for K = 3 only");
  }
  const std::uint32_t full = (1u << k) - 1u;
  const auto cols = all_columns(p);
  auto lam = [&law](std::uint32_t subset) {
    return [&law, subset](std::span<const double> l, std::span<const double> x) {
      return law.lambda(subset, to_bits(l), to_bits(x));
    };
  };
  std::vector<LinearPredictor> dh, baseline;
  for (int i = 0; i < k; ++i) {
    const auto a = lam(1u << i);
    const std::vector<double> zero(k, 0.0);
    dh.push_back(mobius_fit(bases::saturated(k, full & ~(1u << i), cols, true, false), k, p,
                            [&](std::span<const double> l, std::span<const double> x) { return a(l, x) - a(zero, x); }));
    baseline.push_back(mobius_fit(bases::saturated(k, 0, cols, false, true), k, p,
                                  [&](std::span<const double>, std::span<const double> x) { return -a(zero, x); }));
  }
  std::optional<ThetaTerms> theta;
  if (k == 3) {
    ThetaTerms t;
    for (int j = 0; j < 3; ++j) t.pair[j] = mobius_fit(bases::saturated(k, 1u << j, cols, false, true), k, p, lam(full & ~(1u << j)));
    t.triple = mobius_fit(bases::saturated(k, 0, cols, false, true), k, p, lam(full));
    theta = std::move(t);
  }
  return SelectionModel(OddsRatioSpec(k, std::move(dh)), std::move(baseline), std::move(theta));
}

PatternMixtureModel mixture_model_of(const DiscreteLaw& law, const TargetFunctional& b, const SelectionModel* odds) {
  const int k = law.k(), p = law.p();
  const std::uint32_t full = (1u << k) - 1u;
  const auto cols = all_columns(p);
  PatternMixtureModel model;
  for (std::uint32_t r = 0; r < full; ++r) {
    const Pattern pat(r, k);
    const std::uint32_t miss = full & ~r;
    auto mean = [&](std::span<const double> l, std::span<const double> x) {
      const std::uint32_t lo = to_bits(l) & r, xb = to_bits(x);
      double num = 0.0, den = 0.0;
      for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
        const std::uint32_t ll = lo | lm;
        const auto lv = law.l_values(ll);
        const double lognum = odds ? odds->log_numerator(pat, lv, x) : law.log_numerator(miss, ll, xb);
        const double w = law.prob(full, ll, xb) * std::exp(lognum);
        num += w * b(lv);
        den += w;
        if (lm == 0) break;
      }
      return num / den;
    };
    MixtureComponent comp;
    comp.pattern = pat;
    auto fit = mobius_fit(bases::saturated(k, r, cols, false, true), k, p, mean);
    comp.basis = std::move(fit.basis);
    comp.coef = std::move(fit.coef);
    model.set(std::move(comp));
  }
  return model;
}

double verify_enumeration_closure(const DiscreteLaw& law, const TargetFunctional& b) {
  const int k = law.k();
  const std::uint32_t full = (1u << k) - 1u;
  double worst = 0.0;
  double total = 0.0;
  for (double v : law.table()) total += v;
  worst = std::abs(total - 1.0);
  const auto model = selection_model_of(law);
  const auto mixture = mixture_model_of(law, b);
  for (std::uint32_t x = 0; x < (1u << law.p()); ++x) {
    const auto xv = law.x_values(x);
    for (std::uint32_t l = 0; l <= full; ++l) {
      const auto lv = law.l_values(l);
      const auto pi = pattern_prob_all(model, lv, xv);
      double marg = 0.0;
      for (std::uint32_t r = 0; r <= full; ++r) {
        marg += law.prob(r, l, x);
        worst = std::max(worst, std::abs(pi[r] - law.prob(r, l, x) / law.lx_prob(l, x)));
      }
      worst = std::max(worst, std::abs(marg - law.lx_prob(l, x)));
      // E[b | r, l_(r), x] directly from the table.
      for (std::uint32_t r = 0; r < full; ++r) {
        const std::uint32_t miss = full & ~r, lo = l & r;
        double num = 0.0, den = 0.0;
        for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
          num += law.prob(r, lo | lm, x) * b(law.l_values(lo | lm));
          den += law.prob(r, lo | lm, x);
          if (lm == 0) break;
        }
        worst = std::max(worst, std::abs(num / den - mixture.predict(Pattern(r, k), lv, xv)));
      }
    }
  }
  return worst;
}

InfluenceReport verify_if_mean_zero(const DiscreteLaw& law, const TargetFunctional& b, double beta_shift) {
  InfluenceReport rep;
  const double beta = true_functional(law, b) + beta_shift;
  rep.phi_odds = aipw_population_mean(law, b, selection_model_of(law), mixture_model_of(law, b), beta);

  const int k = law.k();
  const std::uint32_t full = (1u << k) - 1u;
  const std::uint32_t nx = 1u << law.p();
  // Delta(r, l, x) = phi_full - E[phi_full | r, l_(r), x]; beta cancels except through phi_full.
  auto delta = [&](std::uint32_t r, std::uint32_t l, std::uint32_t x) {
    const std::uint32_t miss = full & ~r, lo = l & r;
    double num = 0.0, den = 0.0;
    for (std::uint32_t lm = miss;; lm = (lm - 1) & miss) {
      num += law.prob(r, lo | lm, x) * (b(law.l_values(lo | lm)) - beta);
      den += law.prob(r, lo | lm, x);
      if (lm == 0) break;
    }
    return (b(law.l_values(l)) - beta) - num / den;
  };
  double mean = 0.0;
  for (int i = 0; i < k; ++i) {
    const std::uint32_t bit = 1u << i;
    const std::uint32_t loo = full & ~bit;
    for (std::uint32_t x = 0; x < nx; ++x) {
      for (std::uint32_t l = 0; l <= full; ++l) {
        if (l & bit) continue;
        // Context (l_{-i}, x): sum over l_i of the needed masses.
        double all = 0.0, r_i0 = 0.0, others1 = 0.0, cc = 0.0, loo_mass = 0.0, delta_num = 0.0;
        for (std::uint32_t li : {0u, bit}) {
          for (std::uint32_t r = 0; r <= full; ++r) {
            const double pr = law.prob(r, l | li, x);
            all += pr;
            if (!(r & bit)) {
              r_i0 += pr;
              delta_num += pr * delta(r, l | li, x);
            }
            if ((r & loo) == loo) others1 += pr;
          }
          cc += law.prob(full, l | li, x);
          loo_mass += law.prob(loo, l | li, x);
        }
        const double e_missing = r_i0 / all;
        const double p_others = others1 / all;
        const double q = cc / (cc + loo_mass);
        const double e_delta = delta_num / r_i0;
        // Records with R_{-i} = 1: R_i = 1 (mass cc) and R_i = 0 (mass loo_mass).
        const double factor = -e_missing / p_others * q / (1.0 - q) * e_delta;
        mean += factor * (cc * (1.0 / q - 1.0) + loo_mass * (0.0 - 1.0));
      }
    }
  }
  rep.phi_adj = mean;
  return rep;
}

std::string to_string(DrScenario s) {
  switch (s) {
    case DrScenario::both_correct: return "both_correct";
    case DrScenario::pi_wrong: return "pi_wrong";
    case DrScenario::pm_wrong: return "pm_wrong";
    case DrScenario::both_wrong: return "both_wrong";
    case DrScenario::or_wrong: return "or_wrong";
  }
  return "?";
}

double verify_double_robustness(const DiscreteLaw& law, DrScenario scenario, const TargetFunctional& b) {
  constexpr double kShift = 0.3;
  SelectionModel selection = selection_model_of(law);
  const bool pi_wrong = scenario == DrScenario::pi_wrong || scenario == DrScenario::both_wrong;
  const bool pm_wrong = scenario == DrScenario::pm_wrong || scenario == DrScenario::both_wrong;
  if (pi_wrong) {
    for (int i = 0; i < law.k(); ++i) shift_all(selection.baseline(i), kShift);
  }
  if (scenario == DrScenario::or_wrong) {
    for (int i = 0; i < law.k(); ++i) shift_all(selection.odds().delta_h(i), kShift);
  }
  PatternMixtureModel mixture =
      scenario == DrScenario::or_wrong ? mixture_model_of(law, b, &selection) : mixture_model_of(law, b);
  if (pm_wrong) {
    PatternMixtureModel shifted;
    for (auto comp : mixture.components()) {
      comp.coef.array() += kShift;
      shifted.set(std::move(comp));
    }
    mixture = std::move(shifted);
  }
  return aipw_population_mean(law, b, selection, mixture, true_functional(law, b));
}

double verify_u_theta(const DiscreteLaw& law, double theta_shift) {
  if (law.k() != 3) throw std::invalid_argument("verify_u_theta: K = 3 only");
  const auto model = selection_model_of(law);
  const auto& theta = *model.theta();
  const auto pop = population(law, TargetFunctional::product());
  const Dataset& data = pop.data;
  ThetaBases tb;
  Eigen::Index q = 0;
  for (int j = 0; j < 3; ++j) {
    tb.pair[j] = theta.pair[j].basis;
    q += theta.pair[j].coef.size();
  }
  tb.triple = theta.triple.basis;
  q += theta.triple.coef.size();
  Eigen::VectorXd coef(q);
  Eigen::Index at = 0;
  for (int j = 0; j < 3; ++j) {
    coef.segment(at, theta.pair[j].coef.size()) = theta.pair[j].coef;
    at += theta.pair[j].coef.size();
  }
  coef.tail(theta.triple.coef.size()) = theta.triple.coef;
  coef[at] += theta_shift;

  const auto design = make_theta_design(data, tb);
  Eigen::MatrixXd main = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), 3);
  for (std::size_t row = 0; row < data.size(); ++row) {
    if (!data.pattern(row).is_complete()) continue;
    for (int i = 0; i < 3; ++i) main(static_cast<Eigen::Index>(row), i) = model.main_effect(i, data.l(row), data.x(row));
  }
  const Eigen::MatrixXd u = ee::theta_ipw(design, main, coef);
  const Eigen::VectorXd w = weight_vector(data);
  return ((w.transpose() * u) / w.sum()).cwiseAbs().maxCoeff();
}

double verify_odds_ratio_equation(const DiscreteLaw& law, OddsEquationScenario scenario) {
  constexpr double kShift = 0.3;
  const int k = law.k(), p = law.p();
  const std::uint32_t full = (1u << k) - 1u;
  const auto model = selection_model_of(law);
  const Dataset data = law.observed_data();
  const Eigen::VectorXd w = weight_vector(data);
  const auto cols = all_columns(p);
  const bool baseline_wrong = scenario == OddsEquationScenario::baseline_wrong || scenario == OddsEquationScenario::both_wrong;
  const bool means_wrong = scenario == OddsEquationScenario::means_wrong || scenario == OddsEquationScenario::both_wrong;
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    const auto& dh = model.odds().delta_h(i);
    const auto& base = model.baseline(i);
    const BasisSpec x_basis = bases::saturated(k, 0, cols, false, true);
    // E[d | R = 1, X] for every feature of delta_h, by enumeration.
    const auto nd = static_cast<Eigen::Index>(dh.basis.size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(x_basis.size()), nd);
    for (Eigen::Index f = 0; f < nd; ++f) {
      const auto fit = mobius_fit(x_basis, k, p, [&](std::span<const double>, std::span<const double> x) {
        const std::uint32_t xb = to_bits(x);
        double num = 0.0, den = 0.0;
        for (std::uint32_t l = 0; l <= full; ++l) {
          const double pr = law.prob(full, l, xb);
          num += pr * dh.basis.term_value(static_cast<std::size_t>(f), law.l_values(l), x);
          den += pr;
        }
        return num / den;
      });
      m.col(f) = fit.coef;
    }
    Eigen::VectorXd psi_x = base.coef;
    if (baseline_wrong) psi_x.array() += kShift;
    if (means_wrong) m.array() += kShift;
    const Eigen::MatrixXd u =
        ee::odds_ratio_dr(others_observed(data, i), observed_indicator(data, i), design_matrix(dh.basis, data),
                          design_matrix(base.basis, data), psi_x, design_matrix(x_basis, data), m, dh.coef);
    worst = std::max(worst, ((w.transpose() * u) / w.sum()).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& options) {
  struct Acc {
    std::string name;
    double threshold;
    bool must_exceed;
    double value;
  };
  std::vector<Acc> acc;
  auto upper = [&](const std::string& name, double threshold) -> Acc& {
    for (auto& a : acc) {
      if (a.name == name) return a;
    }
    acc.push_back({name, threshold, false, 0.0});
    return acc.back();
  };
  auto lower = [&](const std::string& name, double threshold) -> Acc& {
    for (auto& a : acc) {
      if (a.name == name) return a;
    }
    acc.push_back({name, threshold, true, std::numeric_limits<double>::infinity()});
    return acc.back();
  };
  auto worst = [](Acc& a, double v) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    a.value = a.must_exceed ? std::min(a.value, v) : std::max(a.value, v);
  };

  const auto product = TargetFunctional::product();
  const auto mean1 = TargetFunctional::mean(0);
  for (int j = 0; j < options.nsc_laws; ++j) {
    const int p = (j % 2) * 2;
    const auto law = build_discrete_law(random_nsc_components(3, p, derive_seed(options.seed, j)));
    worst(upper("nsc_log_odds_ratio", 1e-10), verify_nsc(law));
    for (const auto* f : {&product, &mean1}) {
      const auto id = verify_identification(law, *f);
      worst(upper("identification_reconstruction", 1e-10), id.reconstruction_error);
      worst(upper("identification_beta", 1e-10), id.beta_error);
      const auto inf = verify_if_mean_zero(law, *f);
      worst(upper("phi_odds_mean", 1e-10), std::abs(inf.phi_odds));
      worst(upper("phi_adj_mean", 1e-10), std::abs(inf.phi_adj));
      worst(upper("dr_both_correct", 1e-10), std::abs(verify_double_robustness(law, DrScenario::both_correct, *f)));
      worst(upper("dr_pi_wrong", 1e-10), std::abs(verify_double_robustness(law, DrScenario::pi_wrong, *f)));
      worst(upper("dr_pm_wrong", 1e-10), std::abs(verify_double_robustness(law, DrScenario::pm_wrong, *f)));
      worst(lower("dr_both_wrong", 1e-3), std::abs(verify_double_robustness(law, DrScenario::both_wrong, *f)));
      worst(upper("enumeration_closure", 1e-10), verify_enumeration_closure(law, *f));
    }
    const auto sym = verify_symmetry(law);
    worst(upper("pair_symmetry", 1e-10), sym.pair_asymmetry);
    worst(upper("pair_l_dependence", 1e-10), sym.pair_l_dependence);
    worst(upper("gamma_pairing_spread", 1e-10), sym.gamma_pairing_spread);
    worst(upper("gamma_l_variation", 1e-10), sym.gamma_l_variation);
    worst(upper("u_theta_mean", 1e-12), verify_u_theta(law));
    worst(lower("u_theta_shifted", 1e-4), verify_u_theta(law, 0.2));
    worst(upper("or_equation_baseline_wrong", 1e-10),
          verify_odds_ratio_equation(law, OddsEquationScenario::baseline_wrong));
    worst(upper("or_equation_means_wrong", 1e-10), verify_odds_ratio_equation(law, OddsEquationScenario::means_wrong));
  }
  for (int j = 0; j < options.self_censoring_laws; ++j) {
    const int p = (j % 2) * 2;
    const auto law = build_discrete_law(self_censoring_components(3, p, derive_seed(options.seed, 1000 + j)));
    worst(lower("self_censoring_nsc_violation", 1e-3), verify_nsc(law));
    worst(lower("self_censoring_reconstruction", 1e-3), verify_identification(law, product).reconstruction_error);
  }

  std::vector<OracleCheck> out;
  for (const auto& a : acc) {
    OracleCheck c;
    c.name = a.name;
    c.value = a.value;
    c.threshold = a.threshold;
    c.must_exceed = a.must_exceed;
    c.pass = a.must_exceed ? a.value > a.threshold : a.value <= a.threshold;
    out.push_back(c);
  }
  return out;
}

}  // namespace nsc
