#include "nsc/aipw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nsc/errors.hpp"
#include "nsc/parallel.hpp"
#include "nsc/rng.hpp"
#include "nsc/simgen.hpp"

namespace nsc {

namespace {

std::vector<int> covariate_columns(CovariateMap map, int p) {
  std::vector<int> cols;
  if (map == CovariateMap::identity) {
    for (int m = 0; m < p; ++m) cols.push_back(m);
  } else if (map == CovariateMap::transformed) {
    cols = {p, p + 1};
  }
  return cols;
}

bool uses_transform(const EstimatorConfig& config) {
  return config.selection_covariates == CovariateMap::transformed ||
         config.outcome_covariates == CovariateMap::transformed;
}

std::vector<double> reference_point(const EstimatorConfig& config, int k) {
  if (config.reference.empty()) return std::vector<double>(static_cast<std::size_t>(k), 0.0);
  if (config.reference.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("estimator: reference point must have length K");
  }
  return config.reference;
}

// log pi_r / pi_J from per-variable main effects and K = 3 interactions.
double log_numerator(std::uint32_t missing, int k, const double* main, const double* pair, double triple,
                     bool with_theta) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    if ((missing >> i) & 1u) s += main[i];
  }
  if (with_theta) {
    for (int j = 0; j < 3; ++j) {
      const std::uint32_t others = 7u & ~(1u << j);
      if ((missing & others) == others) s += pair[j];
    }
    if (missing == 7u) s += triple;
  }
  return s;
}

double weighted_mean(const Eigen::VectorXd& v, const Eigen::VectorXd& w, double total) { return w.dot(v) / total; }

}  // namespace

NuisanceBases default_bases(int k, int p, const EstimatorConfig& config) {
  if (uses_transform(config) && p != 2) {
    throw std::invalid_argument("estimator: the covariate transform needs exactly two covariates");
  }
  const std::vector<double> l0 = reference_point(config, k);
  const std::vector<int> raw = covariate_columns(CovariateMap::identity, p);
  const std::vector<int> sel = covariate_columns(config.selection_covariates, p);
  const std::vector<int> out = covariate_columns(config.outcome_covariates, p);
  const bool saturated = config.family == BasisFamily::saturated;
  const std::uint32_t full = (1u << k) - 1u;

  NuisanceBases b;
  for (int i = 0; i < k; ++i) {
    const std::uint32_t others = full & ~(1u << i);
    if (saturated) {
      b.delta_h.push_back(bases::saturated(k, others, raw, true, false, l0));
      b.baseline.push_back(bases::saturated(k, 0, sel, false, true));
      b.feature_mean.push_back(bases::saturated(k, 0, out, false, true));
    } else {
      b.delta_h.push_back(bases::linear_in(k, others, {}, false, l0));
      b.baseline.push_back(bases::covariates(sel, true));
      b.feature_mean.push_back(bases::covariates(out, true));
    }
  }
  if (k == 3 && config.fit_theta) {
    ThetaBases t;
    for (int j = 0; j < 3; ++j) {
      t.pair[j] = saturated ? bases::saturated(k, 1u << j, sel, false, true, l0)
                            : bases::covariates(sel, true);
    }
    t.triple = saturated ? bases::saturated(k, 0, sel, false, true) : bases::covariates({}, true);
    b.theta = std::move(t);
  }
  b.mixture = [k, out, saturated](const Pattern& r) {
    return saturated ? bases::saturated(k, r.index(), out, false, true) : bases::linear_in(k, r.index(), out, true);
  };
  return b;
}

Dataset design_covariates(const Dataset& data, const EstimatorConfig& config) {
  if (!uses_transform(config)) return data;
  if (data.p() != 2) throw std::invalid_argument("estimator: the covariate transform needs exactly two covariates");
  std::vector<double> x;
  x.reserve(data.size() * 4);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.x(r);
    const auto t = misspecify_covariates({row[0], row[1]});
    x.insert(x.end(), {row[0], row[1], t[0], t[1]});
  }
  return data.with_covariates(std::move(x), 4);
}

// Row-major so that a record's main effects and interactions are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct StackedEquations::Impl {
  enum class Kind { univariate, feature_mean, odds, theta, mixture, beta };
  struct BlockInfo {
    Kind kind;
    int index;  // variable or mixture slot
  };

  Dataset data;
  TargetFunctional functional;
  EstimatorKind estimator = EstimatorKind::aipw;
  int k = 0;
  Eigen::Index n = 0;
  Eigen::VectorXd w;
  double total = 0.0;
  Eigen::VectorXd complete;
  Eigen::VectorXd b;
  double clip = 1e-6;
  bool trivial = false;  // no missing data, or complete-case estimator

  // selection layer
  bool selection_fitted = false;
  bool odds_logistic = false;  // psi_LX taken from the univariate fits
  bool with_theta = false;
  std::vector<Eigen::VectorXd> eligible, r_obs;
  std::vector<Eigen::MatrixXd> d, d0, h, hm;
  ThetaDesign theta_design;
  std::array<Eigen::MatrixXd, 3> g0;
  RowMatrix fixed_main, fixed_main0, fixed_pair, fixed_pair0;
  Eigen::VectorXd fixed_triple;

  // mixture layer
  bool mixture_fitted = false;
  MixtureMode mode = MixtureMode::weighted_regression;
  std::vector<Pattern> mix_patterns;
  std::vector<Eigen::VectorXd> in_pattern;
  std::vector<Eigen::MatrixXd> z;
  Eigen::MatrixXd fixed_m;  // n x J

  std::vector<Block> blocks;
  std::vector<BlockInfo> info;
  std::vector<int> univ_block, fm_block, odds_block, mix_block;
  int theta_block = -1;
  int beta_block = -1;
  Eigen::VectorXd omega_hat;
  EstimateReport report;

  struct State {
    RowMatrix main, main0, pair, pair0;
    Eigen::VectorXd triple;
    Eigen::MatrixXd m;
  };

  int add_block(std::string name, Eigen::Index size, Kind kind, int index) {
    Block blk;
    blk.name = std::move(name);
    blk.offset = blocks.empty() ? 0 : blocks.back().offset + blocks.back().size;
    blk.size = size;
    blocks.push_back(std::move(blk));
    info.push_back({kind, index});
    return static_cast<int>(blocks.size()) - 1;
  }

  Eigen::Index total_size() const { return blocks.empty() ? 0 : blocks.back().offset + blocks.back().size; }

  Eigen::VectorXd segment(const Eigen::VectorXd& omega, int blk) const {
    return omega.segment(blocks[blk].offset, blocks[blk].size);
  }

  Eigen::MatrixXd feature_mean_coef(const Eigen::VectorXd& omega, int i) const {
    const Eigen::VectorXd v = segment(omega, fm_block[i]);
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), hm[i].cols(), d[i].cols());
  }

  // Selection quantities on complete rows.
  void selection_state(const Eigen::VectorXd& omega, State& s) const {
    if (!selection_fitted) {
      s.main = fixed_main;
      s.main0 = fixed_main0;
      s.pair = fixed_pair;
      s.pair0 = fixed_pair0;
      s.triple = fixed_triple;
      return;
    }
    s.main.resize(n, k);
    s.main0.resize(n, k);
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd psi_x = segment(omega, univ_block[i]).tail(h[i].cols());
      const Eigen::VectorXd psi_lx =
          odds_logistic ? Eigen::VectorXd(segment(omega, univ_block[i]).head(d[i].cols())) : segment(omega, odds_block[i]);
      const Eigen::VectorXd base = h[i] * psi_x;
      s.main.col(i) = d[i] * psi_lx - base;
      s.main0.col(i) = d0[i] * psi_lx - base;
    }
    s.pair = Eigen::MatrixXd::Zero(n, 3);
    s.pair0 = Eigen::MatrixXd::Zero(n, 3);
    s.triple = Eigen::VectorXd::Zero(n);
    if (with_theta) {
      const Eigen::VectorXd theta = segment(omega, theta_block);
      Eigen::Index at = 0;
      for (int j = 0; j < 3; ++j) {
        const Eigen::Index q = theta_design.basis[j].cols();
        s.pair.col(j) = theta_design.basis[j] * theta.segment(at, q);
        s.pair0.col(j) = g0[j] * theta.segment(at, q);
        at += q;
      }
      s.triple = theta_design.basis[3] * theta.segment(at, theta_design.basis[3].cols());
    }
  }

  void mixture_state(const Eigen::VectorXd& omega, State& s) const {
    if (!mixture_fitted) {
      s.m = fixed_m;
      return;
    }
    const auto jn = static_cast<Eigen::Index>(mix_patterns.size());
    s.m.resize(n, jn);
    for (Eigen::Index j = 0; j < jn; ++j) {
      const Eigen::VectorXd mu = segment(omega, mix_block[static_cast<std::size_t>(j)]);
      const Eigen::MatrixXd& zj = z[static_cast<std::size_t>(j)];
      if (mode == MixtureMode::ratio) {
        const Eigen::Index q = zj.cols();
        s.m.col(j) = (zj * mu.head(q)).cwiseQuotient(zj * mu.tail(q));
      } else {
        s.m.col(j) = zj * mu;
      }
    }
  }

  // exp(log OR(r_j, L | X)) on complete rows.
  Eigen::VectorXd odds_ratio(const State& s, const Pattern& r) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    const std::uint32_t missing = r.missing_mask();
    for (Eigen::Index row = 0; row < n; ++row) {
      if (complete[row] == 0.0) continue;
      const double a = log_numerator(missing, k, s.main.row(row).data(), s.pair.row(row).data(), s.triple[row],
                                     with_theta);
      const double a0 = log_numerator(missing, k, s.main0.row(row).data(), s.pair0.row(row).data(), s.triple[row],
                                      with_theta);
      out[row] = std::exp(a - a0);
    }
    return out;
  }

  // Numerator and denominator of the affine beta equation, per record, and
  // the clip count.
  void beta_terms(const State& s, Eigen::VectorXd& num, Eigen::VectorXd& den, std::size_t* clipped) const {
    num = Eigen::VectorXd::Zero(n);
    den = Eigen::VectorXd::Zero(n);
    if (clipped) *clipped = 0;
    if (trivial) {
      num = complete.cwiseProduct(b);
      den = complete;
      return;
    }
    const std::size_t np = std::size_t{1} << k;
    std::vector<double> logw(np);
    const bool augment = estimator == EstimatorKind::aipw;
    std::vector<int> slot_of(np, -1);
    for (std::size_t j = 0; j < mix_patterns.size(); ++j) slot_of[mix_patterns[j].index()] = static_cast<int>(j);
    for (Eigen::Index row = 0; row < n; ++row) {
      const std::uint32_t pat = data.pattern(static_cast<std::size_t>(row)).index();
      if (complete[row] != 0.0) {
        for (std::size_t idx = 0; idx < np; ++idx) {
          const std::uint32_t missing = static_cast<std::uint32_t>(np - 1) & ~static_cast<std::uint32_t>(idx);
          logw[idx] = log_numerator(missing, k, s.main.row(row).data(), s.pair.row(row).data(), s.triple[row],
                                    with_theta);
        }
        normalize_log_weights(logw);
        double pi_j = logw[np - 1];
        if (pi_j < clip) {
          pi_j = clip;
          if (clipped && w[row] > 0.0) ++*clipped;
        }
        const double inv = 1.0 / pi_j;
        double nu = inv * b[row];
        double de = inv;
        if (augment) {
          for (std::size_t j = 0; j < mix_patterns.size(); ++j) {
            const double pj = logw[mix_patterns[j].index()];
            nu -= inv * pj * s.m(row, static_cast<Eigen::Index>(j));
            de -= inv * pj;
          }
        }
        num[row] = nu;
        den[row] = de;
      } else if (augment && slot_of[pat] >= 0) {
        num[row] = s.m(row, slot_of[pat]);
        den[row] = 1.0;
      }
    }
  }

  bool depends(int blk, int on) const {
    if (blk == on) return true;
    const Kind a = info[blk].kind;
    const Kind o = info[on].kind;
    switch (a) {
      case Kind::univariate:
      case Kind::feature_mean:
        return false;
      case Kind::odds:
        return (o == Kind::univariate || o == Kind::feature_mean) && info[on].index == info[blk].index;
      case Kind::theta:
        return o == Kind::univariate || o == Kind::odds;
      case Kind::mixture:
        return o == Kind::univariate || o == Kind::odds || o == Kind::theta;
      case Kind::beta:
        return o != Kind::feature_mean;
    }
    return false;
  }

  // Scores of the selected blocks (others left zero).
  Eigen::MatrixXd scores(const Eigen::VectorXd& omega, const std::vector<bool>& want) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, total_size());
    bool need_sel = false;
    bool need_mix = false;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      if (!want[a]) continue;
      if (info[a].kind == Kind::theta || info[a].kind == Kind::mixture || info[a].kind == Kind::beta) need_sel = true;
      if (info[a].kind == Kind::beta) need_mix = true;
    }
    State s;
    if (need_sel && !trivial) selection_state(omega, s);
    if (need_mix && !trivial && estimator == EstimatorKind::aipw) mixture_state(omega, s);
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      if (!want[a]) continue;
      const Block& blk = blocks[a];
      const int i = info[a].index;
      const Eigen::VectorXd par = segment(omega, static_cast<int>(a));
      switch (info[a].kind) {
        case Kind::univariate:
          out.middleCols(blk.offset, blk.size) = ee::univariate_selection(eligible[i], r_obs[i], d[i], h[i], par);
          break;
        case Kind::feature_mean:
          out.middleCols(blk.offset, blk.size) = ee::feature_means(complete, d[i], hm[i], feature_mean_coef(omega, i));
          break;
        case Kind::odds: {
          const Eigen::VectorXd psi_x = segment(omega, univ_block[i]).tail(h[i].cols());
          out.middleCols(blk.offset, blk.size) =
              ee::odds_ratio_dr(eligible[i], r_obs[i], d[i], h[i], psi_x, hm[i], feature_mean_coef(omega, i), par);
          break;
        }
        case Kind::theta:
          out.middleCols(blk.offset, blk.size) = ee::theta_ipw(theta_design, s.main, par);
          break;
        case Kind::mixture: {
          const Pattern& r = mix_patterns[static_cast<std::size_t>(i)];
          const Eigen::VectorXd odds = odds_ratio(s, r);
          const Eigen::MatrixXd& zj = z[static_cast<std::size_t>(i)];
          if (mode == MixtureMode::ratio) {
            const Eigen::Index q = zj.cols();
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
            out.middleCols(blk.offset, q) = ee::pattern_mixture(complete, ones, zj, odds.cwiseProduct(b), par.head(q));
            out.middleCols(blk.offset + q, q) = ee::pattern_mixture(complete, ones, zj, odds, par.tail(q));
          } else {
            out.middleCols(blk.offset, blk.size) = ee::pattern_mixture(complete, odds, zj, b, par);
          }
          break;
        }
        case Kind::beta: {
          Eigen::VectorXd num, den;
          beta_terms(s, num, den, nullptr);
          out.col(blk.offset) = num - par[0] * den;
          break;
        }
      }
    }
    return out;
  }
};

StackedEquations::StackedEquations(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
StackedEquations::StackedEquations(StackedEquations&&) noexcept = default;
StackedEquations& StackedEquations::operator=(StackedEquations&&) noexcept = default;
StackedEquations::~StackedEquations() = default;

const Eigen::VectorXd& StackedEquations::omega_hat() const { return impl_->omega_hat; }
const std::vector<StackedEquations::Block>& StackedEquations::blocks() const { return impl_->blocks; }
Eigen::Index StackedEquations::size() const { return impl_->total_size(); }
const Dataset& StackedEquations::data() const { return impl_->data; }
const EstimateReport& StackedEquations::report() const { return impl_->report; }

Eigen::MatrixXd StackedEquations::scores(const Eigen::VectorXd& omega) const {
  return impl_->scores(omega, std::vector<bool>(impl_->blocks.size(), true));
}

Eigen::VectorXd StackedEquations::mean(const Eigen::VectorXd& omega) const {
  return scores(omega).transpose() * impl_->w / impl_->total;
}

Eigen::MatrixXd StackedEquations::jacobian(const Eigen::VectorXd& omega, double rel_step) const {
  const Impl& im = *impl_;
  const Eigen::Index p = im.total_size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p, p);
  const std::size_t nb = im.blocks.size();
  Eigen::VectorXd probe = omega;
  for (std::size_t on = 0; on < nb; ++on) {
    std::vector<bool> want(nb, false);
    for (std::size_t a = 0; a < nb; ++a) want[a] = im.depends(static_cast<int>(a), static_cast<int>(on));
    const Block& blk = im.blocks[on];
    for (Eigen::Index c = blk.offset; c < blk.offset + blk.size; ++c) {
      const double step = rel_step * (1.0 + std::abs(omega[c]));
      probe[c] = omega[c] + step;
      const Eigen::VectorXd up = im.scores(probe, want).transpose() * im.w;
      probe[c] = omega[c] - step;
      const Eigen::VectorXd down = im.scores(probe, want).transpose() * im.w;
      probe[c] = omega[c];
      jac.col(c) = (up - down) / (2.0 * step * im.total);
    }
  }
  return jac;
}

StackedEquations build_stacked_equations(const Dataset& input, const TargetFunctional& functional,
                                         const EstimatorConfig& config, EstimatorKind kind) {
  if (input.empty()) throw std::invalid_argument("estimator: empty dataset");
  auto im = std::make_unique<StackedEquations::Impl>();
  im->data = design_covariates(input, config);
  const Dataset& data = im->data;
  im->functional = functional;
  im->estimator = kind;
  im->k = data.k();
  im->n = static_cast<Eigen::Index>(data.size());
  im->w = weight_vector(data);
  im->total = im->w.sum();
  im->clip = config.clip;
  if (!(im->total > 0.0)) throw SupportError("estimator: total weight is zero");
  if (!(config.clip > 0.0 && config.clip < 1.0)) throw std::invalid_argument("estimator: clip must lie in (0, 1)");
  const int k = im->k;
  const Pattern full = Pattern::complete(k);
  im->complete = pattern_indicator(data, full);
  im->b = Eigen::VectorXd::Zero(im->n);
  for (Eigen::Index r = 0; r < im->n; ++r) {
    if (im->complete[r] != 0.0) im->b[r] = functional(data.l(static_cast<std::size_t>(r)));
  }

  EstimateReport& rep = im->report;
  rep.functional = functional.name();
  rep.estimator = kind;
  rep.n = data.size();
  rep.patterns_used = pattern_support(data);
  rep.n_complete = rep.patterns_used.complete_count();
  if (!(rep.patterns_used.mass.back() > 0.0)) throw SupportError("estimator: no complete cases");

  bool any_missing = false;
  for (std::size_t idx = 0; idx + 1 < rep.patterns_used.mass.size(); ++idx) {
    if (rep.patterns_used.mass[idx] > 0.0) any_missing = true;
  }
  im->trivial = kind == EstimatorKind::complete_case || !any_missing;

  if (!im->trivial) {
    const NuisanceBases bases = config.bases ? *config.bases : default_bases(k, input.p(), config);
    const std::vector<double> l0 = reference_point(config, k);
    if (bases.delta_h.size() != static_cast<std::size_t>(k) || bases.baseline.size() != static_cast<std::size_t>(k) ||
        bases.feature_mean.size() != static_cast<std::size_t>(k)) {
      throw std::invalid_argument("estimator: need one basis per variable for each selection component");
    }
    const std::size_t np = std::size_t{1} << k;
    SelectionModel model;
    if (config.selection_override) {
      model = *config.selection_override;
      if (model.k() != k) throw std::invalid_argument("estimator: selection model has wrong K");
      im->with_theta = model.theta().has_value();
      im->fixed_main = Eigen::MatrixXd::Zero(im->n, k);
      im->fixed_main0 = Eigen::MatrixXd::Zero(im->n, k);
      im->fixed_pair = Eigen::MatrixXd::Zero(im->n, 3);
      im->fixed_pair0 = Eigen::MatrixXd::Zero(im->n, 3);
      im->fixed_triple = Eigen::VectorXd::Zero(im->n);
      for (Eigen::Index r = 0; r < im->n; ++r) {
        if (im->complete[r] == 0.0) continue;
        const auto row = static_cast<std::size_t>(r);
        for (int i = 0; i < k; ++i) {
          im->fixed_main(r, i) = model.main_effect(i, data.l(row), data.x(row));
          im->fixed_main0(r, i) = model.main_effect(i, l0, data.x(row));
        }
        if (im->with_theta) {
          for (int j = 0; j < 3; ++j) {
            im->fixed_pair(r, j) = model.theta()->pair[j](data.l(row), data.x(row));
            im->fixed_pair0(r, j) = model.theta()->pair[j](l0, data.x(row));
          }
          im->fixed_triple[r] = model.theta()->triple(data.l(row), data.x(row));
        }
      }
    } else {
      for (int i = 0; i < k; ++i) {
        if (!rep.patterns_used.leave_one_out_ok[i]) {
          throw SupportError("estimator: no leave-one-out support for L" + std::to_string(i + 1));
        }
      }
      im->selection_fitted = true;
      im->odds_logistic = config.odds_estimator == OddsEstimator::logistic ||
                          (config.odds_estimator == OddsEstimator::automatic && input.p() == 0);
      std::vector<LinearPredictor> delta, baseline;
      for (int i = 0; i < k; ++i) {
        im->eligible.push_back(others_observed(data, i));
        im->r_obs.push_back(observed_indicator(data, i));
        im->d.push_back(design_matrix(bases.delta_h[i], data));
        im->d0.push_back(design_matrix_at(bases.delta_h[i], data, l0));
        im->h.push_back(design_matrix(bases.baseline[i], data));
        im->hm.push_back(design_matrix(bases.feature_mean[i], data));

        const FitResult uni = fit_univariate_selection(data, i, bases.delta_h[i], bases.baseline[i], config.solver);
        const auto qd = static_cast<Eigen::Index>(bases.delta_h[i].size());
        const auto qh = static_cast<Eigen::Index>(bases.baseline[i].size());
        LinearPredictor base(bases.baseline[i], uni.coefficients.tail(qh));
        FitResult fm;
        if (!im->odds_logistic) fm = fit_feature_means(data, bases.delta_h[i], bases.feature_mean[i]);
        FitResult dr;
        if (im->odds_logistic) {
          dr.coefficients = uni.coefficients.head(qd);
          dr.final_residual_norm = 0.0;
        } else {
          FeatureMeanModel means{bases.feature_mean[i],
                                 Eigen::Map<const Eigen::MatrixXd>(
                                     fm.coefficients.data(), static_cast<Eigen::Index>(bases.feature_mean[i].size()), qd)};
          dr = fit_or_doubly_robust(data, i, bases.delta_h[i], base, means, config.solver, uni.coefficients.head(qd));
        }
        rep.diagnostics.newton_iterations += uni.iterations + dr.iterations;
        rep.diagnostics.max_residual =
            std::max({rep.diagnostics.max_residual, uni.final_residual_norm, dr.final_residual_norm});
        im->univ_block.push_back(im->add_block("selection:L" + std::to_string(i + 1), qd + qh,
                                               StackedEquations::Impl::Kind::univariate, i));
        im->omega_hat.conservativeResize(im->total_size());
        im->omega_hat.segment(im->blocks[im->univ_block[i]].offset, qd + qh) = uni.coefficients;
        if (im->odds_logistic) {
          im->fm_block.push_back(-1);
          im->odds_block.push_back(-1);
        } else {
          im->fm_block.push_back(im->add_block("feature_mean:L" + std::to_string(i + 1), fm.coefficients.size(),
                                               StackedEquations::Impl::Kind::feature_mean, i));
          im->odds_block.push_back(
              im->add_block("odds_ratio:L" + std::to_string(i + 1), qd, StackedEquations::Impl::Kind::odds, i));
          im->omega_hat.conservativeResize(im->total_size());
          im->omega_hat.segment(im->blocks[im->fm_block[i]].offset, fm.coefficients.size()) = fm.coefficients;
          im->omega_hat.segment(im->blocks[im->odds_block[i]].offset, qd) = dr.coefficients;
        }
        delta.emplace_back(bases.delta_h[i], dr.coefficients);
        baseline.push_back(std::move(base));
      }
      model = SelectionModel(OddsRatioSpec(k, std::move(delta), l0), std::move(baseline));

      if (k == 3 && config.fit_theta && bases.theta) {
        bool supported = true;
        for (std::uint32_t idx : {1u, 2u, 4u, 0u}) supported = supported && rep.patterns_used.supported(Pattern(idx, 3));
        if (supported) {
          const FitResult th = fit_theta_ipw(data, model, *bases.theta, config.solver);
          rep.diagnostics.newton_iterations += th.iterations;
          rep.diagnostics.max_residual = std::max(rep.diagnostics.max_residual, th.final_residual_norm);
          model.theta() = theta_terms(*bases.theta, th.coefficients);
          im->with_theta = true;
          im->theta_design = make_theta_design(data, *bases.theta);
          for (int j = 0; j < 3; ++j) im->g0[j] = design_matrix_at(bases.theta->pair[j], data, l0);
          im->theta_block = im->add_block("interactions", th.coefficients.size(), StackedEquations::Impl::Kind::theta, 0);
          im->omega_hat.conservativeResize(im->total_size());
          im->omega_hat.tail(th.coefficients.size()) = th.coefficients;
        } else {
          rep.warnings.push_back("interaction terms not fitted: a single-observed or all-missing pattern has no records");
        }
      }
    }
    rep.selection = model;

    if (kind == EstimatorKind::aipw) {
      im->mode = config.mixture_mode;
      for (std::size_t idx = 0; idx + 1 < np; ++idx) {
        const Pattern r(static_cast<std::uint32_t>(idx), k);
        if (rep.patterns_used.mass[idx] > 0.0) {
          im->mix_patterns.push_back(r);
        } else {
          rep.dropped_patterns.push_back(r);
        }
      }
      if (!rep.dropped_patterns.empty()) {
        std::string list;
        for (const auto& r : rep.dropped_patterns) list += (list.empty() ? "" : " ") + r.to_string();
        rep.warnings.push_back("patterns without records dropped from the augmentation: " + list);
      }
      PatternMixtureModel mixture;
      if (config.mixture_override) {
        mixture = *config.mixture_override;
        const auto jn = static_cast<Eigen::Index>(im->mix_patterns.size());
        im->fixed_m = Eigen::MatrixXd::Zero(im->n, jn);
        for (Eigen::Index j = 0; j < jn; ++j) {
          const Pattern& r = im->mix_patterns[static_cast<std::size_t>(j)];
          for (Eigen::Index row = 0; row < im->n; ++row) {
            const auto rr = static_cast<std::size_t>(row);
            if (im->complete[row] != 0.0 || data.pattern(rr) == r) {
              im->fixed_m(row, j) = mixture.predict(r, data.l(rr), data.x(rr));
            }
          }
        }
      } else {
        im->mixture_fitted = true;
        for (const Pattern& r : im->mix_patterns) {
          const BasisSpec basis = bases.mixture(r);
          MixtureComponent comp = fit_pattern_mixture(data, r, model, functional, basis, im->mode);
          im->in_pattern.push_back(pattern_indicator(data, r));
          im->z.push_back(design_matrix(basis, data));
          const Eigen::Index q = comp.coef.size();
          const Eigen::Index size = im->mode == MixtureMode::ratio ? 2 * q : q;
          im->mix_block.push_back(im->add_block("mixture:" + r.to_string(), size,
                                                StackedEquations::Impl::Kind::mixture,
                                                static_cast<int>(im->mix_block.size())));
          im->omega_hat.conservativeResize(im->total_size());
          im->omega_hat.segment(im->total_size() - size, q) = comp.coef;
          if (im->mode == MixtureMode::ratio) im->omega_hat.tail(q) = comp.denominator_coef;
          mixture.set(std::move(comp));
        }
      }
      rep.mixture = std::move(mixture);
    }
  }

  im->beta_block = im->add_block("beta", 1, StackedEquations::Impl::Kind::beta, 0);
  im->omega_hat.conservativeResize(im->total_size());
  StackedEquations::Impl::State s;
  if (!im->trivial) {
    im->selection_state(im->omega_hat, s);
    if (kind == EstimatorKind::aipw) im->mixture_state(im->omega_hat, s);
  }
  Eigen::VectorXd num, den;
  im->beta_terms(s, num, den, &rep.n_clipped_weights);
  const double denom = weighted_mean(den, im->w, im->total);
  if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) {
    throw PositivityError("estimator: the weighting denominator vanishes");
  }
  rep.beta_hat = weighted_mean(num, im->w, im->total) / denom;
  if (!std::isfinite(rep.beta_hat)) throw PositivityError("estimator: non-finite estimate");
  im->omega_hat[im->total_size() - 1] = rep.beta_hat;
  if (rep.n_clipped_weights == rep.n_complete && rep.n_complete > 0 && !im->trivial) {
    throw PositivityError("estimator: every complete-case weight was clipped");
  }
  return StackedEquations(std::move(im));
}

Eigen::MatrixXd sandwich_variance(const StackedEquations& equations, const Eigen::VectorXd& omega) {
  const Eigen::MatrixXd jac = equations.jacobian(omega);
  const Eigen::MatrixXd v = equations.scores(omega);
  return sandwich_covariance(jac, v, weight_vector(equations.data()));
}

EstimateReport estimate(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config,
                        EstimatorKind kind) {
  StackedEquations eqs = build_stacked_equations(data, functional, config, kind);
  EstimateReport rep = eqs.report();
  if (config.compute_se) {
    const Eigen::MatrixXd cov = sandwich_variance(eqs, eqs.omega_hat());
    const double var = cov(cov.rows() - 1, cov.cols() - 1);
    rep.sandwich_se = var >= 0.0 ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
    if (!(var >= 0.0)) rep.warnings.push_back("sandwich variance is negative");
  }
  return rep;
}

EstimateReport estimate_aipw(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config) {
  return estimate(data, functional, config, EstimatorKind::aipw);
}

EstimateReport estimate_ipw(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config) {
  return estimate(data, functional, config, EstimatorKind::ipw);
}

EstimateReport estimate_complete_case(const Dataset& data, const TargetFunctional& functional) {
  return estimate(data, functional, EstimatorConfig{}, EstimatorKind::complete_case);
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no values");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile: probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_ci(const Dataset& data, const TargetFunctional& functional, const EstimatorConfig& config,
                             int replicates, std::uint64_t seed, double alpha, EstimatorKind kind, int threads) {
  if (replicates < 2) throw std::invalid_argument("bootstrap: need at least 2 replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("bootstrap: alpha must lie in (0, 1)");
  EstimatorConfig cfg = config;
  cfg.compute_se = false;
  const std::size_t n = data.size();
  const auto b = static_cast<std::size_t>(replicates);
  std::vector<double> values(b, std::numeric_limits<double>::quiet_NaN());
  parallel_for(b, threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.index(n);
    try {
      values[t] = build_stacked_equations(data.select(rows), functional, cfg, kind).report().beta_hat;
    } catch (const NumericalError&) {
    } catch (const std::invalid_argument&) {
    }
  });
  BootstrapResult out;
  for (double v : values) {
    if (std::isnan(v)) {
      ++out.n_failed;
    } else {
      out.replicates.push_back(v);
    }
  }
  if (static_cast<double>(out.n_failed) > 0.10 * static_cast<double>(b)) {
    throw ConvergenceError("bootstrap: " + std::to_string(out.n_failed) + " of " + std::to_string(b) +
                           " replicates failed");
  }
  std::vector<double> sorted = out.replicates;
  std::sort(sorted.begin(), sorted.end());
  out.lo = quantile_sorted(sorted, alpha / 2.0);
  out.hi = quantile_sorted(sorted, 1.0 - alpha / 2.0);
  return out;
}

JointTable joint_distribution_binary(const Dataset& data, const EstimatorConfig& config, EstimatorKind kind) {
  const int k = data.k();
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.l(r)) {
      if (!std::isnan(v) && v != 0.0 && v != 1.0) throw std::invalid_argument("joint table: L must be binary");
    }
  }
  EstimatorConfig cfg = config;
  cfg.compute_se = false;
  JointTable table;
  table.k = k;
  const std::size_t cells = std::size_t{1} << k;
  table.raw.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::vector<int> cell(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cell[static_cast<std::size_t>(i)] = static_cast<int>((c >> i) & 1u);
    table.raw[c] = build_stacked_equations(data, TargetFunctional::cell(cell), cfg, kind).report().beta_hat;
  }
  table.normalization = std::accumulate(table.raw.begin(), table.raw.end(), 0.0);
  if (!(std::abs(table.normalization) > 0.0)) throw PositivityError("joint table: cell estimates sum to zero");
  table.probability.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) table.probability[c] = table.raw[c] / table.normalization;
  return table;
}

double cell_odds_ratio(const JointTable& table, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= table.k || j >= table.k) {
    throw std::invalid_argument("cell odds ratio: need two distinct coordinates");
  }
  double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t c = 0; c < table.probability.size(); ++c) {
    m[(c >> i) & 1u][(c >> j) & 1u] += table.probability[c];
  }
  return (m[1][1] * m[0][0]) / (m[1][0] * m[0][1]);
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::aipw:
      return "aipw";
    case EstimatorKind::ipw:
      return "ipw";
    case EstimatorKind::complete_case:
      return "cc";
  }
  return "aipw";
}

EstimatorKind parse_estimator_kind(const std::string& text) {
  if (text == "aipw") return EstimatorKind::aipw;
  if (text == "ipw") return EstimatorKind::ipw;
  if (text == "cc" || text == "complete-case") return EstimatorKind::complete_case;
  throw std::invalid_argument("unknown estimator '" + text + "'");
}

}  // namespace nsc
