#include "nsc/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nsc/errors.hpp"

namespace nsc {

namespace {

Eigen::VectorXd weighted_mean_rows(const Eigen::MatrixXd& scores, const Eigen::VectorXd& w, double total) {
  return scores.transpose() * w / total;
}

std::vector<Eigen::Index> rows_where(const Eigen::VectorXd& indicator) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < indicator.size(); ++r) {
    if (indicator[r] != 0.0) rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = m.row(rows[a]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) out[static_cast<Eigen::Index>(a)] = v[rows[a]];
  return out;
}

void require_converged(const FitResult& fit, const std::string& what) {
  if (!fit.converged) {
    throw ConvergenceError(what + ": no convergence (residual " + std::to_string(fit.final_residual_norm) + ")");
  }
}

}  // namespace

Eigen::MatrixXd design_matrix(const BasisSpec& basis, const Dataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto q = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, q);
  const std::uint32_t needs = basis.l_support();
  std::vector<double> buf(basis.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    if (needs & ~data.pattern(row).index()) continue;
    basis.evaluate(data.l(row), data.x(row), buf);
    for (Eigen::Index c = 0; c < q; ++c) out(r, c) = buf[static_cast<std::size_t>(c)];
  }
  return out;
}

Eigen::MatrixXd design_matrix_at(const BasisSpec& basis, const Dataset& data, std::span<const double> l) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto q = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd out(n, q);
  std::vector<double> buf(basis.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    basis.evaluate(l, data.x(static_cast<std::size_t>(r)), buf);
    for (Eigen::Index c = 0; c < q; ++c) out(r, c) = buf[static_cast<std::size_t>(c)];
  }
  return out;
}

Eigen::VectorXd weight_vector(const Dataset& data) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(data.size()));
  for (std::size_t r = 0; r < data.size(); ++r) w[static_cast<Eigen::Index>(r)] = data.weight(r);
  return w;
}

Eigen::VectorXd pattern_indicator(const Dataset& data, const Pattern& pattern) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t r = 0; r < data.size(); ++r) v[static_cast<Eigen::Index>(r)] = data.pattern(r) == pattern ? 1.0 : 0.0;
  return v;
}

Eigen::VectorXd observed_indicator(const Dataset& data, int i) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t r = 0; r < data.size(); ++r) v[static_cast<Eigen::Index>(r)] = data.pattern(r).observed(i) ? 1.0 : 0.0;
  return v;
}

Eigen::VectorXd others_observed(const Dataset& data, int i) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& pat = data.pattern(r);
    v[static_cast<Eigen::Index>(r)] = (pat.missing_mask() & ~(1u << i)) == 0 ? 1.0 : 0.0;
  }
  return v;
}

ThetaDesign make_theta_design(const Dataset& data, const ThetaBases& bases) {
  if (data.k() != 3) throw std::invalid_argument("interaction equations need K = 3");
  ThetaDesign design;
  design.complete = pattern_indicator(data, Pattern::complete(3));
  for (int j = 0; j < 3; ++j) {
    if (bases.pair[j].l_support() & ~(1u << j)) {
      throw std::invalid_argument("interaction basis " + std::to_string(j + 1) + " may read L" +
                                  std::to_string(j + 1) + " only");
    }
    design.in_pattern[j] = pattern_indicator(data, Pattern(1u << j, 3));
    design.basis[j] = design_matrix(bases.pair[j], data);
  }
  if (bases.triple.l_support() != 0) throw std::invalid_argument("three-way interaction basis must not read L");
  design.in_pattern[3] = pattern_indicator(data, Pattern(0u, 3));
  design.basis[3] = design_matrix(bases.triple, data);
  for (int j = 0; j < 4; ++j) {
    if (!bases.g) {
      design.g[j] = design.basis[j];
      continue;
    }
    const BasisSpec& g = (*bases.g)[j];
    const std::uint32_t allowed = j < 3 ? (1u << j) : 0u;
    if (g.l_support() & ~allowed) throw std::invalid_argument("instrument reads coordinates its pattern hides");
    if (g.size() != static_cast<std::size_t>(design.basis[j].cols())) {
      throw std::invalid_argument("instrument and interaction basis must have the same size");
    }
    design.g[j] = design_matrix(g, data);
  }
  return design;
}

ThetaTerms theta_terms(const ThetaBases& bases, const Eigen::VectorXd& coef) {
  if (static_cast<std::size_t>(coef.size()) != bases.size()) throw std::invalid_argument("theta: coefficient length mismatch");
  ThetaTerms terms;
  Eigen::Index at = 0;
  for (int j = 0; j < 3; ++j) {
    const auto q = static_cast<Eigen::Index>(bases.pair[j].size());
    terms.pair[j] = LinearPredictor(bases.pair[j], coef.segment(at, q));
    at += q;
  }
  terms.triple = LinearPredictor(bases.triple, coef.segment(at, static_cast<Eigen::Index>(bases.triple.size())));
  return terms;
}

namespace ee {

Eigen::MatrixXd univariate_selection(const Eigen::VectorXd& eligible, const Eigen::VectorXd& r_i,
                                     const Eigen::MatrixXd& d, const Eigen::MatrixXd& h,
                                     const Eigen::VectorXd& psi) {
  const Eigen::Index n = eligible.size();
  const Eigen::Index qd = d.cols();
  const Eigen::Index qh = h.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, qd + qh);
  const Eigen::VectorXd psi_lx = psi.head(qd);
  const Eigen::VectorXd psi_x = psi.tail(qh);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (eligible[r] == 0.0) continue;
    const double eta = h.row(r).dot(psi_x) - d.row(r).dot(psi_lx);
    const double resid = r_i[r] - expit(eta);
    out.row(r).head(qd) = -resid * d.row(r);
    out.row(r).tail(qh) = resid * h.row(r);
  }
  return out;
}

Eigen::MatrixXd feature_means(const Eigen::VectorXd& complete, const Eigen::MatrixXd& d, const Eigen::MatrixXd& hm,
                              const Eigen::MatrixXd& m) {
  const Eigen::Index n = complete.size();
  const Eigen::Index qx = hm.cols();
  const Eigen::Index qd = d.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, qx * qd);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (complete[r] == 0.0) continue;
    const Eigen::RowVectorXd resid = d.row(r) - hm.row(r) * m;
    for (Eigen::Index c = 0; c < qd; ++c) out.row(r).segment(c * qx, qx) = resid[c] * hm.row(r);
  }
  return out;
}

Eigen::MatrixXd odds_ratio_dr(const Eigen::VectorXd& eligible, const Eigen::VectorXd& r_i, const Eigen::MatrixXd& d,
                              const Eigen::MatrixXd& h, const Eigen::VectorXd& psi_x, const Eigen::MatrixXd& hm,
                              const Eigen::MatrixXd& m, const Eigen::VectorXd& psi_lx) {
  const Eigen::Index n = eligible.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, d.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    if (eligible[r] == 0.0) continue;
    const double resid = r_i[r] - expit(h.row(r).dot(psi_x));
    const double tilt = r_i[r] != 0.0 ? 1.0 : std::exp(-d.row(r).dot(psi_lx));
    out.row(r) = (resid * tilt) * (d.row(r) - hm.row(r) * m);
  }
  return out;
}

Eigen::MatrixXd theta_ipw(const ThetaDesign& design, const Eigen::MatrixXd& main, const Eigen::VectorXd& theta) {
  const Eigen::Index n = design.complete.size();
  std::array<Eigen::Index, 4> size{};
  std::array<Eigen::Index, 4> offset{};
  Eigen::Index total = 0;
  for (int j = 0; j < 4; ++j) {
    size[j] = design.basis[j].cols();
    offset[j] = total;
    total += size[j];
  }
  if (theta.size() != total) throw std::invalid_argument("theta: coefficient length mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, total);
  for (Eigen::Index r = 0; r < n; ++r) {
    const bool complete = design.complete[r] != 0.0;
    double lambda[4] = {0.0, 0.0, 0.0, 0.0};
    if (complete) {
      const double a_sum = main(r, 0) + main(r, 1) + main(r, 2);
      double t[4];
      for (int j = 0; j < 4; ++j) t[j] = design.basis[j].row(r).dot(theta.segment(offset[j], size[j]));
      for (int j = 0; j < 3; ++j) lambda[j] = a_sum - main(r, j) + t[j];
      lambda[3] = a_sum + t[0] + t[1] + t[2] + t[3];
    }
    for (int j = 0; j < 4; ++j) {
      const double v = (complete ? std::exp(lambda[j]) : 0.0) - design.in_pattern[j][r];
      if (v != 0.0) out.row(r).segment(offset[j], size[j]) = v * design.g[j].row(r);
    }
  }
  return out;
}

Eigen::MatrixXd pattern_mixture(const Eigen::VectorXd& complete, const Eigen::VectorXd& odds_ratio,
                                const Eigen::MatrixXd& z, const Eigen::VectorXd& b, const Eigen::VectorXd& mu) {
  const Eigen::Index n = complete.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, z.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    if (complete[r] == 0.0) continue;
    out.row(r) = (odds_ratio[r] * (b[r] - z.row(r).dot(mu))) * z.row(r);
  }
  return out;
}

}  // namespace ee

FitResult fit_univariate_selection(const Dataset& data, int i, const BasisSpec& delta_basis,
                                   const BasisSpec& baseline_basis, const SolverOptions& options) {
  if (i < 0 || i >= data.k()) throw std::invalid_argument("univariate selection: variable index out of range");
  if ((delta_basis.l_support() >> i) & 1u) throw std::invalid_argument("univariate selection: delta_h reads L_i");
  if (baseline_basis.l_support() != 0) throw std::invalid_argument("univariate selection: baseline reads L");
  const Eigen::VectorXd eligible = others_observed(data, i);
  const auto rows = rows_where(eligible);
  const Eigen::VectorXd w = weight_vector(data);
  double mass = 0.0;
  for (auto r : rows) mass += w[r];
  if (!(mass > 0.0)) throw SupportError("univariate selection: no records with the other variables observed");

  const Eigen::MatrixXd d = design_matrix(delta_basis, data);
  const Eigen::MatrixXd h = design_matrix(baseline_basis, data);
  Eigen::MatrixXd z(d.rows(), d.cols() + h.cols());
  z << -d, h;
  const Eigen::VectorXd y = observed_indicator(data, i);
  FitResult fit = fit_logistic(take_rows(z, rows), take_rows(y, rows), take_rows(w, rows), options);
  require_converged(fit, "univariate selection for L" + std::to_string(i + 1));
  return fit;
}

FitResult fit_feature_means(const Dataset& data, const BasisSpec& features, const BasisSpec& x_basis) {
  if (x_basis.l_support() != 0) throw std::invalid_argument("feature means: covariate basis reads L");
  const Eigen::VectorXd complete = pattern_indicator(data, Pattern::complete(data.k()));
  const auto rows = rows_where(complete);
  if (rows.empty()) throw SupportError("feature means: no complete cases");
  const Eigen::VectorXd w = weight_vector(data);
  const Eigen::MatrixXd d = design_matrix(features, data);
  const Eigen::MatrixXd hm = design_matrix(x_basis, data);
  const Eigen::MatrixXd m = weighted_least_squares(take_rows(hm, rows), take_rows(d, rows), take_rows(w, rows));

  FitResult fit;
  fit.coefficients = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  fit.converged = true;
  const Eigen::MatrixXd scores = ee::feature_means(complete, d, hm, m);
  fit.final_residual_norm = sup_norm(weighted_mean_rows(scores, w, w.sum()));
  const Eigen::Index qx = hm.cols();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m.size(), m.size());
  const Eigen::MatrixXd gram = -(take_rows(hm, rows).transpose() * take_rows(w, rows).asDiagonal() * take_rows(hm, rows)) / w.sum();
  for (Eigen::Index c = 0; c < d.cols(); ++c) jac.block(c * qx, c * qx, qx, qx) = gram;
  fit.covariance_contribution = sandwich_covariance(jac, scores, w);
  return fit;
}

FitResult fit_or_doubly_robust(const Dataset& data, int i, const BasisSpec& delta_basis,
                               const LinearPredictor& baseline, const FeatureMeanModel& means,
                               const SolverOptions& options, Eigen::VectorXd start) {
  if (i < 0 || i >= data.k()) throw std::invalid_argument("odds ratio: variable index out of range");
  if ((delta_basis.l_support() >> i) & 1u) throw std::invalid_argument("odds ratio: delta_h reads L_i");
  const SupportTable support = pattern_support(data);
  if (!support.leave_one_out_ok[i]) {
    throw SupportError("odds ratio for L" + std::to_string(i + 1) + ": no leave-one-out support");
  }
  if (static_cast<std::size_t>(means.coef.cols()) != delta_basis.size() ||
      static_cast<std::size_t>(means.coef.rows()) != means.x_basis.size()) {
    throw std::invalid_argument("odds ratio: feature-mean model does not match the basis");
  }
  const Eigen::VectorXd eligible = others_observed(data, i);
  const Eigen::VectorXd r_i = observed_indicator(data, i);
  const Eigen::VectorXd w = weight_vector(data);
  const double total = w.sum();
  const Eigen::MatrixXd d = design_matrix(delta_basis, data);
  const Eigen::MatrixXd h = design_matrix(baseline.basis, data);
  const Eigen::MatrixXd hm = design_matrix(means.x_basis, data);

  // The tilt exp(-d psi) shrinks the whole equation as psi grows, which lets an
  // absolute tolerance accept far-off points. Solving exp(dbar psi) times the
  // equation keeps the roots and removes that drift; dbar is the mean of d over
  // leave-one-out records.
  const Eigen::VectorXd loo = eligible.cwiseProduct(Eigen::VectorXd::Ones(r_i.size()) - r_i).cwiseProduct(w);
  const Eigen::VectorXd dbar = loo.sum() > 0.0 ? Eigen::VectorXd(d.transpose() * loo / loo.sum())
                                               : Eigen::VectorXd::Zero(d.cols());
  auto f = [&](const Eigen::VectorXd& psi) {
    const double scale = std::exp(std::clamp(dbar.dot(psi), -700.0, 700.0));
    return Eigen::VectorXd(
        scale * weighted_mean_rows(ee::odds_ratio_dr(eligible, r_i, d, h, baseline.coef, hm, means.coef, psi), w, total));
  };
  auto f_raw = [&](const Eigen::VectorXd& psi) {
    return weighted_mean_rows(ee::odds_ratio_dr(eligible, r_i, d, h, baseline.coef, hm, means.coef, psi), w, total);
  };
  if (start.size() == 0) start = Eigen::VectorXd::Zero(d.cols());
  FitResult fit = solve_newton(f, std::move(start), options);
  require_converged(fit, "odds ratio for L" + std::to_string(i + 1));
  const Eigen::MatrixXd jac = numeric_jacobian(f_raw, fit.coefficients, options.rel_step);
  fit.covariance_contribution = sandwich_covariance(
      jac, ee::odds_ratio_dr(eligible, r_i, d, h, baseline.coef, hm, means.coef, fit.coefficients), w);
  return fit;
}

FitResult fit_theta_ipw(const Dataset& data, const SelectionModel& model, const ThetaBases& bases,
                        const SolverOptions& options) {
  if (data.k() != 3 || model.k() != 3) throw std::invalid_argument("interaction equations need K = 3");
  const SupportTable support = pattern_support(data);
  for (std::uint32_t idx : {7u, 1u, 2u, 4u, 0u}) {
    if (!support.supported(Pattern(idx, 3))) {
      throw SupportError("interaction equations: pattern " + Pattern(idx, 3).to_string() + " has no records");
    }
  }
  const ThetaDesign design = make_theta_design(data, bases);
  const Eigen::VectorXd w = weight_vector(data);
  const double total = w.sum();
  Eigen::MatrixXd main = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), 3);
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (!data.pattern(r).is_complete()) continue;
    for (int j = 0; j < 3; ++j) main(static_cast<Eigen::Index>(r), j) = model.main_effect(j, data.l(r), data.x(r));
  }
  auto f = [&](const Eigen::VectorXd& theta) {
    return weighted_mean_rows(ee::theta_ipw(design, main, theta), w, total);
  };
  // Newton runs on standardized basis columns (complete records), which keeps
  // the step cap meaningful when covariates are badly scaled.
  const Eigen::Index q = static_cast<Eigen::Index>(bases.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
  const Eigen::VectorXd wc = w.cwiseProduct(design.complete);
  for (Eigen::Index j = 0, offset = 0; j < 4; ++j) {
    const Eigen::Index size = design.basis[j].cols();
    a.block(offset, offset, size, size) = standardizing_map(design.basis[j], wc);
    offset += size;
  }
  auto f_scaled = [&](const Eigen::VectorXd& t) { return f(Eigen::VectorXd(a * t)); };
  FitResult fit = solve_newton(f_scaled, Eigen::VectorXd::Zero(q), options);
  fit.coefficients = a * fit.coefficients;
  require_converged(fit, "interaction equations");
  fit.covariance_contribution =
      sandwich_covariance(numeric_jacobian(f, fit.coefficients, options.rel_step),
                          ee::theta_ipw(design, main, fit.coefficients), w);
  return fit;
}

double MixtureComponent::predict(std::span<const double> l, std::span<const double> x) const {
  if (mode == MixtureMode::ratio) return basis.dot(l, x, coef) / basis.dot(l, x, denominator_coef);
  return basis.dot(l, x, coef);
}

void PatternMixtureModel::set(MixtureComponent component) {
  for (auto& c : components_) {
    if (c.pattern == component.pattern) {
      c = std::move(component);
      return;
    }
  }
  components_.push_back(std::move(component));
}

const MixtureComponent* PatternMixtureModel::find(const Pattern& r) const {
  for (const auto& c : components_) {
    if (c.pattern == r) return &c;
  }
  return nullptr;
}

double PatternMixtureModel::predict(const Pattern& r, std::span<const double> l, std::span<const double> x) const {
  const auto* c = find(r);
  if (c == nullptr) throw std::invalid_argument("pattern mixture: no component for pattern " + r.to_string());
  return c->predict(l, x);
}

MixtureComponent fit_pattern_mixture(const Dataset& data, const Pattern& r, const SelectionModel& model,
                                     const TargetFunctional& b, const BasisSpec& basis, MixtureMode mode) {
  if (r.k() != data.k() || model.k() != data.k()) throw std::invalid_argument("pattern mixture: dimension mismatch");
  if (r.is_complete()) throw std::invalid_argument("pattern mixture: pattern must have a missing coordinate");
  if (basis.l_support() & ~r.index()) {
    throw std::invalid_argument("pattern mixture: basis reads coordinates pattern " + r.to_string() + " hides");
  }
  std::vector<Eigen::Index> rows;
  for (std::size_t row = 0; row < data.size(); ++row) {
    if (data.pattern(row).is_complete() && data.weight(row) > 0.0) rows.push_back(static_cast<Eigen::Index>(row));
  }
  if (rows.empty()) throw SupportError("pattern mixture: no complete cases");
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd z(m, static_cast<Eigen::Index>(basis.size()));
  Eigen::VectorXd y(m);
  Eigen::VectorXd odds(m);
  Eigen::VectorXd w(m);
  std::vector<double> buf(basis.size());
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto row = static_cast<std::size_t>(rows[static_cast<std::size_t>(a)]);
    basis.evaluate(data.l(row), data.x(row), buf);
    for (Eigen::Index c = 0; c < z.cols(); ++c) z(a, c) = buf[static_cast<std::size_t>(c)];
    y[a] = b(data.l(row));
    odds[a] = std::exp(model.log_odds_ratio(r, data.l(row), data.x(row)));
    w[a] = data.weight(row);
  }
  MixtureComponent comp;
  comp.pattern = r;
  comp.basis = basis;
  comp.mode = mode;
  if (mode == MixtureMode::weighted_regression) {
    comp.coef = weighted_least_squares(z, y, w.cwiseProduct(odds)).col(0);
  } else {
    Eigen::MatrixXd targets(m, 2);
    targets.col(0) = odds.cwiseProduct(y);
    targets.col(1) = odds;
    const Eigen::MatrixXd coef = weighted_least_squares(z, targets, w);
    comp.coef = coef.col(0);
    comp.denominator_coef = coef.col(1);
  }
  return comp;
}

}  // namespace nsc
