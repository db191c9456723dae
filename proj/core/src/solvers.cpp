#include "nsc/solvers.hpp"

#include <cmath>

#include "nsc/errors.hpp"

namespace nsc {

double expit(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::MatrixXd numeric_jacobian(const VectorFn& f, const Eigen::VectorXd& at, double rel_step) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd probe = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = rel_step * (1.0 + std::abs(at[j]));
    probe[j] = at[j] + h;
    const Eigen::VectorXd up = f(probe);
    probe[j] = at[j] - h;
    const Eigen::VectorXd down = f(probe);
    probe[j] = at[j];
    if (j == 0) jac.resize(up.size(), at.size());
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

FitResult solve_newton(const VectorFn& f, Eigen::VectorXd start, const SolverOptions& options) {
  FitResult result;
  Eigen::VectorXd theta = std::move(start);
  Eigen::VectorXd value = f(theta);
  double norm = sup_norm(value);
  // Halving uses the Euclidean norm; the sup-norm is flat along many directions.
  double merit = value.squaredNorm();
  int iter = 0;
  while (norm > options.tol && iter < options.max_iter) {
    ++iter;
    const Eigen::MatrixXd jac = numeric_jacobian(f, theta, options.rel_step);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible() || !std::isfinite(jac.sum())) {
      throw SingularError("newton: singular Jacobian");
    }
    Eigen::VectorXd step = lu.solve(-value);
    const double len = sup_norm(step);
    if (len > options.max_step) step *= options.max_step / len;
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      Eigen::VectorXd candidate = theta + t * step;
      Eigen::VectorXd cand_value = f(candidate);
      const double cand_merit = cand_value.squaredNorm();
      if (std::isfinite(cand_merit) && cand_merit < merit) {
        theta = std::move(candidate);
        value = std::move(cand_value);
        merit = cand_merit;
        norm = sup_norm(value);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  result.coefficients = std::move(theta);
  result.iterations = iter;
  result.final_residual_norm = norm;
  result.converged = norm <= options.tol;
  return result;
}

namespace {

FitResult fit_logistic_scaled(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                              const SolverOptions& options) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  const double total = w.sum();
  if (n == 0 || !(total > 0.0)) throw SupportError("logistic: no records with positive weight");
  const double mean_y = w.dot(y) / total;
  if (mean_y <= 0.0 || mean_y >= 1.0) {
    throw SeparationError("logistic: response is constant among eligible records");
  }

  FitResult result;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd prob(n);
  Eigen::VectorXd score(q);
  Eigen::MatrixXd info(q, q);
  auto evaluate = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = design * b;
    for (Eigen::Index r = 0; r < n; ++r) prob[r] = expit(eta[r]);
    score = design.transpose() * (w.cwiseProduct(y - prob)) / total;
    const Eigen::VectorXd v = w.cwiseProduct(prob.cwiseProduct((1.0 - prob.array()).matrix()));
    info = design.transpose() * v.asDiagonal() * design / total;
  };
  evaluate(beta);
  double norm = sup_norm(score);
  int iter = 0;
  while (norm > options.tol && iter < options.max_iter) {
    ++iter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
      throw SingularError("logistic: singular information matrix");
    }
    const Eigen::VectorXd step = ldlt.solve(score);
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd candidate = beta + t * step;
      evaluate(candidate);
      const double cand = sup_norm(score);
      if (std::isfinite(cand) && cand < norm) {
        beta = candidate;
        norm = cand;
        improved = true;
        break;
      }
    }
    if (!improved) {
      evaluate(beta);
      break;
    }
    if (beta.cwiseAbs().maxCoeff() > options.coef_bound) {
      throw SeparationError("logistic: coefficient exceeds separation bound");
    }
  }
  result.coefficients = beta;
  result.iterations = iter;
  result.final_residual_norm = norm;
  result.converged = norm <= options.tol;
  if (!result.converged) return result;

  Eigen::MatrixXd scores(n, q);
  for (Eigen::Index r = 0; r < n; ++r) scores.row(r) = design.row(r) * (y[r] - prob[r]);
  result.covariance_contribution = sandwich_covariance(-info, scores, w);
  return result;
}

}  // namespace

Eigen::MatrixXd standardizing_map(const Eigen::MatrixXd& design, const Eigen::VectorXd& w) {
  const Eigen::Index q = design.cols();
  const double total = w.sum();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q, q);
  if (!(total > 0.0)) return a;
  Eigen::Index constant = -1;
  Eigen::VectorXd mean(q), sd(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    mean[j] = w.dot(design.col(j)) / total;
    sd[j] = std::sqrt(w.dot((design.col(j).array() - mean[j]).square().matrix()) / total);
    if (sd[j] <= 1e-12 * (1.0 + std::abs(mean[j]))) {
      sd[j] = 0.0;
      if (constant < 0 && mean[j] != 0.0) constant = j;
    }
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    if (sd[j] == 0.0) continue;
    a(j, j) = 1.0 / sd[j];
    if (constant >= 0) a(constant, j) = -mean[j] / (sd[j] * mean[constant]);
  }
  return a;
}

FitResult fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const SolverOptions& options) {
  // Fit on centred, unit-variance columns so the separation bound reads on the
  // logit scale, then map back.
  const Eigen::MatrixXd a = standardizing_map(design, w);
  FitResult fit = fit_logistic_scaled(design * a, y, w, options);
  fit.coefficients = a * fit.coefficients;
  if (fit.covariance_contribution.size() > 0) {
    fit.covariance_contribution = a * fit.covariance_contribution * a.transpose();
  }
  return fit;
}

Eigen::MatrixXd weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& y,
                                       const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * design;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) throw SingularError("weighted least squares: rank-deficient design");
  return qr.solve(sw.asDiagonal() * y);
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& scores,
                                    const Eigen::VectorXd& w) {
  const double total = w.sum();
  const Eigen::MatrixXd meat = scores.transpose() * w.asDiagonal() * scores / total;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian);
  if (!lu.isInvertible()) throw SingularError("sandwich: singular Jacobian");
  const Eigen::MatrixXd inv = lu.inverse();
  return inv * meat * inv.transpose() / total;
}

}  // namespace nsc
