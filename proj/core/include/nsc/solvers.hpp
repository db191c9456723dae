#pragma once

#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace nsc {

struct SolverOptions {
  double tol = 1e-8;          // sup-norm of the estimating equation
  int max_iter = 100;
  int max_halvings = 20;
  double rel_step = 1e-5;     // central-difference step: rel_step * (1 + |param|)
  double coef_bound = 50.0;   // logistic separation guard
  double max_step = 1.0;      // Newton steps are scaled to this sup-norm
};

struct FitResult {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double final_residual_norm = std::numeric_limits<double>::infinity();
  /// Sandwich covariance of this block taken on its own.
  Eigen::MatrixXd covariance_contribution;
};

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::MatrixXd numeric_jacobian(const VectorFn& f, const Eigen::VectorXd& at, double rel_step = 1e-5);

/// Damped Newton on f(theta) = 0 with a central-difference Jacobian. Returns
/// converged = false when the iteration budget or step halving is exhausted;
/// throws SingularError on a singular Jacobian.
FitResult solve_newton(const VectorFn& f, Eigen::VectorXd start, const SolverOptions& options = {});

/// Matrix a with design * a centred (when a constant column exists) and of
/// unit weighted variance column by column; constant columns are left alone.
Eigen::MatrixXd standardizing_map(const Eigen::MatrixXd& design, const Eigen::VectorXd& w);

/// Weighted logistic regression by Newton-Raphson (IRLS) on mean score.
/// Throws SeparationError when the response is constant or a coefficient
/// exceeds options.coef_bound in absolute value on the standardized design.
FitResult fit_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const SolverOptions& options = {});

/// Weighted least squares, one column of coefficients per response column.
/// Throws SingularError on a rank-deficient weighted design.
Eigen::MatrixXd weighted_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& y,
                                       const Eigen::VectorXd& w);

/// A^{-1} B A^{-T} / n with B the weighted mean outer product of the rows of
/// `scores` and n the total weight.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& scores,
                                    const Eigen::VectorXd& w);

double expit(double v);
double sup_norm(const Eigen::VectorXd& v);

}  // namespace nsc
