#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <functional>
#include <optional>
#include <vector>

namespace esrlab::detail {

using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
};

struct ResidualFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  ResidualFn fn;
  int n_inputs = 0;
  int n_values = 0;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    fn(x, r);
    return 0;
  }
};

/// MINPACK Levenberg-Marquardt with a central-difference Jacobian.
inline LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0, int n_values,
                                              int max_evaluations = 2000) {
  ResidualFunctor base{fn, static_cast<int>(x0.size()), n_values};
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(base);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
  lm.parameters.maxfev = max_evaluations;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.minimize(x0);

  LeastSquaresResult out;
  out.x = x0;
  out.residuals.resize(n_values);
  fn(out.x, out.residuals);
  out.cost = out.residuals.squaredNorm();
  out.iterations = static_cast<int>(lm.iter);
  return out;
}

/// s^2 (J^T J)^-1 with s^2 = cost / (m - n) and J by central differences with
/// steps `h`; nullopt when J^T J is numerically singular.
inline std::optional<Eigen::MatrixXd> covariance(const ResidualFn& fn, const Eigen::VectorXd& x, int n_values,
                                                 const Eigen::VectorXd& h, double cost) {
  const Eigen::Index n = x.size();
  if (n_values <= n) return std::nullopt;
  Eigen::MatrixXd jac(n_values, n);
  Eigen::VectorXd up(n_values), down(n_values);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd xu = x, xd = x;
    xu[j] += h[j];
    xd[j] -= h[j];
    fn(xu, up);
    fn(xd, down);
    jac.col(j) = (up - down) / (2.0 * h[j]);
  }
  if (!jac.allFinite()) return std::nullopt;
  const Eigen::MatrixXd info = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) return std::nullopt;
  const double s2 = cost / static_cast<double>(n_values - n);
  return Eigen::MatrixXd(s2 * es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose());
}

}  // namespace esrlab::detail
