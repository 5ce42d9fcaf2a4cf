#include "lrsdl/prox.hpp"

#include "lrsdl/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <memory>
#include <random>

namespace lrsdl {

Matrix soft_threshold(const Matrix& W, double tau) {
  return W.unaryExpr([tau](double w) {
    const double mag = std::max(std::abs(w) - tau, 0.0);
    return w < 0.0 ? -mag : mag;
  });
}

namespace {

double l1(const Matrix& W) { return W.size() == 0 ? 0.0 : W.cwiseAbs().sum(); }

}  // namespace

FistaResult fista(const SmoothObjective& obj, double lambda, const Matrix& W0, int max_iter,
                  double tol) {
  if (!(obj.lipschitz > 0.0)) throw ParameterError("fista: Lipschitz constant must be > 0");
  if (lambda < 0.0) throw ParameterError("fista: lambda must be >= 0");

  const double step = 1.0 / obj.lipschitz;
  const bool monotone = static_cast<bool>(obj.value);

  FistaResult res;
  Matrix x = W0;
  Matrix y = W0;
  double t = 1.0;
  double fx = 0.0;
  if (monotone) {
    fx = obj.value(x) + lambda * l1(x);
    res.objective_trace.push_back(fx);
  }

  for (int k = 1; k <= max_iter; ++k) {
    const Matrix g = obj.grad(y);
    if (g.rows() != y.rows() || g.cols() != y.cols()) {
      detail::throw_dimension("fista gradient", y.rows(), y.cols(), g.rows(), g.cols());
    }
    if (!all_finite(g)) {
      throw NumericalError("fista: non-finite gradient at iteration " + std::to_string(k));
    }
    Matrix z = soft_threshold(y - step * g, lambda * step);
    const double rel = (z - x).norm() / std::max(1.0, x.norm());
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    if (monotone) {
      // Keep the better of the prox point and the previous iterate; the
      // extrapolation still moves towards z.
      const double fz = obj.value(z) + lambda * l1(z);
      if (!std::isfinite(fz)) {
        throw NumericalError("fista: non-finite objective at iteration " + std::to_string(k));
      }
      Matrix x_next = fz <= fx ? z : x;
      if (fz <= fx) fx = fz;
      y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x);
      x = std::move(x_next);
      res.objective_trace.push_back(fx);
    } else {
      y = z + ((t - 1.0) / t_next) * (z - x);
      x = std::move(z);
    }
    t = t_next;
    res.iterations = k;
    if (rel < tol) {
      res.converged = true;
      break;
    }
  }
  res.W = std::move(x);
  return res;
}

FistaResult fista(const QuadraticObjective& obj, double lambda, const Matrix& W0, int max_iter,
                  double tol) {
  if (!(obj.lipschitz > 0.0)) throw ParameterError("fista: Lipschitz constant must be > 0");
  if (lambda < 0.0) throw ParameterError("fista: lambda must be >= 0");
  if (obj.linear.rows() != W0.rows() || obj.linear.cols() != W0.cols()) {
    detail::throw_dimension("fista linear term", W0.rows(), W0.cols(), obj.linear.rows(),
                            obj.linear.cols());
  }

  const double step = 1.0 / obj.lipschitz;
  const Matrix& B = obj.linear;
  auto value = [&](const Matrix& W, const Matrix& HW) {
    return 0.5 * W.cwiseProduct(HW).sum() - W.cwiseProduct(B).sum() + obj.constant +
           lambda * l1(W);
  };
  auto apply = [&](const Matrix& W, int k) {
    Matrix HW = obj.hessian(W);
    if (HW.rows() != W.rows() || HW.cols() != W.cols()) {
      detail::throw_dimension("fista hessian", W.rows(), W.cols(), HW.rows(), HW.cols());
    }
    if (!all_finite(HW)) {
      throw NumericalError("fista: non-finite gradient at iteration " + std::to_string(k));
    }
    return HW;
  };

  FistaResult res;
  Matrix x = W0;
  Matrix Hx = apply(x, 0);
  Matrix y = x;
  Matrix Hy = Hx;
  double fx = value(x, Hx);
  res.objective_trace.push_back(fx);
  double t = 1.0;

  for (int k = 1; k <= max_iter; ++k) {
    Matrix z = soft_threshold(y - step * (Hy - B), lambda * step);
    Matrix Hz = apply(z, k);
    const double fz = value(z, Hz);
    if (!std::isfinite(fz)) {
      throw NumericalError("fista: non-finite objective at iteration " + std::to_string(k));
    }
    const double rel = (z - x).norm() / std::max(1.0, x.norm());
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double a = t / t_next;
    const double b = (t - 1.0) / t_next;

    const bool take = fz <= fx;
    const bool restart = (y - z).cwiseProduct(z - x).sum() > 0.0;
    Matrix x_next = take ? z : x;
    Matrix Hx_next = take ? Hz : Hx;
    if (take) fx = fz;
    if (restart) {
      y = x_next;
      Hy = Hx_next;
      t = 1.0;
    } else {
      y = x_next + a * (z - x_next) + b * (x_next - x);
      Hy = Hx_next + a * (Hz - Hx_next) + b * (Hx_next - Hx);
      t = t_next;
    }
    x = std::move(x_next);
    Hx = std::move(Hx_next);
    res.objective_trace.push_back(fx);
    res.iterations = k;
    if (rel < tol) {
      res.converged = true;
      break;
    }
  }
  res.W = std::move(x);
  return res;
}

Matrix svt(const Matrix& M, double tau) {
  if (M.size() == 0) return M;
  if (!all_finite(M)) throw NumericalError("svt: non-finite input");
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("svt: SVD failed");
  const Vector s = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

AdmmResult admm_nuclear(const Matrix& V, const Matrix& X, double eta, double rho, int iters,
                        const Matrix& Z0) {
  const Index d = V.rows();
  const Index k = X.rows();
  if (V.cols() != X.cols()) detail::throw_dimension("admm_nuclear X", k, V.cols(), k, X.cols());
  if (eta < 0.0) throw ParameterError("admm_nuclear: eta must be >= 0");
  if (rho < 0.0) throw ParameterError("admm_nuclear: rho must be >= 0");
  if (iters < 1) throw ParameterError("admm_nuclear: iters must be >= 1");

  AdmmResult res;
  if (k == 0) {
    res.Z = Matrix::Zero(d, 0);
    return res;
  }

  const Matrix gram = 2.0 * X * X.transpose() + rho * Matrix::Identity(k, k);
  const Matrix cross = 2.0 * V * X.transpose();

  // Right-division by the symmetric gram: D0 = rhs * gram^{-1} = (gram^{-1} rhs^T)^T.
  std::function<Matrix(const Matrix&)> right_solve;
  if (rho > 0.0) {
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(gram);
    if (llt->info() != Eigen::Success) throw NumericalError("admm_nuclear: factorization failed");
    right_solve = [llt](const Matrix& rhs) -> Matrix { return llt->solve(rhs.transpose()).transpose(); };
  } else {
    auto lu = std::make_shared<Eigen::FullPivLU<Matrix>>(gram);
    if (!lu->isInvertible()) {
      throw ParameterError("admm_nuclear: singular system (rho = 0 and X rank deficient)");
    }
    right_solve = [lu](const Matrix& rhs) -> Matrix { return lu->solve(rhs.transpose()).transpose(); };
  }

  Matrix Z = Z0.size() == 0 ? Matrix::Zero(d, k) : Z0;
  if (Z.rows() != d || Z.cols() != k) detail::throw_dimension("admm_nuclear Z0", d, k, Z.rows(), Z.cols());
  Matrix U = Matrix::Zero(d, k);
  const double tau = rho > 0.0 ? eta / rho : 0.0;
  res.primal_residuals.reserve(iters);
  for (int it = 0; it < iters; ++it) {
    const Matrix D0 = right_solve(cross + rho * (Z - U));
    Z = (tau > 0.0) ? svt(D0 + U, tau) : Matrix(D0 + U);
    U += D0 - Z;
    if (!all_finite(Z) || !all_finite(U)) {
      throw NumericalError("admm_nuclear: non-finite iterate at sweep " + std::to_string(it + 1));
    }
    res.primal_residuals.push_back((D0 - Z).norm());
  }
  res.Z = std::move(Z);
  return res;
}

double power_iteration_lipschitz(const std::function<Matrix(const Matrix&)>& apply, Index rows,
                                 Index cols, int iters, std::uint64_t seed) {
  constexpr double kFloor = 1e-12;
  constexpr double kSafety = 1.01;
  if (rows * cols == 0) return kFloor;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) x(i, j) = normal(rng);
  }
  x /= x.norm();
  double estimate = 0.0;
  for (int it = 0; it < std::max(iters, 1); ++it) {
    Matrix y = apply(x);
    const double n = y.norm();
    if (!std::isfinite(n)) throw NumericalError("power iteration: non-finite operator output");
    if (n <= 0.0) return kFloor;
    estimate = n;
    x = y / n;
  }
  return std::max(kSafety * estimate, kFloor);
}

double power_iteration_lipschitz(const Matrix& gram, int iters, std::uint64_t seed) {
  return power_iteration_lipschitz([&gram](const Matrix& v) -> Matrix { return gram * v; },
                                   gram.rows(), 1, iters, seed);
}

}  // namespace lrsdl
