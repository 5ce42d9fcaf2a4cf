#pragma once

#include "lrsdl/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace lrsdl {

/// Smooth part g of a composite objective g(W) + lambda * |W|_1.
struct SmoothObjective {
  std::function<Matrix(const Matrix&)> grad;
  /// Upper bound on the Lipschitz constant of grad.
  double lipschitz = 1.0;
  /// Optional. When present fista runs its monotone variant and records
  /// the composite objective of every accepted iterate.
  std::function<double(const Matrix&)> value;
};

/// sign(w) * max(|w| - tau, 0), elementwise.
Matrix soft_threshold(const Matrix& W, double tau);

struct FistaResult {
  Matrix W;
  int iterations = 0;
  bool converged = false;
  /// Composite objective at W0 followed by one entry per iteration
  /// (empty when the objective has no value function).
  std::vector<double> objective_trace;
};

/// Accelerated proximal gradient for min g(W) + lambda * |W|_1 with step 1/L.
/// Stops after max_iter iterations or when
/// |W_k - W_{k-1}|_F / max(1, |W_{k-1}|_F) < tol.
/// Throws NumericalError (naming the iteration) on a non-finite gradient.
FistaResult fista(const SmoothObjective& obj, double lambda, const Matrix& W0, int max_iter,
                  double tol);

/// Smooth part known to be the quadratic 1/2 <W, H W> - <B, W> + c with H
/// symmetric PSD.
struct QuadraticObjective {
  std::function<Matrix(const Matrix&)> hessian;
  Matrix linear;  ///< B
  double constant = 0.0;
  double lipschitz = 1.0;
};

/// Monotone FISTA for a quadratic smooth part. Gradients at the extrapolated
/// points follow from cached H products by linearity, so each iteration costs
/// a single application of H.
FistaResult fista(const QuadraticObjective& obj, double lambda, const Matrix& W0, int max_iter,
                  double tol);

/// U max(S - tau, 0) V^T for the SVD M = U S V^T.
Matrix svt(const Matrix& M, double tau);

struct AdmmResult {
  Matrix Z;
  /// |D0 - Z|_F after every sweep.
  std::vector<double> primal_residuals;
};

/// ADMM for min_{D0} |V - D0 X|_F^2 + eta |D0|_*, splitting D0 = Z:
///   D0 <- (2 V X^T + rho (Z - U)) (2 X X^T + rho I)^{-1}
///   Z  <- svt(D0 + U, eta / rho)
///   U  <- U + D0 - Z
/// Z starts at Z0 when given (zero otherwise); returns the final Z.
AdmmResult admm_nuclear(const Matrix& V, const Matrix& X, double eta, double rho, int iters,
                        const Matrix& Z0 = Matrix());

/// Largest eigenvalue of a symmetric PSD linear operator on rows x cols
/// matrices by power iteration, times a 1.01 safety factor. Floors at 1e-12.
double power_iteration_lipschitz(const std::function<Matrix(const Matrix&)>& apply, Index rows,
                                 Index cols, int iters, std::uint64_t seed);

/// Same for an explicit symmetric PSD matrix.
double power_iteration_lipschitz(const Matrix& gram, int iters, std::uint64_t seed);

}  // namespace lrsdl
