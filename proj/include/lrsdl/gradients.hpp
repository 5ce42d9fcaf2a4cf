#pragma once

#include "lrsdl/types.hpp"

#include <utility>
#include <vector>

namespace lrsdl {

/// Products of the stacked fidelity system
///
///   Yhat = [ Ys_1 Ys_2 ... Ys_C ]      Dhat = [ D_1 D_2 ... D_C ]
///          [ Ys_1  0   ...  0   ]             [ D_1  0  ...  0  ]
///          [  0   Ys_2 ...  0   ]             [  0  D_2 ...  0  ]
///          [  ...               ]             [  ...            ]
///
/// (Ys = Y - D0 X0) kept in compact form: Dhat^T Dhat = D^T D + blockdiag(D_c^T D_c)
/// and Dhat^T Yhat = D^T Ys plus D_c^T Ys_c on diagonal block (c, c).
struct HatProducts {
  Matrix DtD;
  std::vector<Matrix> blk;
  Matrix DtYbar;
  /// |Yhat|_F^2, the constant of the quadratic.
  double yhat_sq = 0.0;
  Index atoms_per_class = 0;
  Index per_class = 0;

  /// Dhat^T Dhat X.
  Matrix apply_gram(const Matrix& X) const;
  /// Dhat^T Dhat as a dense K x K matrix.
  Matrix gram() const;
  /// 1/2 |Yhat - Dhat X|_F^2.
  double half_fidelity(const Matrix& X) const;
};

/// Ybar = Y - D X and Ytilde with class block c equal to Y_c - D_c X_c^c.
std::pair<Matrix, Matrix> residual_matrices(const Dataset& data, const DictionaryBundle& dicts,
                                            const CoefBundle& coefs);

/// Y - D0 X0.
Matrix shared_shifted(const Dataset& data, const DictionaryBundle& dicts, const CoefBundle& coefs);

HatProducts build_hat_products(const DictionaryBundle& dicts, const Matrix& Ybar_shifted,
                               Index per_class);

/// Dhat^T Dhat X - Dhat^T Yhat: gradient of 1/2 sum_c rbar w.r.t. X at fixed X0.
Matrix grad_fidelity_X(const HatProducts& hat, const Matrix& X);

/// Fisher term f(X) = sum_c (|X_c - M_c|^2 - |M_c - M|^2) + |X|^2, means taken from X.
/// Labels are 1-based in any column order.
double fisher_value(const Matrix& X, const std::vector<int>& labels, int num_classes);

/// 4X + 2M - 4[M_1 ... M_C] with the means taken from X itself. Requires equal
/// class sizes (DomainError otherwise).
Matrix grad_fisher_X(const Matrix& X, const std::vector<int>& labels, int num_classes);

/// Same expression with M and M_c held at `frozen` (the gradient of a
/// majorizer of f that touches f where the means were taken).
Matrix grad_fisher_X(const Matrix& X, const std::vector<int>& labels, const MeanStats& frozen);

/// Value of that majorizer; equals fisher_value at the point `anchor` the means came from.
double fisher_surrogate_value(const Matrix& X, const Matrix& anchor, const std::vector<int>& labels,
                              const MeanStats& frozen);

/// 2 D0^T D0 X0 - D0^T Ysum + lambda2 (X0 - M0), Ysum = Ybar + Ytilde.
Matrix grad_X0(const Matrix& D0, const Matrix& Ysum, const Matrix& X0, const Matrix& M0,
               double lambda2);

/// Gradient of 1/2 |y - Dbar xbar|^2 + lambda2/2 |x0 - m0|^2:
/// Dbar^T Dbar xbar - Dbar^T y + lambda2 [0; x0 - m0].
Vector grad_test_x(const DictionaryBundle& dicts, const Vector& y, const Vector& xbar,
                   const Vector& m0, double lambda2);

struct ObjectiveTerms {
  double fidelity = 0.0;  ///< 1/2 sum_c rbar(Y_c, Dbar, Xbar_c)
  double l1 = 0.0;        ///< lambda1 |Xbar|_1
  double fisher = 0.0;    ///< lambda2/2 (f(X) + |X0 - M0|^2)
  double nuclear = 0.0;   ///< eta |D0|_*

  double total() const { return fidelity + l1 + fisher + nuclear; }
};

/// Full training objective, each term evaluated literally from its definition.
/// Throws NumericalError naming the first non-finite term.
ObjectiveTerms objective_lrsdl(const Dataset& data, const DictionaryBundle& dicts,
                               const CoefBundle& coefs, double lambda1, double lambda2,
                               double eta);
ObjectiveTerms objective_lrsdl(const Dataset& data, const DictionaryBundle& dicts,
                               const CoefBundle& coefs, const HyperParams& hyper);

double nuclear_norm(const Matrix& M);

}  // namespace lrsdl
