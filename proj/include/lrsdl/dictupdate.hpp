#pragma once

#include "lrsdl/types.hpp"

#include <vector>

namespace lrsdl {

/// min_D tr(D^T D A) - 2 tr(D^T B): the class-dictionary subproblem, whose
/// gradient w.r.t. D is 2 (D A - B).
struct QuadDictProblem {
  Matrix A;  ///< k x k, symmetric PSD
  Matrix B;  ///< d x k
};

/// Collects the fidelity terms containing D_c (0-based c). With
/// Ys = Y - D0 X0 and Y' = Ys - sum_{i != c} D_i X^i:
///   A = X^c X^c^T + X_c^c X_c^c^T + sum_{c' != c} X_{c'}^c X_{c'}^c^T
///   B = Y' X^c^T + Ys_c X_c^c^T
QuadDictProblem assemble_class_problem(int c, const Dataset& data, const DictionaryBundle& dicts,
                                       const CoefBundle& coefs);

struct OdlStats {
  Index dead_atoms = 0;
  /// Subproblem objective before the first sweep and after each sweep.
  std::vector<double> sweep_objectives;
};

double quad_dict_objective(const QuadDictProblem& problem, const Matrix& D);

/// Block coordinate descent over columns with projection onto the unit ball.
/// Columns with A_jj <= 1e-10 are left untouched and counted as dead.
Matrix odl_update(const QuadDictProblem& problem, const Matrix& D_init, int sweeps = 2,
                  OdlStats* stats = nullptr);

struct SharedUpdateStats {
  bool accepted = true;
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::vector<double> primal_residuals;
};

/// |V - D0 X0|_F^2 + eta |D0|_* with V = (Ybar + Ytilde) / 2.
double shared_dict_objective(const Matrix& V, const Matrix& X0, const Matrix& D0, double eta);

/// ADMM + singular value thresholding on the target V = (Ybar + Ytilde) / 2,
/// warm-started at D0_current; columns longer than 1 are then scaled to unit
/// norm. If the scaled result does not improve the subproblem objective over
/// D0_current, D0_current is returned instead.
Matrix update_shared_dict(const Matrix& Ybar, const Matrix& Ytilde, const Matrix& X0,
                          const Matrix& D0_current, double eta, double rho, int iters,
                          SharedUpdateStats* stats = nullptr);

}  // namespace lrsdl
