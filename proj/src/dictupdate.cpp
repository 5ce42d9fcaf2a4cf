#include "lrsdl/dictupdate.hpp"

#include "lrsdl/errors.hpp"
#include "lrsdl/gradients.hpp"
#include "lrsdl/prox.hpp"

#include <cmath>

namespace lrsdl {

namespace {
constexpr double kDeadAtom = 1e-10;
}

QuadDictProblem assemble_class_problem(int c, const Dataset& data, const DictionaryBundle& dicts,
                                       const CoefBundle& coefs) {
  if (c < 0 || c >= dicts.num_classes) throw DimensionError("class index out of range");
  const Index n = coefs.per_class;
  const Matrix Ys = shared_shifted(data, dicts, coefs);
  const auto Xc_rows = coefs.dict_rows(c);
  const auto Dc = dicts.class_dict(c);

  // The own-class block and the off-class blocks together cover every column
  // of X^c once, so the Gram part collapses to 2 X^c X^c^T.
  QuadDictProblem p;
  p.A = 2.0 * Xc_rows * Xc_rows.transpose();
  const Matrix Yprime = Ys - dicts.D * coefs.X + Dc * Xc_rows;
  p.B = Yprime * Xc_rows.transpose() +
        Ys.middleCols(c * n, n) * coefs.block(c, c).transpose();
  return p;
}

double quad_dict_objective(const QuadDictProblem& problem, const Matrix& D) {
  return (D.transpose() * D).cwiseProduct(problem.A).sum() - 2.0 * D.cwiseProduct(problem.B).sum();
}

Matrix odl_update(const QuadDictProblem& problem, const Matrix& D_init, int sweeps,
                  OdlStats* stats) {
  const Index k = D_init.cols();
  if (problem.A.rows() != k || problem.A.cols() != k) {
    detail::throw_dimension("ODL A", k, k, problem.A.rows(), problem.A.cols());
  }
  if (problem.B.rows() != D_init.rows() || problem.B.cols() != k) {
    detail::throw_dimension("ODL B", D_init.rows(), k, problem.B.rows(), problem.B.cols());
  }
  if (!all_finite(problem.A) || !all_finite(problem.B) || !all_finite(D_init)) {
    throw NumericalError("odl_update: non-finite input");
  }

  Matrix D = D_init;
  OdlStats local;
  for (Index j = 0; j < k; ++j) {
    if (problem.A(j, j) <= kDeadAtom) ++local.dead_atoms;
  }
  local.sweep_objectives.push_back(quad_dict_objective(problem, D));
  for (int s = 0; s < sweeps; ++s) {
    for (Index j = 0; j < k; ++j) {
      const double ajj = problem.A(j, j);
      if (ajj <= kDeadAtom) continue;
      Vector u = (problem.B.col(j) - D * problem.A.col(j)) / ajj + D.col(j);
      D.col(j) = u / std::max(u.norm(), 1.0);
    }
    local.sweep_objectives.push_back(quad_dict_objective(problem, D));
  }
  if (stats) *stats = std::move(local);
  return D;
}

double shared_dict_objective(const Matrix& V, const Matrix& X0, const Matrix& D0, double eta) {
  return (V - D0 * X0).squaredNorm() + eta * nuclear_norm(D0);
}

Matrix update_shared_dict(const Matrix& Ybar, const Matrix& Ytilde, const Matrix& X0,
                          const Matrix& D0_current, double eta, double rho, int iters,
                          SharedUpdateStats* stats) {
  if (Ybar.rows() != Ytilde.rows() || Ybar.cols() != Ytilde.cols()) {
    detail::throw_dimension("Ytilde", Ybar.rows(), Ybar.cols(), Ytilde.rows(), Ytilde.cols());
  }
  if (D0_current.cols() != X0.rows() || (X0.rows() > 0 && D0_current.rows() != Ybar.rows())) {
    detail::throw_dimension("D0", Ybar.rows(), X0.rows(), D0_current.rows(), D0_current.cols());
  }
  SharedUpdateStats local;
  if (X0.rows() == 0) {
    if (stats) *stats = local;
    return D0_current;
  }
  const Matrix V = 0.5 * (Ybar + Ytilde);
  AdmmResult admm = admm_nuclear(V, X0, eta, rho, iters, D0_current);
  Matrix D0 = std::move(admm.Z);
  for (Index j = 0; j < D0.cols(); ++j) {
    const double n = D0.col(j).norm();
    if (n > 1.0) D0.col(j) /= n;
  }
  local.primal_residuals = std::move(admm.primal_residuals);
  local.objective_before = shared_dict_objective(V, X0, D0_current, eta);
  local.objective_after = shared_dict_objective(V, X0, D0, eta);
  if (local.objective_after > local.objective_before) {
    local.accepted = false;
    local.objective_after = local.objective_before;
    D0 = D0_current;
  }
  if (stats) *stats = std::move(local);
  return D0;
}

}  // namespace lrsdl
