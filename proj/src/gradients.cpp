#include "lrsdl/gradients.hpp"

#include "lrsdl/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace lrsdl {

namespace {

void check_shapes(const Dataset& data, const DictionaryBundle& dicts, const CoefBundle& coefs) {
  const Index d = data.dim();
  const Index N = data.size();
  const Index K = dicts.total_class_atoms();
  if (dicts.D.rows() != d) detail::throw_dimension("class dictionaries", d, K, dicts.D.rows(), K);
  if (dicts.D0.cols() > 0 && dicts.D0.rows() != d) {
    detail::throw_dimension("shared dictionary", d, dicts.D0.cols(), dicts.D0.rows(),
                            dicts.D0.cols());
  }
  if (coefs.X.rows() != K || coefs.X.cols() != N) {
    detail::throw_dimension("X", K, N, coefs.X.rows(), coefs.X.cols());
  }
  if (coefs.X0.rows() != dicts.D0.cols() || (coefs.X0.rows() > 0 && coefs.X0.cols() != N)) {
    detail::throw_dimension("X0", dicts.D0.cols(), N, coefs.X0.rows(), coefs.X0.cols());
  }
  if (dicts.num_classes != data.num_classes() || coefs.per_class != data.per_class() ||
      coefs.atoms_per_class != dicts.atoms_per_class) {
    throw DimensionError("class layout of data, dictionaries and coefficients disagree");
  }
}

std::vector<Index> class_counts(const std::vector<int>& labels, int num_classes) {
  std::vector<Index> counts(num_classes, 0);
  for (int l : labels) {
    if (l < 1 || l > num_classes) throw DataError("label " + std::to_string(l) + " out of range");
    ++counts[l - 1];
  }
  return counts;
}

void require_equal_sizes(const std::vector<Index>& counts) {
  for (Index n : counts) {
    if (n == 0) throw DomainError("fisher gradient: a class has no samples");
    if (n != counts.front()) throw DomainError("fisher gradient: unequal class sizes");
  }
}

}  // namespace

Matrix HatProducts::apply_gram(const Matrix& X) const {
  Matrix out = DtD * X;
  for (std::size_t c = 0; c < blk.size(); ++c) {
    const Index r = static_cast<Index>(c) * atoms_per_class;
    out.middleRows(r, atoms_per_class).noalias() += blk[c] * X.middleRows(r, atoms_per_class);
  }
  return out;
}

Matrix HatProducts::gram() const {
  Matrix G = DtD;
  for (std::size_t c = 0; c < blk.size(); ++c) {
    const Index r = static_cast<Index>(c) * atoms_per_class;
    G.block(r, r, atoms_per_class, atoms_per_class) += blk[c];
  }
  return G;
}

double HatProducts::half_fidelity(const Matrix& X) const {
  // 1/2 |Yhat|^2 - <X, Dhat^T Yhat> + 1/2 <X, Dhat^T Dhat X>
  return 0.5 * yhat_sq - X.cwiseProduct(DtYbar).sum() + 0.5 * X.cwiseProduct(apply_gram(X)).sum();
}

std::pair<Matrix, Matrix> residual_matrices(const Dataset& data, const DictionaryBundle& dicts,
                                            const CoefBundle& coefs) {
  check_shapes(data, dicts, coefs);
  Matrix Ybar = data.Y() - dicts.D * coefs.X;
  Matrix Ytilde(data.dim(), data.size());
  const Index n = data.per_class();
  for (int c = 0; c < data.num_classes(); ++c) {
    Ytilde.middleCols(c * n, n) = data.class_block(c) - dicts.class_dict(c) * coefs.block(c, c);
  }
  return {std::move(Ybar), std::move(Ytilde)};
}

Matrix shared_shifted(const Dataset& data, const DictionaryBundle& dicts, const CoefBundle& coefs) {
  check_shapes(data, dicts, coefs);
  if (dicts.D0.cols() == 0) return data.Y();
  return data.Y() - dicts.D0 * coefs.X0;
}

HatProducts build_hat_products(const DictionaryBundle& dicts, const Matrix& Ybar_shifted,
                               Index per_class) {
  const Index k = dicts.atoms_per_class;
  const int C = dicts.num_classes;
  if (Ybar_shifted.rows() != dicts.dim() || Ybar_shifted.cols() != per_class * C) {
    detail::throw_dimension("shifted data", dicts.dim(), per_class * C, Ybar_shifted.rows(),
                            Ybar_shifted.cols());
  }
  HatProducts hat;
  hat.atoms_per_class = k;
  hat.per_class = per_class;
  hat.DtD = dicts.D.transpose() * dicts.D;
  hat.DtYbar = dicts.D.transpose() * Ybar_shifted;
  hat.blk.reserve(C);
  double own_sq = 0.0;
  for (int c = 0; c < C; ++c) {
    const auto Dc = dicts.class_dict(c);
    const auto Yc = Ybar_shifted.middleCols(c * per_class, per_class);
    hat.blk.emplace_back(Dc.transpose() * Dc);
    hat.DtYbar.block(c * k, c * per_class, k, per_class).noalias() += Dc.transpose() * Yc;
    own_sq += Yc.squaredNorm();
  }
  hat.yhat_sq = Ybar_shifted.squaredNorm() + own_sq;
  return hat;
}

Matrix grad_fidelity_X(const HatProducts& hat, const Matrix& X) {
  if (X.rows() != hat.DtD.rows() || X.cols() != hat.DtYbar.cols()) {
    detail::throw_dimension("X", hat.DtD.rows(), hat.DtYbar.cols(), X.rows(), X.cols());
  }
  return hat.apply_gram(X) - hat.DtYbar;
}

double fisher_value(const Matrix& X, const std::vector<int>& labels, int num_classes) {
  const MeanStats s = mean_stats(X, Matrix(0, X.cols()), labels, num_classes);
  const auto counts = class_counts(labels, num_classes);
  double within = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    within += (X.col(j) - s.mc.col(labels[j] - 1)).squaredNorm();
  }
  double between = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    between += static_cast<double>(counts[c]) * (s.mc.col(c) - s.m).squaredNorm();
  }
  return within - between + X.squaredNorm();
}

Matrix grad_fisher_X(const Matrix& X, const std::vector<int>& labels, int num_classes) {
  require_equal_sizes(class_counts(labels, num_classes));
  return grad_fisher_X(X, labels, mean_stats(X, Matrix(0, X.cols()), labels, num_classes));
}

Matrix grad_fisher_X(const Matrix& X, const std::vector<int>& labels, const MeanStats& frozen) {
  if (static_cast<Index>(labels.size()) != X.cols()) {
    throw DimensionError("fisher gradient: label count differs from column count");
  }
  require_equal_sizes(class_counts(labels, static_cast<int>(frozen.mc.cols())));
  Matrix G = 4.0 * X;
  const Vector two_m = 2.0 * frozen.m;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    G.col(j) += two_m - 4.0 * frozen.mc.col(labels[j] - 1);
  }
  return G;
}

double fisher_surrogate_value(const Matrix& X, const Matrix& anchor, const std::vector<int>& labels,
                              const MeanStats& frozen) {
  // within(X) <= sum |x_j - m_c|^2 at frozen means; -between(X) <= its
  // linearization at the anchor, whose gradient is 2(m_c - m) per column.
  const int C = static_cast<int>(frozen.mc.cols());
  const auto counts = class_counts(labels, C);
  double value = X.squaredNorm();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int c = labels[j] - 1;
    const Vector diff = frozen.mc.col(c) - frozen.m;
    value += (X.col(j) - frozen.mc.col(c)).squaredNorm();
    value -= 2.0 * diff.dot(X.col(j) - anchor.col(j));
  }
  for (int c = 0; c < C; ++c) {
    value -= static_cast<double>(counts[c]) * (frozen.mc.col(c) - frozen.m).squaredNorm();
  }
  return value;
}

Matrix grad_X0(const Matrix& D0, const Matrix& Ysum, const Matrix& X0, const Matrix& M0,
               double lambda2) {
  const Index k0 = D0.cols();
  if (X0.rows() != k0 || M0.rows() != k0 || M0.cols() != X0.cols()) {
    detail::throw_dimension("X0/M0", k0, X0.cols(), M0.rows(), M0.cols());
  }
  if (Ysum.rows() != D0.rows() || Ysum.cols() != X0.cols()) {
    detail::throw_dimension("Ybar + Ytilde", D0.rows(), X0.cols(), Ysum.rows(), Ysum.cols());
  }
  return 2.0 * (D0.transpose() * (D0 * X0)) - D0.transpose() * Ysum + lambda2 * (X0 - M0);
}

Vector grad_test_x(const DictionaryBundle& dicts, const Vector& y, const Vector& xbar,
                   const Vector& m0, double lambda2) {
  const Index K = dicts.total_class_atoms();
  const Index k0 = dicts.shared_atoms();
  if (y.size() != dicts.dim()) throw DimensionError("grad_test_x: sample dimension mismatch");
  if (xbar.size() != K + k0) throw DimensionError("grad_test_x: code length mismatch");
  if (m0.size() != k0) throw DimensionError("grad_test_x: m0 length mismatch");
  const Matrix Dbar = dicts.total();
  Vector g = Dbar.transpose() * (Dbar * xbar - y);
  g.tail(k0) += lambda2 * (xbar.tail(k0) - m0);
  return g;
}

double nuclear_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  if (svd.info() != Eigen::Success) throw NumericalError("nuclear norm: SVD failed");
  return svd.singularValues().sum();
}

ObjectiveTerms objective_lrsdl(const Dataset& data, const DictionaryBundle& dicts,
                               const CoefBundle& coefs, double lambda1, double lambda2,
                               double eta) {
  check_shapes(data, dicts, coefs);
  const int C = data.num_classes();
  const Index k = dicts.atoms_per_class;
  const bool shared = dicts.shared_atoms() > 0;

  ObjectiveTerms t;
  double fid = 0.0;
  for (int c = 0; c < C; ++c) {
    const auto Yc = data.class_block(c);
    const auto Xc = coefs.class_cols(c);
    Matrix full = Yc - dicts.D * Xc;
    Matrix own = Yc - dicts.class_dict(c) * coefs.block(c, c);
    if (shared) {
      const Matrix shared_part = dicts.D0 * coefs.shared_cols(c);
      full -= shared_part;
      own -= shared_part;
    }
    fid += full.squaredNorm() + own.squaredNorm();
    for (int i = 0; i < C; ++i) {
      if (i != c) fid += (dicts.D.middleCols(i * k, k) * coefs.block(i, c)).squaredNorm();
    }
  }
  t.fidelity = 0.5 * fid;

  t.l1 = lambda1 * (coefs.X.cwiseAbs().sum() + (shared ? coefs.X0.cwiseAbs().sum() : 0.0));

  double fbar = fisher_value(coefs.X, data.labels(), C);
  if (shared) {
    const Vector m0 = coefs.X0.rowwise().mean();
    fbar += (coefs.X0.colwise() - m0).squaredNorm();
  }
  t.fisher = 0.5 * lambda2 * fbar;
  t.nuclear = shared ? eta * nuclear_norm(dicts.D0) : 0.0;

  if (!std::isfinite(t.fidelity)) throw NumericalError("objective: non-finite fidelity term");
  if (!std::isfinite(t.l1)) throw NumericalError("objective: non-finite l1 term");
  if (!std::isfinite(t.fisher)) throw NumericalError("objective: non-finite fisher term");
  if (!std::isfinite(t.nuclear)) throw NumericalError("objective: non-finite nuclear term");
  return t;
}

ObjectiveTerms objective_lrsdl(const Dataset& data, const DictionaryBundle& dicts,
                               const CoefBundle& coefs, const HyperParams& hyper) {
  return objective_lrsdl(data, dicts, coefs, hyper.lambda1, hyper.lambda2, hyper.eta);
}

}  // namespace lrsdl
