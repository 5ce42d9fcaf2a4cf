#include "lrsdl/types.hpp"

#include "lrsdl/errors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>

namespace lrsdl {

bool all_finite(const Matrix& M) { return M.size() == 0 || M.allFinite(); }

Dataset::Dataset(Matrix Y, std::vector<int> labels) : Y_(std::move(Y)), labels_(std::move(labels)) {
  if (static_cast<Index>(labels_.size()) != Y_.cols()) {
    throw DimensionError("dataset: " + std::to_string(labels_.size()) + " labels for " +
                         std::to_string(Y_.cols()) + " samples");
  }
  if (!all_finite(Y_)) throw DataError("dataset: non-finite sample entries");
  if (labels_.empty()) return;

  num_classes_ = *std::max_element(labels_.begin(), labels_.end());
  if (*std::min_element(labels_.begin(), labels_.end()) < 1) {
    throw DataError("dataset: labels must be in 1..C");
  }
  std::vector<Index> counts(num_classes_, 0);
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (j > 0 && labels_[j] < labels_[j - 1]) {
      throw DataError("dataset: columns are not grouped contiguously by class");
    }
    ++counts[labels_[j] - 1];
  }
  per_class_ = counts.front();
  for (int c = 0; c < num_classes_; ++c) {
    if (counts[c] == 0) {
      throw DataError("dataset: class " + std::to_string(c + 1) + " has no samples");
    }
    if (counts[c] != per_class_) {
      throw DataError("dataset: unequal class sizes (class 1 has " + std::to_string(per_class_) +
                      ", class " + std::to_string(c + 1) + " has " + std::to_string(counts[c]) +
                      ")");
    }
  }
}

std::pair<Dataset, std::vector<Index>> Dataset::from_unsorted(const Matrix& Y,
                                                              const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != Y.cols()) {
    throw DimensionError("dataset: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(Y.cols()) + " samples");
  }
  std::vector<Index> perm(labels.size());
  std::iota(perm.begin(), perm.end(), Index{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](Index a, Index b) { return labels[a] < labels[b]; });
  Matrix sorted(Y.rows(), Y.cols());
  std::vector<int> sorted_labels(labels.size());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    sorted.col(j) = Y.col(perm[j]);
    sorted_labels[j] = labels[perm[j]];
  }
  return {Dataset(std::move(sorted), std::move(sorted_labels)), std::move(perm)};
}

Matrix DictionaryBundle::total() const {
  Matrix T(D.rows(), D.cols() + D0.cols());
  T << D, D0;
  return T;
}

void DictionaryBundle::validate() const {
  constexpr double kNormSlack = 1e-9;
  if (!all_finite(D) || !all_finite(D0)) throw DataError("dictionary: non-finite entries");
  if (D0.cols() > 0 && D0.rows() != D.rows()) {
    detail::throw_dimension("shared dictionary", D.rows(), D0.cols(), D0.rows(), D0.cols());
  }
  if (D.cols() != num_classes * atoms_per_class) {
    detail::throw_dimension("class dictionaries", D.rows(), num_classes * atoms_per_class,
                            D.rows(), D.cols());
  }
  for (Index j = 0; j < D.cols(); ++j) {
    const double n = D.col(j).norm();
    if (!(n > 0.0) || n > 1.0 + kNormSlack) {
      std::ostringstream os;
      os << "dictionary: class atom " << j << " has norm " << n;
      throw DataError(os.str());
    }
  }
  for (Index j = 0; j < D0.cols(); ++j) {
    if (D0.col(j).norm() > 1.0 + kNormSlack) {
      throw DataError("dictionary: shared atom " + std::to_string(j) + " exceeds unit norm");
    }
  }
}

Matrix CoefBundle::stacked() const {
  Matrix S(X.rows() + X0.rows(), X.cols());
  S << X, X0;
  return S;
}

CoefBundle CoefBundle::zeros(const DictionaryBundle& dicts, Index per_class) {
  const Index N = per_class * dicts.num_classes;
  return CoefBundle{Matrix::Zero(dicts.total_class_atoms(), N),
                    Matrix::Zero(dicts.shared_atoms(), N), dicts.num_classes,
                    dicts.atoms_per_class, per_class};
}

Matrix MeanStats::tile_m(Index cols) const { return m.replicate(1, cols); }

Matrix MeanStats::tile_classes(Index per_class) const {
  Matrix T(mc.rows(), mc.cols() * per_class);
  for (Index c = 0; c < mc.cols(); ++c) {
    T.middleCols(c * per_class, per_class) = mc.col(c).replicate(1, per_class);
  }
  return T;
}

Matrix MeanStats::tile_m0(Index cols) const { return m0.replicate(1, cols); }

MeanStats mean_stats(const Matrix& X, const Matrix& X0, const std::vector<int>& labels,
                     int num_classes) {
  if (static_cast<Index>(labels.size()) != X.cols()) {
    throw DimensionError("mean_stats: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(X.cols()) + " columns");
  }
  if (X0.rows() > 0 && X0.cols() != X.cols()) {
    detail::throw_dimension("mean_stats X0", X0.rows(), X.cols(), X0.rows(), X0.cols());
  }
  if (X.cols() == 0) throw DomainError("mean_stats: no samples");

  MeanStats s;
  s.mc = Matrix::Zero(X.rows(), num_classes);
  std::vector<Index> counts(num_classes, 0);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int c = labels[j] - 1;
    if (c < 0 || c >= num_classes) {
      throw DataError("mean_stats: label " + std::to_string(labels[j]) + " out of range");
    }
    s.mc.col(c) += X.col(j);
    ++counts[c];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw DomainError("mean_stats: class " + std::to_string(c + 1) + " has zero samples");
    }
    s.mc.col(c) /= static_cast<double>(counts[c]);
  }
  s.m = X.rowwise().mean();
  s.m0 = X0.rows() > 0 ? Vector(X0.rowwise().mean()) : Vector(0);
  return s;
}

MeanStats mean_stats(const CoefBundle& coefs, const std::vector<int>& labels) {
  return mean_stats(coefs.X, coefs.X0, labels, coefs.num_classes);
}

void HyperParams::validate() const {
  auto fail = [](const std::string& m) { throw ParameterError("hyper-parameters: " + m); };
  if (!(lambda1 >= 0.0)) fail("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) fail("lambda2 must be >= 0");
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (!(w >= 0.0 && w <= 1.0)) fail("w must lie in [0, 1]");
  if (outer_iters < 1 || fista_iters < 1 || test_fista_iters < 1 || admm_iters < 1 ||
      odl_sweeps < 1) {
    fail("iteration budgets must be >= 1");
  }
  if (!(fista_tol > 0.0)) fail("fista_tol must be > 0");
  if (!(admm_rho > 0.0)) fail("admm_rho must be > 0");
}

Index normalize_columns(Matrix& M) {
  Index zeros = 0;
  for (Index j = 0; j < M.cols(); ++j) {
    const double n = M.col(j).stableNorm();
    if (n > 0.0) {
      M.col(j) /= n;
    } else {
      ++zeros;
    }
  }
  return zeros;
}

}  // namespace lrsdl
