#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

namespace lrsdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Labelled training or test samples. Columns of Y are samples, grouped
/// contiguously by class, every class holding the same number of samples.
/// Class labels are 1-based; every block accessor takes a 0-based class index.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix Y, std::vector<int> labels);

  /// Stable-sorts the columns by label. perm[j] is the original column index
  /// of sorted column j.
  static std::pair<Dataset, std::vector<Index>> from_unsorted(const Matrix& Y,
                                                              const std::vector<int>& labels);

  const Matrix& Y() const { return Y_; }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }
  Index per_class() const { return per_class_; }
  Index dim() const { return Y_.rows(); }
  Index size() const { return Y_.cols(); }

  auto class_block(int c) const { return Y_.middleCols(c * per_class_, per_class_); }

 private:
  Matrix Y_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  Index per_class_ = 0;
};

/// D = [D_1, ..., D_C] stored concatenated (d x C*k_c) plus the shared D0 (d x k0).
struct DictionaryBundle {
  Matrix D;
  Matrix D0;
  int num_classes = 0;
  Index atoms_per_class = 0;

  Index dim() const { return D.rows(); }
  Index total_class_atoms() const { return D.cols(); }
  Index shared_atoms() const { return D0.cols(); }

  auto class_dict(int c) const { return D.middleCols(c * atoms_per_class, atoms_per_class); }
  auto class_dict(int c) { return D.middleCols(c * atoms_per_class, atoms_per_class); }

  /// [D, D0].
  Matrix total() const;

  /// Throws DataError when a norm or finiteness invariant is violated.
  void validate() const;
};

/// Coefficients of Y on D (X, K x N) and on D0 (X0, k0 x N).
struct CoefBundle {
  Matrix X;
  Matrix X0;
  int num_classes = 0;
  Index atoms_per_class = 0;
  Index per_class = 0;

  /// Columns of class c.
  auto class_cols(int c) const { return X.middleCols(c * per_class, per_class); }
  auto class_cols(int c) { return X.middleCols(c * per_class, per_class); }
  /// Rows belonging to dictionary i.
  auto dict_rows(int i) const { return X.middleRows(i * atoms_per_class, atoms_per_class); }
  auto dict_rows(int i) { return X.middleRows(i * atoms_per_class, atoms_per_class); }
  /// X_c^i: rows of dictionary i, columns of class c.
  auto block(int i, int c) const {
    return X.block(i * atoms_per_class, c * per_class, atoms_per_class, per_class);
  }
  auto block(int i, int c) {
    return X.block(i * atoms_per_class, c * per_class, atoms_per_class, per_class);
  }
  auto shared_cols(int c) const { return X0.middleCols(c * per_class, per_class); }

  /// [X; X0].
  Matrix stacked() const;

  static CoefBundle zeros(const DictionaryBundle& dicts, Index per_class);
};

/// Mean coefficient vectors: m (all of X), m_c (class c of X), m0 (all of X0).
struct MeanStats {
  Vector m;
  Matrix mc;  ///< K x C, column c is m_c
  Vector m0;

  /// M: m repeated over `cols` columns.
  Matrix tile_m(Index cols) const;
  /// [M_1, ..., M_C] with each M_c spanning per_class columns.
  Matrix tile_classes(Index per_class) const;
  Matrix tile_m0(Index cols) const;
};

/// Per-class and global column means. labels are 1-based and may be in any
/// order; a class with no samples throws DomainError.
MeanStats mean_stats(const Matrix& X, const Matrix& X0, const std::vector<int>& labels,
                     int num_classes);
MeanStats mean_stats(const CoefBundle& coefs, const std::vector<int>& labels);

struct HyperParams {
  double lambda1 = 0.001;
  double lambda2 = 0.01;
  double eta = 0.1;
  double w = 0.5;
  int outer_iters = 15;
  int fista_iters = 100;
  int test_fista_iters = 300;
  int admm_iters = 100;
  int odl_sweeps = 2;
  double fista_tol = 1e-6;
  double admm_rho = 1.0;
  std::uint64_t seed = 0;

  /// Throws ParameterError on a negative weight, w outside [0,1] or an empty budget.
  void validate() const;
};

/// Scales every column to unit Euclidean norm; zero columns stay zero.
/// Returns the number of zero columns encountered.
Index normalize_columns(Matrix& M);

bool all_finite(const Matrix& M);

}  // namespace lrsdl
