#include "lrsdl/synthetic.hpp"

#include "lrsdl/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <random>

namespace lrsdl {

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  }
  return M;
}

Vector sparse_code(Index length, Index nnz, double scale, std::mt19937_64& rng) {
  Vector v = Vector::Zero(length);
  if (length == 0) return v;
  std::vector<Index> pos(length);
  std::iota(pos.begin(), pos.end(), Index{0});
  std::shuffle(pos.begin(), pos.end(), rng);
  std::normal_distribution<double> normal(0.0, scale);
  for (Index k = 0; k < std::min(nnz, length); ++k) v(pos[k]) = normal(rng);
  return v;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.num_classes < 1 || cfg.dim < 1 || cfg.per_class < 1 || cfg.atoms_per_class < 1) {
    throw ParameterError("synthetic: classes, dim, per_class and atoms_per_class must be >= 1");
  }
  if (cfg.shared_atoms < 0 || cfg.shared_rank < 0) {
    throw ParameterError("synthetic: shared sizes must be >= 0");
  }
  if (cfg.shared_rank > std::min(cfg.dim, cfg.shared_atoms)) {
    throw ParameterError("synthetic: shared_rank " + std::to_string(cfg.shared_rank) +
                         " exceeds min(dim, k0) = " +
                         std::to_string(std::min(cfg.dim, cfg.shared_atoms)));
  }
  if (!(cfg.noise_sigma >= 0.0)) throw ParameterError("synthetic: noise_sigma must be >= 0");

  std::mt19937_64 rng(cfg.seed);

  DictionaryBundle truth;
  truth.num_classes = cfg.num_classes;
  truth.atoms_per_class = cfg.atoms_per_class;
  truth.D = gaussian(cfg.dim, cfg.num_classes * cfg.atoms_per_class, rng);
  normalize_columns(truth.D);
  if (cfg.shared_atoms > 0 && cfg.shared_rank > 0) {
    truth.D0 = gaussian(cfg.dim, cfg.shared_rank, rng) *
               gaussian(cfg.shared_rank, cfg.shared_atoms, rng);
    normalize_columns(truth.D0);
  } else {
    truth.D0 = Matrix::Zero(cfg.dim, cfg.shared_atoms);
  }

  const Index N = cfg.per_class * cfg.num_classes;
  Matrix Y(cfg.dim, N);
  std::vector<int> labels(N);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (Index s = 0; s < cfg.per_class; ++s) {
      const Index j = c * cfg.per_class + s;
      Vector y = truth.class_dict(c) *
                 sparse_code(cfg.atoms_per_class, cfg.class_nnz, cfg.class_scale, rng);
      if (cfg.shared_atoms > 0) {
        y += truth.D0 * sparse_code(cfg.shared_atoms, cfg.shared_nnz, cfg.shared_scale, rng);
      }
      if (cfg.noise_sigma > 0.0) {
        for (Index i = 0; i < cfg.dim; ++i) y(i) += cfg.noise_sigma * noise(rng);
      }
      Y.col(j) = y;
      labels[j] = c + 1;
    }
  }
  return {Dataset(std::move(Y), std::move(labels)), std::move(truth)};
}

std::pair<Dataset, Dataset> split_per_class(const Dataset& data, Index train_per_class) {
  const Index n = data.per_class();
  if (train_per_class < 1 || train_per_class >= n) {
    throw ParameterError("split: train_per_class must lie in [1, per_class)");
  }
  const int C = data.num_classes();
  const Index test_per_class = n - train_per_class;
  Matrix train(data.dim(), C * train_per_class);
  Matrix test(data.dim(), C * test_per_class);
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  for (int c = 0; c < C; ++c) {
    auto block = data.class_block(c);
    train.middleCols(c * train_per_class, train_per_class) = block.leftCols(train_per_class);
    test.middleCols(c * test_per_class, test_per_class) = block.rightCols(test_per_class);
    train_labels.insert(train_labels.end(), train_per_class, c + 1);
    test_labels.insert(test_labels.end(), test_per_class, c + 1);
  }
  return {Dataset(std::move(train), std::move(train_labels)),
          Dataset(std::move(test), std::move(test_labels))};
}

Index numerical_rank(const Matrix& M, double rel_tol, double abs_floor) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= abs_floor) return 0;
  const double cut = std::max(rel_tol * s(0), abs_floor);
  return (s.array() > cut).count();
}

}  // namespace lrsdl
