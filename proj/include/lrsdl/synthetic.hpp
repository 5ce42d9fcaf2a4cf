#pragma once

#include "lrsdl/types.hpp"

#include <cstdint>

namespace lrsdl {

/// Planted model: each class-c sample is D_c a + D0 b + noise, with sparse
/// Gaussian codes a, b and a rank-limited shared dictionary D0.
struct SyntheticConfig {
  int num_classes = 2;
  Index dim = 10;
  Index per_class = 5;
  Index atoms_per_class = 3;
  Index shared_atoms = 0;
  Index shared_rank = 0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  Index class_nnz = 3;   ///< non-zeros in each class code (capped at atoms_per_class)
  Index shared_nnz = 3;  ///< non-zeros in each shared code (capped at shared_atoms)
  double class_scale = 1.0;
  double shared_scale = 1.0;
};

struct SyntheticData {
  Dataset data;
  DictionaryBundle truth;
};

/// Throws ParameterError when shared_rank > min(dim, shared_atoms) or a size is invalid.
SyntheticData generate_synthetic(const SyntheticConfig& config);

/// First `train_per_class` samples of every class go to the first dataset,
/// the rest to the second.
std::pair<Dataset, Dataset> split_per_class(const Dataset& data, Index train_per_class);

/// Numerical rank: singular values above rel_tol * sigma_max (and above abs_floor).
Index numerical_rank(const Matrix& M, double rel_tol, double abs_floor = 0.0);

}  // namespace lrsdl
