#include "lrsdl/features.hpp"

#include "lrsdl/errors.hpp"

#include <cmath>
#include <random>

namespace lrsdl {

Matrix random_projection_matrix(Index target_dim, Index raw_dim, std::uint64_t seed) {
  if (target_dim < 1 || raw_dim < 1) {
    throw DimensionError("random projection: dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));
  Matrix R(target_dim, raw_dim);
  for (Index j = 0; j < raw_dim; ++j) {
    for (Index i = 0; i < target_dim; ++i) R(i, j) = scale * normal(rng);
  }
  return R;
}

Matrix project_features(const Matrix& raw, const Matrix& R) {
  if (raw.size() == 0) throw DimensionError("random projection: empty input");
  if (R.cols() != raw.rows()) {
    detail::throw_dimension("random projection", R.rows(), raw.rows(), R.rows(), R.cols());
  }
  Matrix out = R * raw;
  const Index zeros = normalize_columns(out);
  if (zeros > 0) warn(std::to_string(zeros) + " zero feature column(s) left unnormalized");
  return out;
}

Matrix random_projection_features(const Matrix& raw, Index target_dim, std::uint64_t seed) {
  if (raw.size() == 0) throw DimensionError("random projection: empty input");
  if (target_dim > raw.rows()) {
    warn("random projection: target_dim " + std::to_string(target_dim) +
         " exceeds raw dimension " + std::to_string(raw.rows()));
  }
  return project_features(raw, random_projection_matrix(target_dim, raw.rows(), seed));
}

}  // namespace lrsdl
