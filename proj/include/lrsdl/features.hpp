#pragma once

#include "lrsdl/types.hpp"

#include <cstdint>

namespace lrsdl {

/// target_dim x raw_dim matrix of N(0,1) entries scaled by 1/sqrt(target_dim).
Matrix random_projection_matrix(Index target_dim, Index raw_dim, std::uint64_t seed);

/// R * raw with every output column scaled to unit norm (zero columns are
/// kept and reported through warn()).
Matrix project_features(const Matrix& raw, const Matrix& R);

/// "Random-face" features: project_features with a seeded Gaussian R.
Matrix random_projection_features(const Matrix& raw, Index target_dim, std::uint64_t seed);

}  // namespace lrsdl
