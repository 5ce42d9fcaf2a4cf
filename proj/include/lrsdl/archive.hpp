#pragma once

#include "lrsdl/learner.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace lrsdl {

inline constexpr int kArchiveFormatVersion = 1;

/// Writes a model directory:
///   meta          key=value lines (c, d, k_c, k0, lambda1, lambda2, eta, w, seed, ...,
///                 format_version, status)
///   D.lmx         d x K
///   D0.lmx        d x k0
///   means_mc.lmx  K x C, column c is m_c
///   mean_m0.lmx   k0 x 1
///   trace.csv
void save_model(const LearnedModel& model, const std::filesystem::path& dir);

/// Throws IoError for a missing directory or file, FormatError for a bad meta
/// file and DimensionError when the matrices disagree with meta.
LearnedModel load_model(const std::filesystem::path& dir);

std::map<std::string, std::string> read_meta(const std::filesystem::path& path);

}  // namespace lrsdl
