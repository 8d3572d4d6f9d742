#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rgm/model.hpp"

namespace rgm::io {

inline constexpr char kInstanceMagic[4] = {'R', 'G', 'M', 'I'};
inline constexpr char kMatrixMagic[4] = {'R', 'G', 'M', 'M'};
inline constexpr std::uint32_t kFormatVersion = 1;

/// Binary container, little-endian:
///   "RGMI" u32 version, u64 n, f64 rho, u64 seed,
///   strict lower triangle of A row-major (f64), same for B, pi* as n u64.
void save_instance(const std::filesystem::path& path, const CorrelatedInstance& inst);
CorrelatedInstance load_instance(const std::filesystem::path& path);

/// "RGMM" u32 version, u64 rows, u64 cols, column-major f64 payload.
void save_matrix(const std::filesystem::path& path, const Mat& m);
Mat load_matrix(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Mat& m);
/// Header "u,v" then one line per vertex.
void write_assignment_csv(const std::filesystem::path& path, const Permutation& pi);

}  // namespace rgm::io
