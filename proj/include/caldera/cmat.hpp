#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "caldera/types.hpp"

namespace caldera {

// Layout: "CMAT" | u32 version | u64 rows | u64 cols | rows*cols f64, all little-endian, row-major.
inline constexpr std::uint32_t kCmatVersion = 1;
inline constexpr std::size_t kCmatHeaderBytes = 24;

std::string encode_cmat(const Matrix& A);
// Throws FormatError naming the byte offset of the first problem.
Matrix decode_cmat(std::string_view bytes);

void write_cmat(const std::filesystem::path& path, const Matrix& A);
Matrix read_cmat(const std::filesystem::path& path);

}  // namespace caldera
