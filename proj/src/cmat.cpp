#include "caldera/cmat.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "caldera/errors.hpp"

namespace caldera {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'A', 'T'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(std::string_view bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string encode_cmat(const Matrix& A) {
  std::string out;
  out.reserve(kCmatHeaderBytes + 8 * static_cast<std::size_t>(A.size()));
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, kCmatVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(A.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(A.cols()));
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(A(i, j)));
  }
  return out;
}

Matrix decode_cmat(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad CMAT magic", 0);
  if (bytes.size() < 8) throw FormatError("truncated CMAT version field", bytes.size());
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kCmatVersion) {
    throw FormatError("unsupported CMAT version " + std::to_string(version), 4);
  }
  if (bytes.size() < kCmatHeaderBytes) throw FormatError("truncated CMAT header", bytes.size());
  const auto rows = get_le<std::uint64_t>(bytes, 8);
  const auto cols = get_le<std::uint64_t>(bytes, 16);
  constexpr auto kMaxIndex = static_cast<std::uint64_t>(std::numeric_limits<Index>::max());
  if (rows > kMaxIndex || cols > kMaxIndex || (cols != 0 && rows > (kMaxIndex / 8) / cols)) {
    throw FormatError("CMAT dimensions too large", 8);
  }
  const std::uint64_t payload = 8 * rows * cols;
  const std::uint64_t have = bytes.size() - kCmatHeaderBytes;
  if (have < payload) throw FormatError("truncated CMAT payload", bytes.size());
  if (have > payload) throw FormatError("trailing bytes after CMAT payload", kCmatHeaderBytes + payload);

  Matrix A(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t off = kCmatHeaderBytes;
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j, off += 8) A(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, off));
  }
  return A;
}

void write_cmat(const std::filesystem::path& path, const Matrix& A) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = encode_cmat(A);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Matrix read_cmat(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_cmat(bytes);
}

}  // namespace caldera
