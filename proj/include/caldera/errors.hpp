#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace caldera {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its admissible domain (bits < 1, range <= 0, NaN input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::int64_t pivot)
      : Error(what), pivot_(pivot) {}
  std::int64_t pivot() const noexcept { return pivot_; }

 private:
  std::int64_t pivot_;
};

// A parameter combination falls outside the window where a bound formula applies.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace caldera
