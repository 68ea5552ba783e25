#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ssc {

/// Malformed or truncated input file. Carries the source name and the byte
/// offset at which decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string source, std::size_t offset, const std::string& what)
      : std::runtime_error(source + " (byte " + std::to_string(offset) + "): " + what),
        source_(std::move(source)),
        offset_(offset) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string source_;
  std::size_t offset_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric-domain violation (negative weights, empty statistics, values out of
/// their admissible range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ssc
