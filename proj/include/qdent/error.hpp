#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qdent {

// Thrown when a parameter set or config violates a declared range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical inversion that has no real solution for the given inputs.
class NoSolutionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An estimator cannot be evaluated on the supplied data (empty peaks,
// zero denominators, too few points).
class EstimatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Binary file parse failure. `offset` is the byte offset of the offending
// field within the file.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string what, std::uint64_t offset)
      : std::runtime_error(std::move(what) + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// IO failure carrying the path that triggered it.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Config rejected during parsing or validation. `path` is the dotted JSON
// location of the offending key ("" for the whole document).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, std::string path)
      : ValidationError(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qdent
