#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepmom {

/// Parameter, gradient or data tensors with inconsistent dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs outside an operation's mathematical domain (non one-hot target,
/// empty block, b > m, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid training or experiment configuration, detected before any work.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string msg = what;
    if (row > 0) {
      msg += " (row " + std::to_string(row);
      if (column > 0) msg += ", column " + std::to_string(column);
      msg += ")";
    }
    return msg;
  }

  std::size_t row_;
  std::size_t column_;
};

}  // namespace deepmom
