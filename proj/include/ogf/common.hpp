#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ogf {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched vector/matrix/graph dimensions.
struct DimensionError : Error {
  using Error::Error;
};

/// A domain invariant (weight range, simplex membership, ...) was violated.
struct InvariantError : Error {
  using Error::Error;
};

/// Invalid configuration value (zero filter order, empty grid, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number when known.
struct ParseError : Error {
  ParseError(const std::string& msg, long line_no = -1)
      : Error(line_no >= 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  long line;
};

/// Structurally valid file whose content breaks the schema contract.
struct SchemaError : Error {
  using Error::Error;
};

/// An online run produced predictions beyond the overflow guard.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace ogf
