#pragma once

#include <stdexcept>
#include <string>

namespace radloc {

/// Bad command line, unknown preset, inconsistent configuration. CLI exit 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent data: bad CSV header, non-numeric cell,
/// dimension mismatch, wrong container kind, corrupt file. CLI exit 2.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerically degenerate request: zero-IQR binning, zero-norm sample at the
/// operation level, source inside a detector, empty class. CLI exit 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace radloc
