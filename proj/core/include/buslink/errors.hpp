#pragma once

#include <stdexcept>
#include <string>

namespace buslink {

/// Malformed input file content. Message carries "path:line:" context.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Cross-reference between inputs is broken (dangling vertex id, unknown stop, ...).
struct IntegrityError : std::runtime_error {
  explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration value or combination.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative solver did not converge within its iteration budget.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// No path exists between the requested endpoints.
struct NoPathError : std::runtime_error {
  explicit NoPathError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input exceeds a hard size guard (e.g. dense eigendecomposition cap).
struct SizeError : std::runtime_error {
  explicit SizeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace buslink
