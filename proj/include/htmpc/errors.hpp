#ifndef HTMPC_ERRORS_HPP_
#define HTMPC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace htmpc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate geometric input (coincident discs, point inside a circle, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A path that is not connected or otherwise malformed.
class InvalidPathError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No traversable path; the caller is expected to fall back or replan.
class InfeasiblePlanError : public Error {
 public:
  using Error::Error;
};

/// No reachable point makes progress toward the target.
class DeadEndError : public Error {
 public:
  using Error::Error;
};

/// Scenario file that does not match the schema. `path()` is the dotted field
/// path, `line()` the 1-based line of the offending node (0 when unknown).
class SchemaError : public Error {
 public:
  SchemaError(std::string field_path, int line, const std::string& what)
      : Error(field_path + " (line " + std::to_string(line) + "): " + what),
        path_(std::move(field_path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }

 private:
  std::string path_;
  int line_;
};

}  // namespace htmpc

#endif  // HTMPC_ERRORS_HPP_
