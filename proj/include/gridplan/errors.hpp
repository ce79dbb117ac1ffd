#pragma once

#include <stdexcept>
#include <string>

namespace gridplan {

// Error taxonomy shared by the library and the CLI. The CLI maps
// SolverError to exit code 2 and everything else to exit code 1.
enum class ErrorKind {
  Schema,      // file header / key structure does not match expectations
  Validation,  // values out of range, broken invariants
  Format,      // malformed file contents (timestamps, numbers)
  Config,      // inconsistent configuration
  Input,       // bad operation arguments
  Solver,      // LP engine failure
  Internal,    // should-not-happen conditions
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ErrorKind::Schema, m) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error(ErrorKind::Validation, m) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error(ErrorKind::Format, m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct InputError : Error {
  explicit InputError(const std::string& m) : Error(ErrorKind::Input, m) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& m) : Error(ErrorKind::Solver, m) {}
};
struct InternalError : Error {
  explicit InternalError(const std::string& m) : Error(ErrorKind::Internal, m) {}
};

}  // namespace gridplan
