#pragma once

#include <stdexcept>
#include <string>

namespace fform {

enum class ErrorKind {
  kInvalidGroup,
  kDegenerateDirection,
  kInsufficientPairs,
  kUndefinedLoss,
  kPoolExhausted,
  kDegenerateProjection,
  kConfig,
  kNotFound,
  kUndefinedRate,
  kParameter,
  kParse,
  kValidation,
  kSchemaVersion,
  kEmptyDataset,
  kSpec,
  kIo,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; `kind()` lets callers (the CLI in
// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fform
