#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace transboost {

enum class ErrorKind {
  kMalformedRow,
  kBadLabel,
  kBadValue,
  kMissingColumn,
  kEmptyTarget,
  kEmptySource,
  kLengthMismatch,
  kFeatureCountMismatch,
  kIo,
  kModelFormat,
  kDegenerateLabels,
};

std::string_view to_string(ErrorKind kind);

// Raised for any problem with input data, model files, or shapes.
class DataError : public std::runtime_error {
 public:
  DataError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised for out-of-range hyperparameters and unparsable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace transboost
