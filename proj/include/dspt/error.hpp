#pragma once

#include <stdexcept>
#include <string>

namespace dspt {

// Invalid numeric input or parameter (CLI exit code 2).
class InvalidInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed dataset or checkpoint file (CLI exit code 3). Messages name the
// byte offset where parsing stopped.
class DataFormatError : public std::runtime_error {
public:
  enum class Code {
    BadMagic,
    Truncated,
    BadDimensions,
    LabelOutOfRange,
    NonFinite,
    NotUnitNorm,
  };

  DataFormatError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Code code() const noexcept { return code_; }

private:
  Code code_;
};

// Non-finite loss or gradient detected during training (CLI exit code 4).
class NumericAbortError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dspt
