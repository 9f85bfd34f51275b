#pragma once

#include <stdexcept>
#include <string>

namespace genesift {

enum class ErrorKind {
  Usage,    // bad flags / bad config keys
  Config,   // invalid parameter values
  Parse,    // malformed input file
  Data,     // structurally valid input that violates a data contract
  Domain,   // argument outside a function's domain
  Shape,    // dimension mismatch
  Mask,     // invalid feature mask
  Split,    // impossible train/test partition
  Eval,     // evaluation protocol cannot run
  Io,       // filesystem failure
  State,    // object used before it is ready
  Numeric,  // non-finite values produced
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // Process exit codes: 1 usage, 2 data, 3 runtime/numeric.
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::Usage:
      case ErrorKind::Config:
        return 1;
      case ErrorKind::Parse:
      case ErrorKind::Data:
      case ErrorKind::Domain:
      case ErrorKind::Shape:
      case ErrorKind::Mask:
      case ErrorKind::Split:
      case ErrorKind::Eval:
      case ErrorKind::Io:
        return 2;
      default:
        return 3;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace genesift
