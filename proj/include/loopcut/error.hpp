#pragma once

#include <stdexcept>
#include <string>

namespace loopcut {

// Every failure raised by the library derives from Error. The category maps
// one-to-one onto the status codes of the C API.
enum class ErrorKind {
  InvalidArgument,  // violated precondition, shape mismatch, bad label
  Numerical,        // non-finite data, non-convergence, degenerate candidates
  Io,               // unreadable config, unwritable report
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::InvalidArgument: return "InvalidArgument";
      case ErrorKind::Numerical: return "NumericalError";
      case ErrorKind::Io: return "IoError";
    }
    return "Error";
  }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

#define LOOPCUT_REQUIRE(cond, msg)                  \
  do {                                              \
    if (!(cond)) throw ::loopcut::InvalidArgument(msg); \
  } while (0)

}  // namespace loopcut
