#pragma once

#include <stdexcept>
#include <string>

namespace decon {

/// Failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind { Config, Data, Numerical, Argument };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Precondition violation on a library call (bad interval, bad length, ...).
inline Error argumentError(const std::string& what) { return {ErrorKind::Argument, what}; }
inline Error dataError(const std::string& what) { return {ErrorKind::Data, what}; }
inline Error configError(const std::string& what) { return {ErrorKind::Config, what}; }
inline Error numericalError(const std::string& what) { return {ErrorKind::Numerical, what}; }

}  // namespace decon
