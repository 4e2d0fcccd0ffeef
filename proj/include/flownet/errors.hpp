#pragma once

#include <stdexcept>
#include <string>

namespace flownet {

/// Base class for all library errors. `rule()` carries a short machine
/// readable tag (e.g. "Kirchhoff", "(A4)") used by the CLI and tests.
class Error : public std::runtime_error {
public:
  Error(std::string rule, const std::string& what)
      : std::runtime_error(what), rule_(std::move(rule)) {}

  const std::string& rule() const noexcept { return rule_; }

private:
  std::string rule_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

struct KirchhoffViolation : ValidationError {
  explicit KirchhoffViolation(const std::string& what)
      : ValidationError("Kirchhoff", what) {}
};

struct NonPositiveVelocity : ValidationError {
  explicit NonPositiveVelocity(const std::string& what)
      : ValidationError("NonPositiveVelocity", what) {}
};

struct EmptyGraph : ValidationError {
  explicit EmptyGraph(const std::string& what)
      : ValidationError("EmptyGraph", what) {}
};

struct AllocationViolation : ValidationError {
  explicit AllocationViolation(const std::string& what)
      : ValidationError("AllocationViolation", what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what)
      : Error("DimensionMismatch", what) {}
};

struct OutOfRange : Error {
  explicit OutOfRange(const std::string& what) : Error("OutOfRange", what) {}
};

struct SignalTooShort : Error {
  explicit SignalTooShort(const std::string& what)
      : Error("SignalTooShort", what) {}
};

struct HistoryGap : Error {
  explicit HistoryGap(const std::string& what) : Error("HistoryGap", what) {}
};

struct IncompatibleInitialData : ValidationError {
  explicit IncompatibleInitialData(const std::string& what)
      : ValidationError("IncompatibleInitialData", what) {}
};

struct NonFiniteState : Error {
  NonFiniteState(const std::string& what, double when)
      : Error("NonFiniteState", what), time(when) {}
  double time;
};

struct TailNotNegligible : Error {
  explicit TailNotNegligible(const std::string& what)
      : Error("TailNotNegligible", what) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& what)
      : Error("NoConvergence", what) {}
};

struct SingularResolvent : Error {
  explicit SingularResolvent(const std::string& what)
      : Error("SingularResolvent", what) {}
};

/// Parse failure with source location, thrown by the file-format readers.
class ParseError : public Error {
public:
  ParseError(std::string file, int line, int column, const std::string& what)
      : Error("Parse", file + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + what),
        file_(std::move(file)), line_(line), column_(column) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  std::string file_;
  int line_;
  int column_;
};

} // namespace flownet
