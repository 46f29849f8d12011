#pragma once

#include <stdexcept>
#include <string>

namespace polylab {

/// Failure categories. The CLI maps each to a process exit code.
enum class ErrorKind {
  precondition,
  domain,           // log of a nonpositive argument
  model_violation,  // correction term makes the map ill-defined or non-monotone
  bracket,          // root bracket could not be established
  ambiguity,        // several shifts qualify within tolerance
  tie,              // order data undefined at working precision
  insufficient_data,
  reconstruction,
  precision,        // working precision too low to decide
  budget,           // search budget exhausted
  range,
  schema,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::domain: return "domain";
    case ErrorKind::model_violation: return "model-violation";
    case ErrorKind::bracket: return "bracket";
    case ErrorKind::ambiguity: return "ambiguity";
    case ErrorKind::tie: return "tie";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::reconstruction: return "reconstruction";
    case ErrorKind::precision: return "precision";
    case ErrorKind::budget: return "budget";
    case ErrorKind::range: return "range";
    case ErrorKind::schema: return "schema";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the Liouville construction when the configured mantissa cannot
/// resolve the next window; carries the estimated requirement.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double required_bits)
      : Error(ErrorKind::precision, what), required_bits_(required_bits) {}

  /// May far exceed any practical mantissa, hence a double.
  double required_bits() const noexcept { return required_bits_; }

 private:
  double required_bits_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace polylab
