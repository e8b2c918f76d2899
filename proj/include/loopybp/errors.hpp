#pragma once

#include <stdexcept>
#include <string>

namespace loopybp {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model construction / parsing.
struct NonPositiveEntry : Error {
  using Error::Error;
};
struct ScopeMismatch : Error {
  using Error::Error;
};
struct UnknownVariable : Error {
  using Error::Error;
};
struct InvalidModel : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};

// Metric / table operations.
struct ShapeMismatch : Error {
  using Error::Error;
};
struct StructureMismatch : Error {
  using Error::Error;
};

// Exact inference.
struct TooLarge : Error {
  using Error::Error;
};
struct WidthTooLarge : Error {
  using Error::Error;
};
struct MissingVariable : Error {
  using Error::Error;
};

// Experiments.
struct EmptyInput : Error {
  using Error::Error;
};
struct DidNotConverge : Error {
  using Error::Error;
};

}  // namespace loopybp
