#pragma once

#include <stdexcept>
#include <string>

namespace replicheck {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The data cannot support the requested analysis (too few levels, empty or
// unreplicated cells, zero residual variance).
class DesignError : public Error {
 public:
  using Error::Error;
};

// Data that passed structural checks but carries no information to test
// against, e.g. identical values within every cell.
class DegenerateDataError : public DesignError {
 public:
  using DesignError::DesignError;
};

// Input text that could not be turned into a dataset or summary table.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Summary tables whose degrees of freedom do not add up.
class ConsistencyError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Arguments outside a function's mathematical domain, or iterative
// algorithms that failed to reach their precision contract.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Invalid caller configuration (bad simulation parameters, too few
// permutations, unknown enum names).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Files that could not be opened for writing.
class IoError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Process exit codes used by the command-line tool.
namespace exit_code {
inline constexpr int success = 0;
inline constexpr int usage = 1;
inline constexpr int design = 2;
inline constexpr int parse = 3;
inline constexpr int numeric = 4;
}  // namespace exit_code

inline int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const DesignError*>(&e)) return exit_code::design;
  if (dynamic_cast<const ParseError*>(&e)) return exit_code::parse;
  if (dynamic_cast<const ConfigError*>(&e)) return exit_code::usage;
  if (dynamic_cast<const IoError*>(&e)) return exit_code::usage;
  if (dynamic_cast<const UnsupportedError*>(&e)) return exit_code::design;
  return exit_code::numeric;
}

}  // namespace replicheck
