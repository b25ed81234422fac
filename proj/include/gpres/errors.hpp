#pragma once

#include <stdexcept>
#include <string>

namespace gpres {

// Malformed input files or JSON that does not match the state-file schema.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical solver gave up (iteration cap, inconsistent certificate).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Problem size exceeds a hard cap (LP variables, type-class counts).
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpres
