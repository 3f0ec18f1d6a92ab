#pragma once

#include <stdexcept>
#include <string>

namespace l1path {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
public:
  using Error::Error;
};

// A message is stored in the wrong form for the requested rule.
class FormError : public Error {
public:
  using Error::Error;
};

// A branch the algorithms never take by design, e.g. fusing two
// nondegenerate Gaussians at a cost edge.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

// A required inverse does not exist (or is numerically zero).
class SingularError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

// Parametric arithmetic produced a power of sigma^2 outside {-1, 0, 1}.
class DegreeError : public Error {
public:
  using Error::Error;
};

class PathError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

} // namespace l1path
