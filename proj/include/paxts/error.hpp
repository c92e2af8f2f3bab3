#pragma once

#include <stdexcept>
#include <string>

namespace paxts {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or insufficient input data (CSV problems, too-short splits).
class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter combination for an operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A perturbation that leaves the input unchanged (distance 0).
class DegeneratePerturbation : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Violations of the external forecaster wire protocol, and child process failures.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace paxts
