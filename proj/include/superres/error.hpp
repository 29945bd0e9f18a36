#pragma once

#include <stdexcept>
#include <string>

namespace superres {

/// Invalid input or violated precondition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that was well-posed on entry but broke down numerically
/// (singular dictionary, symmetry residue over tolerance, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace superres
