#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bowl {

// Malformed user input: bad CSV, inconsistent dimensions, invalid parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown inside a sampler (non-PD precision, NaN state).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, long iteration = -1)
      : std::runtime_error(iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")"
                                          : what),
        iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace bowl
