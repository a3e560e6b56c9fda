#pragma once

#include <stdexcept>
#include <string>

namespace rv2x {

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct quadrature_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rv2x
