#pragma once
#include <stdexcept>
#include <string>

namespace photoiso {

// Bad input: invalid parameters, malformed config or data files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation failed to meet its accuracy or invariant requirements.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace photoiso

namespace photoiso {
// Argument outside the mathematical domain of a function (e.g. negative frequency).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
}  // namespace photoiso
