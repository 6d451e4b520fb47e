#include "fluidq/errors.hpp"

namespace fluidq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_config: return "invalid_config";
    case ErrorKind::invalid_initial: return "invalid_initial";
    case ErrorKind::invalid_distribution: return "invalid_distribution";
    case ErrorKind::no_equilibrium: return "no_equilibrium";
    case ErrorKind::grid_mismatch: return "grid_mismatch";
    case ErrorKind::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace fluidq
