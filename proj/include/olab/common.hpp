#pragma once

#include <stdexcept>
#include <string>

namespace olab {

// Error kinds used across the library. The CLI maps them to exit codes.
struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numerical_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration/chain budgets exceeded; caller should switch mode or shrink n.
struct resource_limit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct not_replica_symmetric : std::runtime_error {
  int rep_a = -1, rep_b = -1;
  not_replica_symmetric(const std::string& msg, int a, int b)
      : std::runtime_error(msg), rep_a(a), rep_b(b) {}
};

struct inconsistent_constants : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct not_psd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace olab
