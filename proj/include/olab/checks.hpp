#pragma once

#include <string>
#include <vector>

namespace olab {

struct CheckInfo {
  std::string name;
  std::string anchor;      // tag of the identity or bound the check verifies
  std::string subcommand;  // which CLI subcommand runs it
};

const std::vector<CheckInfo>& check_catalog();

}  // namespace olab
