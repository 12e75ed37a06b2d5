#pragma once

#include <stdexcept>
#include <string>

namespace mccs {

/// File-system and parse failures, kept distinct from argument and numeric
/// errors so the CLI can map them to their own exit code.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mccs
