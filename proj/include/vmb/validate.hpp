#pragma once

#include <string>
#include <vector>

#include "vmb/config.hpp"

namespace vmb {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the module invariant suites at the configured resolutions.  Collision
// checks use cfg.n_per_axis, mode/semigroup checks cfg.validate_n; the
// direction-robustness check runs at n=12 when the configured grid allows it.
std::vector<CheckResult> run_validation(const RunConfig& cfg);

}  // namespace vmb
