#pragma once

// Oracle-backed self checks run by `alphatree verify`.

#include <cstdint>
#include <string>
#include <vector>

namespace alphatree {

enum class VerifyLevel { standard, deep };

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::standard;
  std::uint64_t seed = 1;
  /// Multiplies every q(a,b) used by the split-sum check by (1 + q_perturbation).
  /// Nonzero values exist to demonstrate that the check can fail.
  double q_perturbation = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

VerifyReport run_verification(const VerifyOptions& options = {});

}  // namespace alphatree
