#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tiada {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Finite-difference and invariant suites behind `tiada check`. Each suite is
/// self-contained and seeded, so the outcome is reproducible.
std::vector<CheckResult> run_checks(std::uint64_t seed = 12345);

CheckResult check_gradients(std::uint64_t seed, int points = 100);
CheckResult check_projections(std::uint64_t seed, int pairs = 10000);
CheckResult check_ratio_bound(std::uint64_t steps = 2000);
CheckResult check_reductions(std::uint64_t steps = 1000);
CheckResult check_moment_schemes(std::uint64_t seed);
CheckResult check_determinism(std::uint64_t seed);
CheckResult check_summaries(std::uint64_t seed);

}  // namespace tiada
