#pragma once
// Randomised metric properties shared by the unit tests and the acceptance suite.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace properties {

struct Outcome {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;

    bool passed() const { return cases > 0 && failures == 0; }
};

/// Tolerance for comparisons that are exact in real arithmetic.
inline constexpr double rel_tol = 1e-12;

std::vector<Outcome> run_metric_properties(std::uint64_t seed, std::size_t cases);

} // namespace properties
