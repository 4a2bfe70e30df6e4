// invariant_suite.hpp: seeded property checks across every module
//
// Each (invariant, dimension) cell draws its own generator from the master
// seed, so results do not depend on which cells run or in what order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qdyn {

struct SuiteOptions {
    std::uint64_t seed = 1;
    std::vector<std::size_t> dims = {2, 4, 8};
    /// Multiplies every tolerance.
    double tolerance_scale = 1.0;
    /// Negative control: replaces U rho U^dagger by M rho M^dagger / tr(...)
    /// with M non-unitary inside the entropy-invariance check.
    bool inject_nonunitary = false;
};

struct InvariantResult {
    std::string module;
    std::string name;
    std::size_t dim = 0;
    double measured = 0.0;   // worst residual over the cell's instances
    double tolerance = 0.0;
    bool passed = false;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<InvariantResult> results;

    bool passed() const;
};

/// Throws std::invalid_argument on an empty dims list, a dimension outside
/// [2, 64], or a non-positive tolerance scale.
SuiteReport run_invariant_suite(const SuiteOptions& options);

}  // namespace qdyn
