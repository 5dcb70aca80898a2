#pragma once

#include <string>
#include <vector>

namespace fraclab {

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifySummary {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
};

/// Runs the bundled module invariants. level: "fast" (1D, small grids) or
/// "full" (adds 2D and refinement sweeps).
VerifySummary run_verify(const std::string& level, unsigned long seed);

} // namespace fraclab
