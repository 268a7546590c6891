#pragma once

#include <string>

namespace nodalforge::cli {

struct VerifyOptions {
    unsigned long long seed = 0;
    int cases = -1;  // -1: the suite's default
};

// Runs pointwise, blueprint, planar, blocks, harmonics or all. Returns the JSON report;
// passed is false when any check of any selected suite fails.
std::string run_verify(const std::string& suite, const VerifyOptions& opt, bool& passed);

}  // namespace nodalforge::cli
