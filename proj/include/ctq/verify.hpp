#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctq {

struct CheckResult {
    std::string id;      // "1".."11"
    std::string name;
    bool pass = false;
    std::string detail;  // got-vs-expected diagnostics and informational notes
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    double elapsed_seconds = 0.0;

    int failures() const;
};

/// Runs the full verification suite: variance-vector, routing and error-matrix
/// reproduction, the three-node and two-node laws, the cross-engine oracle,
/// nullifier certification, the error-probability comparison, the weight
/// optimizer, the Gaussian invariants, and the runtime budget.
VerificationReport run_verification(std::uint64_t seed = 42);

/// One line per criterion: "PASS|FAIL  <id>  <name>   <detail>".
std::string verification_table(const VerificationReport& report);

std::string verification_to_json(const VerificationReport& report, int indent = 2);

} // namespace ctq
