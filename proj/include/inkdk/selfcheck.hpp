#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inkdk {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct SelfcheckOptions {
    /// Relative error injected into analytic gradients; the gradient check
    /// must then fail.
    double gradient_fault = 0.0;
};

/// Signature identities, direction reconstruction, NLN monotonicity,
/// gradient check and HSP equivalences.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {});

/// One line per check plus a summary; returns true when all passed.
bool print_checks(const std::vector<CheckResult>& results, std::ostream& out);

} // namespace inkdk
