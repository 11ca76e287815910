#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace vmflow {

struct CriterionResult {
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Criterion {
    std::string name;
    std::function<CriterionResult()> run;
};

/// The acceptance suite: every shipped guarantee as a runnable check with
/// its tolerance pinned in code.
const std::vector<Criterion>& acceptance_criteria();

/// Runs the criteria whose names contain `filter` (all when empty),
/// printing one pass/fail line per criterion. When forceFail is set a
/// synthetic always-failing criterion is appended (smoke test for the
/// reporting path). Returns the number of failures.
int run_acceptance(std::ostream& os, const std::string& filter = "",
                   bool forceFail = false);

} // namespace vmflow
