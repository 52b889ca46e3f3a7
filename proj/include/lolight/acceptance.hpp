#pragma once

#include <string>
#include <vector>

namespace lolight::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs the twelve acceptance criteria against the bundled corpus directory.
std::vector<CriterionResult> run_all(const std::string& corpus_dir);

// Convenience: print one pass/fail line per criterion; returns the number of
// failures.
int report(const std::vector<CriterionResult>& results);

} // namespace lolight::acceptance
