#ifndef FRACBLOW_ACCEPTANCE_HPP
#define FRACBLOW_ACCEPTANCE_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fracblow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool ran = false;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    bool quick = false;        // skip the long solver criteria (reported as skipped)
    std::uint64_t seed = 42;   // sample-point seed
};

// Runs the verification suite, printing one [PASS]/[FAIL]/[SKIP] line per
// criterion to `log` as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log);

bool acceptance_passed(const std::vector<CriterionResult>& results);

} // namespace fracblow

#endif
