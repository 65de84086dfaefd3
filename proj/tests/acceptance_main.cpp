// Verification suite: one pass/fail line per criterion, nonzero exit on any
// failure. Long-running (minutes); run through ctest or directly.

#include <iostream>

#include "fracblow/acceptance.hpp"

int main(int argc, char** argv) {
    fracblow::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--quick") opts.quick = true;
    }
    auto results = fracblow::run_acceptance(opts, std::cout);
    int failures = 0;
    for (const auto& r : results)
        if (r.ran && !r.pass) ++failures;
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ")
              << (failures == 0 ? std::string() : std::to_string(failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
