// Runs the 13 acceptance criteria and prints one line per criterion.

#include <iostream>

#include "lanczos_opt/acceptance.hpp"

int main() {
    using namespace lanczos_opt;
    AcceptanceContext ctx;
    const auto results = run_checks(acceptance_checks(), "", ctx);
    std::size_t failed = 0;
    for (const auto& r : results) {
        std::cout << result_line(r) << '\n';
        if (r.passed) continue;
        ++failed;
        for (const auto& d : r.details) std::cout << "      " << d << '\n';
    }
    std::cout << (results.size() - failed) << " of " << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
