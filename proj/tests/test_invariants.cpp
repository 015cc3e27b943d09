#include <gtest/gtest.h>

#include "lanczos_opt/acceptance.hpp"

using namespace lanczos_opt;

namespace {

AcceptanceContext& context() {
    static AcceptanceContext ctx;
    return ctx;
}

void expect_suite_passes(const std::string& id) {
    const auto results = run_checks(invariant_checks(), id, context());
    ASSERT_EQ(results.size(), 1u) << id;
    const CheckResult& r = results.front();
    std::string log;
    for (const auto& d : r.details) log += d + "\n";
    EXPECT_TRUE(r.passed) << log;
    EXPECT_FALSE(r.details.empty());
}

}  // namespace

TEST(Invariants, Linalg) { expect_suite_passes("inv.linalg"); }
TEST(Invariants, Krylov) { expect_suite_passes("inv.krylov"); }
TEST(Invariants, Stieltjes) { expect_suite_passes("inv.stieltjes"); }
TEST(Invariants, Bounds) { expect_suite_passes("inv.bounds"); }
TEST(Invariants, Approx) { expect_suite_passes("inv.approx"); }
TEST(Invariants, Harness) { expect_suite_passes("inv.cli"); }

TEST(EpsilonCheck, CatchesSignFlip) {
    const EpsilonFunction flipped = [](std::span<const double> b, std::span<const double> t, double s) {
        return -epsilon_closed_form(b, t, s);
    };
    const CheckResult bad = criterion_epsilon(context(), flipped);
    EXPECT_FALSE(bad.passed);
    bool named = false;
    for (const auto& d : bad.details) named = named || d.rfind("FAILED: epsilon cross-check", 0) == 0;
    EXPECT_TRUE(named);
    EXPECT_TRUE(criterion_epsilon(context()).passed);
}

TEST(EpsilonCheck, CatchesDroppedFactor) {
    const EpsilonFunction off = [](std::span<const double> b, std::span<const double> t, double s) {
        return 1.0000001 * epsilon_closed_form(b, t, s);
    };
    EXPECT_FALSE(criterion_epsilon(context(), off).passed);
}

TEST(Registry, IdsAndSelectors) {
    const auto acc = acceptance_checks();
    ASSERT_EQ(acc.size(), 13u);
    for (std::size_t i = 0; i < acc.size(); ++i) EXPECT_EQ(acc[i].id, std::to_string(i + 1));
    const auto one = run_checks(all_checks(), "7", context());
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.front().id, "7");
    EXPECT_TRUE(run_checks(all_checks(), "no such check", context()).empty());
}

TEST(Registry, ReportCarriesTimings) {
    const auto results = run_checks(all_checks(), "8", context());
    ASSERT_EQ(results.size(), 1u);
    EXPECT_GT(results.front().seconds, 0.0);
    const std::string line = result_line(results.front());
    EXPECT_EQ(line.rfind("PASS  [8] ", 0), 0u) << line;
    EXPECT_NE(line.find(" s)"), std::string::npos);
    const json j = results_json(results);
    EXPECT_EQ(j["total"], 1);
    EXPECT_EQ(j["failed"], 0);
    EXPECT_TRUE(j["checks"][0].contains("seconds"));
}

TEST(Registry, ExceptionsBecomeFailures) {
    const std::vector<Check> checks{{"x", "throws", [](AcceptanceContext&) -> CheckResult { throw std::runtime_error("boom"); }, false}};
    const auto r = run_checks(checks, "", context());
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r.front().passed);
    EXPECT_NE(r.front().details.front().find("boom"), std::string::npos);
}
