#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lanczos_opt/figures.hpp"

using namespace lanczos_opt;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    // ctest runs each test in its own process, possibly concurrently.
    const auto d = std::filesystem::temp_directory_path() / ("lanczos_opt_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

/// One FigureOutput per recipe, generated once for the whole binary.
const FigureOutput& figure(const std::string& fig) {
    static std::map<std::string, FigureOutput> cache;
    auto it = cache.find(fig);
    if (it == cache.end()) it = cache.emplace(fig, make_figure(fig, scratch_dir(fig))).first;
    return it->second;
}

}  // namespace

TEST(Figures, EveryRecipeWritesSvgAndCsv) {
    for (const auto& fig : figure_names()) {
        const FigureOutput& out = figure(fig);
        ASSERT_TRUE(std::filesystem::exists(out.svg_file)) << fig;
        const std::string svg = slurp(out.svg_file);
        EXPECT_NE(svg.find("<svg"), std::string::npos) << fig;
        EXPECT_NE(svg.find("</svg>"), std::string::npos) << fig;
        EXPECT_NE(svg.find("<path d="), std::string::npos) << fig;
        EXPECT_EQ(out.csv_files.size(), out.results.size());
        for (const auto& csv : out.csv_files) {
            ASSERT_TRUE(std::filesystem::exists(csv)) << csv;
            EXPECT_NE(slurp(csv).find("# seed: 42\n"), std::string::npos) << csv;
        }
    }
}

TEST(Figures, Fig1KappaSquaredBoundIsExactMultiple) {
    for (const auto& r : figure("fig1").results) {
        const double factor = 1.0 + r.kappa * r.kappa;
        for (const auto& rec : r.records) {
            if (rec.floor_flag) continue;
            ASSERT_TRUE(rec.bound("kappa_squared")) << r.label << " m=" << rec.m;
            EXPECT_DOUBLE_EQ(*rec.bound("kappa_squared"), factor * rec.err_opt) << r.label << " m=" << rec.m;
        }
    }
}

TEST(Figures, Fig1StopsAtFloor) {
    for (const auto& r : figure("fig1").results) {
        ASSERT_FALSE(r.records.empty());
        for (std::size_t i = 0; i + 1 < r.records.size(); ++i) EXPECT_FALSE(r.records[i].floor_flag) << r.label;
    }
}

TEST(Figures, Fig4EffectiveInterval) {
    for (const auto& r : figure("fig4").results) {
        EXPECT_DOUBLE_EQ(r.effective_lo, r.label.find("A1") != std::string::npos ? 26.0 : build_matrix("A2").eigenvalues()[25]);
        EXPECT_DOUBLE_EQ(r.effective_hi, r.label.find("A1") != std::string::npos ? 75.0 : build_matrix("A2").eigenvalues()[74]);
        for (const auto& rec : r.records)
            if (rec.bound("beta") && rec.bound("beta_effective"))
                EXPECT_LE(*rec.bound("beta_effective"), *rec.bound("beta") * (1 + 1e-12));
    }
}

TEST(Figures, Fig2HeadTailRatioWithinQuarterToFour) {
    for (const auto& r : figure("fig2").results)
        for (const auto& rec : r.records)
            if (rec.component_ratio && !rec.floor_flag) {
                EXPECT_GE(*rec.component_ratio, 0.25) << r.label << " m=" << rec.m;
                EXPECT_LE(*rec.component_ratio, 4.0) << r.label << " m=" << rec.m;
            }
}

TEST(Figures, UnknownFigureRejected) {
    EXPECT_THROW(make_figure("fig9", scratch_dir("fig9")), ConfigError);
}

TEST(Plot, RendersLogAxesAndDashes) {
    Panel p{"demo", "m", "error", true, {}, {1.0}};
    p.series.push_back(Series{"a", {1, 2, 3}, {1.0, 1e-3, 1e-6}, false});
    p.series.push_back(Series{"b", {1, 2, 3}, {2.0, 2e-3, 0.0}, true});
    const std::string svg = render_svg({p});
    EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(svg.find("demo"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
}
