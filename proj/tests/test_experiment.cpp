#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lanczos_opt/experiment.hpp"

using namespace lanczos_opt;

namespace {

ExperimentConfig config(json matrix, json function, std::size_t m_max = 10) {
    ExperimentConfig c;
    c.matrix = std::move(matrix);
    c.function = std::move(function);
    c.m_max = m_max;
    return c;
}

}  // namespace

TEST(BuildMatrix, TestMatrices) {
    const SpectralMatrix a1 = build_matrix("A1");
    EXPECT_EQ(a1.size(), 100u);
    EXPECT_DOUBLE_EQ(a1.condition_number(), 100.0);
    const SpectralMatrix a2 = build_matrix("A2");
    EXPECT_DOUBLE_EQ(a2.lambda_min(), 1.0);
    EXPECT_NEAR(a2.lambda_max(), 100.0, 1e-12);
    for (std::size_t i = 1; i < 100; ++i) EXPECT_GT(a2.eigenvalues()[i], a2.eigenvalues()[i - 1]);
    EXPECT_NEAR(build_matrix("A3").condition_number(), 100.0, 1e-12);
    EXPECT_NEAR(build_matrix("A4").condition_number(), 100.0, 1e-12);
    const SpectralMatrix c = build_matrix(json{{"type", "custom"}, {"n", 5}, {"spacing", "geometric"}, {"lo", 1.0}, {"hi", 16.0}});
    EXPECT_NEAR(c.eigenvalues()[2], 4.0, 1e-14);
}

TEST(BuildMatrix, ShiftedLogProblem) {
    const Problem p = build_problem(config("A3", "log_shifted"));
    EXPECT_NEAR(p.matrix.lambda_min(), 0.1, 1e-14);
    EXPECT_NEAR(p.matrix.condition_number(), 1090.0, 1e-9);
    EXPECT_THROW(build_problem(config("A1", "log_shifted")), ConfigError);
}

TEST(BuildVector, UnitNormAndSupport) {
    const Vector b = build_vector(json{{"type", "gaussian"}, {"seed", 42}}, 100);
    EXPECT_NEAR(norm2(b), 1.0, 1e-14);
    const Vector s = build_vector(json{{"type", "gaussian_supported"}, {"seed", 42}, {"lo", 26}, {"hi", 75}}, 100);
    EXPECT_NEAR(norm2(s), 1.0, 1e-14);
    for (std::size_t i = 0; i < 100; ++i) {
        if (i < 25 || i >= 75) EXPECT_EQ(s[i], 0.0) << i;
        else EXPECT_NE(s[i], 0.0) << i;
    }
    EXPECT_THROW(build_vector(json{{"type", "gaussian_supported"}, {"seed", 1}, {"lo", 50}, {"hi", 40}}, 100), ConfigError);
}

TEST(Rng, SeededNormalsAreFrozen) {
    // Independent Python mt19937_64 with the same Box-Muller pairing.
    NormalStream rng(42);
    const double expected[] = {-1.0771745442782885, -1.2860634502166481, 1.0945198485006107,
                               1.2616856516484893,  1.7947316657951717,  1.2044003699942827};
    for (double e : expected) EXPECT_DOUBLE_EQ(rng.next(), e);
}

TEST(Rng, EngineIsStandardMt64) {
    std::mt19937_64 e(5489);
    e.discard(9999);
    EXPECT_EQ(e(), 9981545732273789042ULL);
    NormalStream a(7);
    NormalStream b(7);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    NormalStream u(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
    }
}

TEST(Config, RejectsUnknownFields) {
    EXPECT_THROW(ExperimentConfig::from_json(json{{"matrx", "A1"}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(json{{"bounds", {"beta", "nonsense"}}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(json{{"m_max", "ten"}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(json::array()), ConfigError);
    EXPECT_THROW(build_matrix("A9"), ConfigError);
    EXPECT_THROW(build_function("exp"), ConfigError);
    EXPECT_THROW(build_function(json{{"type", "inv_power"}, {"alpha", 1.5}}), ConfigError);
}

TEST(Config, RoundTrip) {
    ExperimentConfig c = config("A2", "sqrt", 17);
    c.bounds = {"beta", "fov"};
    c.breakdown_tol = 1e-9;
    const ExperimentConfig d = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(d.to_json(), c.to_json());
}

TEST(Config, EmptySupportRejected) {
    ExperimentConfig c = config("A1", "inv_sqrt");
    const auto path = std::filesystem::temp_directory_path() / "lanczos_opt_zero_b.txt";
    {
        std::ofstream out(path);
        for (int i = 0; i < 100; ++i) out << "0\n";
    }
    c.b = json{{"type", "file"}, {"path", path.string()}};
    EXPECT_THROW(build_problem(c), ConfigError);
    c.b = json{{"type", "file"}, {"path", "/nonexistent/b.txt"}};
    EXPECT_THROW(build_problem(c), ConfigError);
    std::filesystem::remove(path);
}

TEST(RunProblem, Deterministic) {
    ExperimentConfig c = config("A1", "inv_sqrt", 12);
    c.bounds = {"beta", "kappa_squared", "split", "delta0"};
    const std::string x = csv_string(run_experiment(c), c.to_json(), 42);
    const std::string y = csv_string(run_experiment(c), c.to_json(), 42);
    EXPECT_EQ(x, y);
}

TEST(RunProblem, KappaSquaredIsExactMultiple) {
    ExperimentConfig c = config("A1", "sqrt", 15);
    const ExperimentResult r = run_experiment(c);
    ASSERT_EQ(r.records.size(), 15u);
    for (const auto& rec : r.records) {
        ASSERT_TRUE(rec.bound("kappa_squared"));
        EXPECT_DOUBLE_EQ(*rec.bound("kappa_squared"), 10001.0 * rec.err_opt);
        EXPECT_LE(rec.err_opt, rec.err_lan * (1 + 1e-12));
    }
}

TEST(RunProblem, SingleEigenvectorTerminatesAtOne) {
    Problem p{"e7", build_matrix("A1"), build_function("inv_sqrt"), Vector(100, 0.0), std::nullopt};
    p.b[6] = 1.0;
    RunOptions o;
    const ExperimentResult r = run_problem(p, o);
    EXPECT_EQ(r.invariance_index, 1u);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].err_lan, 0.0);
    EXPECT_EQ(r.records[0].err_opt, 0.0);
    EXPECT_EQ(r.records[0].diagnostics.beta_factor, 1.0);
}

TEST(RunProblem, IncompatibleBoundsRejected) {
    ExperimentConfig c = config("A1", "inv_sqrt");
    c.bounds = {"cg"};
    EXPECT_THROW(run_experiment(c), ConfigError);
    c = config("A1", "log1p_over_z");
    c.bounds = {"spectrum"};
    EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(Csv, HeaderAndSchema) {
    ExperimentConfig c = config("A1", "inv_sqrt", 5);
    c.bounds = {"beta", "kappa_squared", "split"};
    const ExperimentResult r = run_experiment(c);
    const std::string s = csv_string(r, c.to_json(), 42);
    EXPECT_NE(s.find("# seed: 42\n"), std::string::npos);
    EXPECT_NE(s.find("# config: "), std::string::npos);
    EXPECT_NE(s.find("# kappa: 100\n"), std::string::npos);
    EXPECT_NE(s.find("\nm,beta_next,err_lan,err_opt,ratio_lan_opt,head_norm,tail_norm,component_ratio,"
                     "bound_beta,factor_beta,bound_kappa_squared,bound_split,floor_flag\n"),
              std::string::npos);
    std::istringstream in(s);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'm') {
            ++rows;
            EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
        }
    EXPECT_EQ(rows, 5u);
}

TEST(Csv, FormatDoubleRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567})
        EXPECT_EQ(std::stod(format_double(x)), x);
}
