#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tabooscope/stats.hpp"

using namespace tabooscope::stats;

namespace {

std::vector<double> random_sample(std::mt19937_64& rng, std::size_t n, bool ties) {
    std::vector<double> v(n);
    std::normal_distribution<double> z;
    for (auto& x : v) x = ties ? static_cast<double>(rng() % 5) : z(rng);
    return v;
}

double gradient_norm(const Matrix& x, const std::vector<double>& y, const std::vector<double>& beta) {
    std::vector<double> g(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double eta = 0;
        for (std::size_t j = 0; j < x.cols; ++j) eta += x(i, j) * beta[j];
        double r = y[i] - logistic(eta);
        for (std::size_t j = 0; j < x.cols; ++j) g[j] += x(i, j) * r;
    }
    double s = 0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST(MannWhitney, Examples) {
    auto same = mann_whitney_u({1, 2, 3}, {1, 2, 3});
    EXPECT_DOUBLE_EQ(same.statistic, 4.5);
    EXPECT_NEAR(same.p_value, 1.0, 1e-12);
    auto apart = mann_whitney_u({1, 2}, {3, 4});
    EXPECT_DOUBLE_EQ(apart.statistic, 0.0);
    EXPECT_NEAR(apart.p_value, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(apart.direction, -1);
}

TEST(MannWhitney, ConstantPooledData) {
    auto r = mann_whitney_u({2, 2, 2}, {2, 2});
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_FALSE(r.notes.empty());
    EXPECT_THROW(mann_whitney_u({}, {1}), std::invalid_argument);
}

TEST(MannWhitney, ExactMatchesEnumeration) {
    std::mt19937_64 rng(41);
    for (std::size_t n1 = 1; n1 <= 8; ++n1)
        for (std::size_t n2 = 1; n2 <= 8; ++n2)
            for (bool ties : {false, true}) {
                auto a = random_sample(rng, n1, ties), b = random_sample(rng, n2, ties);
                auto r = mann_whitney_u(a, b);
                ASSERT_DOUBLE_EQ(r.statistic, oracle::mwu_u(a, b));
                if (r.notes == "exact") {
                    ASSERT_NEAR(r.p_value, oracle::mwu_exact_p(a, b), 1e-12) << n1 << "x" << n2;
                }
            }
}

TEST(MannWhitney, Complementarity) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_sample(rng, 1 + rng() % 30, trial % 2);
        auto b = random_sample(rng, 1 + rng() % 30, trial % 2);
        EXPECT_EQ(mann_whitney_u(a, b).statistic + mann_whitney_u(b, a).statistic,
                  static_cast<double>(a.size() * b.size()));
        EXPECT_DOUBLE_EQ(mann_whitney_u(a, b).p_value, mann_whitney_u(b, a).p_value);
    }
}

TEST(MannWhitney, ExactAndApproximateAgreeWithoutTies) {
    MwuOptions approx;
    approx.method = MwuMethod::asymptotic;
    MwuOptions exact;
    exact.method = MwuMethod::exact;
    std::vector<double> a, b;
    for (std::size_t n1 = 5; n1 <= 8; ++n1)
        for (std::size_t n2 = 5; n2 <= 8; ++n2)
            for (std::size_t u = 0; u <= n1 * n2; ++u) {
                oracle::gen::samples_with_u(n1, n2, u, a, b);
                ASSERT_DOUBLE_EQ(oracle::mwu_u(a, b), static_cast<double>(u));
                double pe = mann_whitney_u(a, b, exact).p_value;
                double pa = mann_whitney_u(a, b, approx).p_value;
                EXPECT_NEAR(pe, pa, 0.02) << n1 << "x" << n2 << " U=" << u;
            }
}

TEST(MannWhitney, LargeSamplesUseApproximation) {
    std::mt19937_64 rng(47);
    auto a = random_sample(rng, 40, false), b = random_sample(rng, 50, false);
    auto r = mann_whitney_u(a, b);
    EXPECT_NE(r.notes, "exact");
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
}

TEST(ChiSquared, Examples) {
    auto indep = chi_squared_2x2({{{10, 10}, {10, 10}}});
    EXPECT_DOUBLE_EQ(indep.statistic, 0.0);
    EXPECT_DOUBLE_EQ(indep.p_value, 1.0);
    EXPECT_NEAR(chi_squared_2x2({{{10, 0}, {0, 10}}}, false).statistic, 20.0, 1e-6);
    EXPECT_NEAR(chi_squared_2x2({{{10, 0}, {0, 10}}}, true).statistic, 16.2, 1e-6);
    EXPECT_THROW(chi_squared_2x2({{{0, 0}, {3, 4}}}), std::invalid_argument);
    EXPECT_THROW(chi_squared_2x2({{{1, 0}, {3, 0}}}), std::invalid_argument);
}

TEST(ChiSquared, TransposeInvariant) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        Table2x2 t{{{double(1 + rng() % 40), double(1 + rng() % 40)}, {double(1 + rng() % 40), double(1 + rng() % 40)}}};
        Table2x2 tt{{{t[0][0], t[1][0]}, {t[0][1], t[1][1]}}};
        for (bool y : {false, true}) {
            EXPECT_NEAR(chi_squared_2x2(t, y).statistic, chi_squared_2x2(tt, y).statistic, 1e-9);
            EXPECT_GE(chi_squared_2x2(t, y).p_value, 0.0);
            EXPECT_LE(chi_squared_2x2(t, y).p_value, 1.0);
        }
    }
}

TEST(ChiSquared, CrossTabulate) {
    auto t = cross_tabulate({true, true, false, false, true}, {true, false, false, false, true});
    EXPECT_EQ(t[0][0], 2);
    EXPECT_EQ(t[0][1], 1);
    EXPECT_EQ(t[1][1], 2);
}

TEST(Spearman, Examples) {
    EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3, 4}, {1, 8, 27, 64}).statistic, 1.0);
    EXPECT_NEAR(spearman_rho({1, 2, 3}, {3, 1, 2}).statistic, -0.5, 1e-12);
    EXPECT_THROW(spearman_rho({1, 1, 1}, {1, 2, 3}), StatsError);
    EXPECT_THROW(spearman_rho({1, 2}, {1, 2}), std::invalid_argument);
}

TEST(Ols, ExactLine) {
    auto x = design_with_intercept({{1, 2, 3, 4, 5}});
    auto f = ols_fit(x, {2, 4, 6, 8, 10});
    EXPECT_NEAR(f.estimates[0], 0.0, 1e-12);
    EXPECT_NEAR(f.estimates[1], 2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Ols, MatchesOracleAndResidualsOrthogonal) {
    std::mt19937_64 rng(59);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> rows(30, std::vector<double>(3, 1.0));
        std::vector<double> y(30);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i][1] = z(rng);
            rows[i][2] = 10 * z(rng);
            y[i] = 1.0 + 2.0 * rows[i][1] - 0.1 * rows[i][2] + z(rng);
        }
        auto x = Matrix::from_rows(rows);
        auto f = ols_fit(x, y, {"(Intercept)", "a", "b"});
        auto ref = oracle::least_squares(rows, y);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_NEAR(f.estimates[j], ref[j], 1e-8);
            EXPECT_LE(f.ci_lower[j], f.estimates[j]);
            EXPECT_GE(f.ci_upper[j], f.estimates[j]);
        }
        for (std::size_t j = 0; j < 3; ++j) {
            double dot = 0, scale = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                double r = y[i];
                for (std::size_t k = 0; k < 3; ++k) r -= rows[i][k] * f.estimates[k];
                dot += r * rows[i][j];
                scale += std::fabs(y[i] * rows[i][j]);
            }
            EXPECT_LT(std::fabs(dot), 1e-8 * std::max(1.0, scale));
        }
    }
}

TEST(Ols, RankDeficiencyNamesColumns) {
    auto x = design_with_intercept({{1, 2, 3, 4}, {2, 4, 6, 8}});
    try {
        ols_fit(x, {1, 2, 3, 5}, {"(Intercept)", "taboo", "taboo twice"});
        FAIL() << "expected StatsError";
    } catch (const StatsError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("taboo twice"), std::string::npos) << msg;
        EXPECT_NE(msg.find("'taboo'"), std::string::npos) << msg;
    }
}

TEST(Logistic, BalancedIntercept) {
    Matrix x(2, 1, 1.0);
    auto f = logistic_fit(x, {0, 1});
    EXPECT_NEAR(f.estimates[0], 0.0, 1e-12);
}

TEST(Logistic, MatchesNewtonOracle) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        oracle::gen::logistic_data(seed, 50, 2, rows, y);
        auto x = Matrix::from_rows(rows);
        auto f = logistic_fit(x, y);
        auto ref = oracle::logistic_newton(rows, y);
        for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(f.estimates[j], ref[j], 1e-6) << "seed " << seed;
        EXPECT_LT(gradient_norm(x, y, f.estimates), 1e-6);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            EXPECT_LE(f.ci_lower[j], f.estimates[j]);
            EXPECT_GE(f.ci_upper[j], f.estimates[j]);
        }
        EXPECT_LT(f.log_likelihood, 0.0);
    }
}

TEST(Logistic, SeparationIsAnError) {
    auto x = design_with_intercept({{1, 2, 3, 4, 5, 6}});
    EXPECT_THROW(logistic_fit(x, {0, 0, 0, 1, 1, 1}), StatsError);
    EXPECT_THROW(logistic_fit(x, {1, 1, 1, 1, 1, 1}), std::invalid_argument);
}

TEST(Purity, SameInputSameOutput) {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    oracle::gen::logistic_data(99, 80, 3, rows, y);
    auto x = Matrix::from_rows(rows);
    EXPECT_EQ(logistic_fit(x, y).estimates, logistic_fit(x, y).estimates);
    EXPECT_EQ(ols_fit(x, y).estimates, ols_fit(x, y).estimates);
}
