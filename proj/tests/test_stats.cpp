#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "avf/stats.hpp"

using namespace avf;

namespace {

// two-sided p from the Student t density by composite Simpson integration
double p_oracle(double t, double df) {
    auto pdf = [df](double x) {
        const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
        return c * std::pow(1 + x * x / df, -(df + 1) / 2);
    };
    const double a = 0.0, b = std::abs(t);
    const int n = 200000;
    const double h = (b - a) / n;
    double s = pdf(a) + pdf(b);
    for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
    const double inner = s * h / 3;  // P(0 < T < |t|)
    return 1.0 - 2.0 * inner;
}

} // namespace

TEST(Welch, HandExample) {
    const std::vector<double> g1{1, 2, 3}, g2{2, 3, 4};
    const auto r = welch_t_test(g1, g2);
    // means 2 and 3, both variances 1: t = -1 / sqrt(2/3), df = 4
    EXPECT_NEAR(r.t, -1.0 / std::sqrt(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(r.t, -1.2247, 1e-4);
    EXPECT_NEAR(r.df, 4.0, 1e-12);
    EXPECT_NEAR(r.p, p_oracle(r.t, r.df), 1e-8);
    EXPECT_NEAR(r.p, 0.2879, 1e-3);
}

TEST(Welch, IdenticalGroups) {
    const std::vector<double> g{1.5, 2.5, 4.0, 7.0};
    const auto r = welch_t_test(g, g);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
}

TEST(Welch, NearDegenerateSeparation) {
    const std::vector<double> g1{0, 0, 0, 0}, g2{10, 10, 10, 10.0001};
    const auto r = welch_t_test(g1, g2);
    EXPECT_LT(r.p, 1e-6);
    EXPECT_GE(r.p, 0.0);
}

TEST(Welch, Degenerate) {
    const std::vector<double> g{2, 2, 2};
    EXPECT_THROW(welch_t_test(g, g), DegenerateGroupError);
    const std::vector<double> h{3, 3, 3};
    const auto r = welch_t_test(g, h);
    EXPECT_EQ(r.p, 0.0);
    EXPECT_TRUE(std::isinf(r.t));
    EXPECT_THROW(welch_t_test(std::vector<double>{1}, h), PreconditionError);
}

TEST(Welch, SymmetryAndOracle) {
    const std::vector<std::vector<double>> groups{
        {4.1, 5.3, 6.0, 5.5, 4.9}, {7.2, 6.8, 9.1, 8.0}, {0.1, 0.4, 0.2, 0.3, 0.35, 0.15}, {5.0, 5.1}};
    for (const auto& a : groups)
        for (const auto& b : groups) {
            if (&a == &b) continue;
            const auto r1 = welch_t_test(a, b), r2 = welch_t_test(b, a);
            EXPECT_EQ(r1.t, -r2.t);
            EXPECT_NEAR(r1.p, r2.p, 1e-12);
            EXPECT_GE(r1.p, 0.0);
            EXPECT_LE(r1.p, 1.0);
            if (std::abs(r1.t) < 30) EXPECT_NEAR(r1.p, p_oracle(r1.t, r1.df), 1e-6);
        }
}

TEST(Summarize, SampleMoments) {
    const auto g = summarize(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}, "g");
    EXPECT_EQ(g.n, 8u);
    EXPECT_DOUBLE_EQ(g.mean, 5.0);
    EXPECT_NEAR(g.sd, std::sqrt(32.0 / 7.0), 1e-12);
    EXPECT_EQ(g.label, "g");
}
