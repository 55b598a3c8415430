#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "avf/calibration.hpp"

using namespace avf;

namespace {

struct Case {
    MaterialParams truth;
    ProgrammedState prog;
    double A = 0.36;
    std::vector<double> temps;
};

Case make_case() {
    Case s;
    s.truth = materials::l20();
    s.truth.w = 2.0;
    s.prog = program(s.truth, 0.40, 60.0, 20.0);
    for (double T = 20.0; T <= 70.0; T += 1.0) s.temps.push_back(T);
    return s;
}

MaterialParams perturbed(const Case& s, double dT, double dw, double dscale) {
    MaterialParams p = s.truth;
    p.T_sw *= 1 + dT;
    p.w *= 1 + dw;
    p.E_rubbery *= 1 + dscale;
    return p;
}

FitBounds wide_bounds() {
    FitBounds b;
    b.T_sw = {10.0, 80.0};
    b.w = {0.1, 10.0};
    b.scale = {0.0, 10.0};
    return b;
}

} // namespace

TEST(Residuals, SelfConsistentOffsetAndOrder) {
    const Case s = make_case();
    auto samples = synthesize_samples(s.truth, s.prog, s.A, s.temps);
    for (double r : residuals(s.truth, s.prog, s.A, samples)) EXPECT_LE(std::abs(r), 1e-12);

    samples[7].F += 0.1;
    const auto r = residuals(s.truth, s.prog, s.A, samples);
    EXPECT_NEAR(r[7], -0.1, 1e-12);

    auto shuffled = samples;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 5, shuffled.end());
    const auto rs = residuals(s.truth, s.prog, s.A, shuffled);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
        const auto it = std::find(samples.begin(), samples.end(), shuffled[i]);
        EXPECT_EQ(rs[i], r[static_cast<std::size_t>(it - samples.begin())]);
    }

    samples[0].T = 10.0;
    EXPECT_THROW(residuals(s.truth, s.prog, s.A, samples), DomainError);
    EXPECT_THROW(residuals(s.truth, s.prog, s.A, {}), PreconditionError);
}

TEST(FitMaterial, NoiselessRoundTrip) {
    const Case s = make_case();
    const auto samples = synthesize_samples(s.truth, s.prog, s.A, s.temps);
    const double scale = plateau_scale_of(s.truth, s.prog, s.A);
    for (double d : {0.2, -0.2}) {
        const MaterialParams init = perturbed(s, d, -d, d);
        const auto r = fit_material(samples, init, s.prog, s.A, wide_bounds());
        EXPECT_NEAR(r.params.T_sw, 38.1, 0.1);
        EXPECT_NEAR(r.params.w, 2.0, 0.05 * 2.0);
        EXPECT_NEAR(r.params.T_sw, 38.1, 0.005 * 38.1);
        EXPECT_NEAR(r.params.w, 2.0, 0.005 * 2.0);
        EXPECT_NEAR(r.plateau_scale, scale, 0.005 * scale);
        EXPECT_TRUE(r.converged);
        EXPECT_TRUE(r.identifiable);
        EXPECT_GE(r.rss, 0.0);
        EXPECT_NO_THROW(r.params.validate());
    }
}

TEST(FitMaterial, NoisyRoundTrip) {
    const Case s = make_case();
    const auto samples = synthesize_samples(s.truth, s.prog, s.A, s.temps, 0.01, 7);
    const auto r = fit_material(samples, perturbed(s, 0.2, 0.2, -0.2), s.prog, s.A, wide_bounds());
    EXPECT_NEAR(r.params.T_sw, 38.1, 0.5);
    EXPECT_NEAR(r.params.w, 2.0, 0.15 * 2.0);
}

TEST(FitMaterial, NeverWorseThanInitAndDeterministic) {
    const Case s = make_case();
    const auto samples = synthesize_samples(s.truth, s.prog, s.A, s.temps, 0.02, 3);
    const MaterialParams init = perturbed(s, -0.1, 0.3, 0.1);
    double rss0 = 0.0;
    for (double v : residuals(init, program(init, 0.40, 60.0, 20.0), s.A, samples)) rss0 += v * v;
    const auto a = fit_material(samples, init, s.prog, s.A, wide_bounds());
    const auto b = fit_material(samples, init, s.prog, s.A, wide_bounds());
    EXPECT_LE(a.rss, rss0);
    EXPECT_EQ(a.rss, b.rss);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_GE(a.params.w, 0.1);
    EXPECT_LE(a.params.w, 10.0);
    EXPECT_GE(a.plateau_scale, 0.0);
}

TEST(FitMaterial, FlatPlateauIsFlagged) {
    const Case s = make_case();
    std::vector<double> hot;
    for (double T = 75.0; T <= 90.0; T += 1.0) hot.push_back(T);
    const auto samples = synthesize_samples(s.truth, s.prog, s.A, hot);
    const auto r = fit_material(samples, perturbed(s, 0.1, 0.1, 0.1), s.prog, s.A, wide_bounds());
    const bool w_at_bound = r.params.w <= 0.1 + 1e-9 || r.params.w >= 10.0 - 1e-9;
    EXPECT_TRUE(!r.converged || w_at_bound);
    EXPECT_FALSE(r.identifiable);
}

TEST(FitMaterial, Preconditions) {
    const Case s = make_case();
    const auto samples = synthesize_samples(s.truth, s.prog, s.A, s.temps);
    FitBounds b = wide_bounds();
    b.T_sw = {40.0, 50.0};
    EXPECT_THROW(fit_material(samples, s.truth, s.prog, s.A, b), PreconditionError);
    const std::vector<ForceSample> few(samples.begin(), samples.begin() + 3);
    EXPECT_THROW(fit_material(few, s.truth, s.prog, s.A, wide_bounds()), PreconditionError);
}

TEST(TuneGains, FixedPointOfShippedDefaults) {
    const TuneTargets measured = evaluate_gains(GainSet{}, TuneTargets{}).achieved;
    EXPECT_FALSE(measured.l20_snap);
    EXPECT_TRUE(measured.sme_snap_required);
    EXPECT_EQ(tune_gains(measured), GainSet{});
}

TEST(TuneGains, ImpossibleSnapConstraint) {
    TuneTargets t;
    t.l20_snap = true;
    EXPECT_THROW(tune_gains(t), InfeasibleError);
}

TEST(TuneGains, SinglePointGrid) {
    TuneGrid g;
    g.points = 1;
    g.spans = {0.3};
    const GainSet c{5.0, 0.3, 180.0};
    EXPECT_EQ(tune_gains(TuneTargets{}, c, g), c);
}

TEST(TuneGains, ImprovesScoreOverStart) {
    const TuneTargets t = evaluate_gains(GainSet{}, TuneTargets{}).achieved;
    GainSet start;
    start.beta *= 1.05;
    TuneGrid g;
    g.spans = {0.05};
    const GainSet best = tune_gains(t, start, g);
    EXPECT_LT(evaluate_gains(best, t).score, evaluate_gains(start, t).score);
}
