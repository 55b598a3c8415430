#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "avf/experiments.hpp"

using namespace avf;

namespace {

MotionTrace trace_of(const std::vector<double>& rel, double x0) {
    MotionTrace tr;
    for (std::size_t i = 0; i < rel.size(); ++i)
        tr.rows.push_back({i * 60.0, 20.0 + i, 0, 0, rel[i] * x0, rel[i] * x0, Event::None});
    return tr;
}

} // namespace

TEST(ComputeMetrics, FullCycle) {
    const AvfAssembly a = build_assembly(preset_demonstrator("L20_mono"));
    std::vector<double> rel;
    for (int i = 0; i <= 20; ++i) rel.push_back(1.0 - i / 20.0);
    for (int i = 1; i <= 20; ++i) rel.push_back(i / 20.0);
    const auto m = compute_metrics(trace_of(rel, a.x_open), a);
    EXPECT_DOUBLE_EQ(m.closure_pct, 100.0);
    EXPECT_DOUBLE_EQ(m.reopening_pct, 100.0);
    EXPECT_DOUBLE_EQ(m.rom_pct, 100.0);
    EXPECT_EQ(m.snap_class, SnapClass::Smooth);
}

TEST(ComputeMetrics, PartialCycleArithmetic) {
    const AvfAssembly a = build_assembly(preset_demonstrator("L20_mono"));
    // closure 80 %, then back by 60 % of the closed span
    const double xmin = 0.2, back = xmin + 0.6 * (1.0 - xmin);
    const auto m = compute_metrics(trace_of({1.0, 0.6, xmin, 0.5, back}, a.x_open), a);
    EXPECT_NEAR(m.closure_pct, 80.0, 1e-9);
    EXPECT_NEAR(m.reopening_pct, 60.0, 1e-9);
    EXPECT_NEAR(m.rom_pct, 70.0, 1e-9);
    EXPECT_EQ(m.snap_class, SnapClass::Failed);
}

TEST(ComputeMetrics, MonotoneNeverClosing) {
    const AvfAssembly a = build_assembly(preset_demonstrator("L20_mono"));
    const auto m = compute_metrics(trace_of({1.0, 0.9, 0.8, 0.7}, a.x_open), a);
    EXPECT_LT(m.closure_pct, 100.0);
    EXPECT_EQ(m.reopening_pct, 0.0);
    EXPECT_EQ(m.snap_class, SnapClass::Failed);
    EXPECT_THROW(compute_metrics(MotionTrace{}, a), EmptyTraceError);
}

TEST(ComputeMetrics, PresetReports) {
    std::map<std::string, MetricsReport> r;
    for (const auto& name : preset_names()) {
        const auto [a, p] = preset(name);
        const auto m = compute_metrics(run_ramp(a, p), a);
        EXPECT_NEAR(m.rom_pct, 0.5 * (m.closure_pct + m.reopening_pct), 1e-9);
        for (double v : {m.closure_pct, m.reopening_pct, m.rom_pct}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 101.0);
        }
        r[name] = m;
    }
    EXPECT_EQ(r["L20_mono"].snap_class, SnapClass::Smooth);
    EXPECT_EQ(r["SME25_mono"].snap_class, SnapClass::Snap);
    for (const char* n : {"bidir_single", "bidir_cross", "bidir_diamond"}) {
        EXPECT_LT(r[n].closure_pct, 100.0) << n;
        EXPECT_LT(r[n].reopening_pct, 100.0) << n;
    }
    EXPECT_GT(r["bidir_diamond"].reopening_pct, r["bidir_cross"].reopening_pct);
    EXPECT_GT(r["bidir_diamond"].reopening_pct, r["bidir_single"].reopening_pct);
    const double lo = std::min({r["bidir_single"].rom_pct, r["bidir_cross"].rom_pct, r["bidir_diamond"].rom_pct});
    const double hi = std::max({r["bidir_single"].rom_pct, r["bidir_cross"].rom_pct, r["bidir_diamond"].rom_pct});
    EXPECT_LT(hi - lo, 10.0);
}

TEST(Presets, Expansion) {
    const auto [d, p] = preset("bidir_diamond");
    EXPECT_EQ(d.strands.size(), 4u);
    EXPECT_EQ(d.layout, LayoutKind::Diamond);
    EXPECT_DOUBLE_EQ(diamond_aspect, 0.5);
    EXPECT_EQ(d.left.spec.material.name, "L20");
    EXPECT_EQ(d.strands[0].material.name, "SME25");
    EXPECT_DOUBLE_EQ(d.strands[0].programmed.eps_prog, 0.40);
    EXPECT_EQ(p, ThermalProtocol{});
    EXPECT_TRUE(preset("L20_mono").first.strands.empty());
    EXPECT_EQ(preset("SME25_mono").first.left.spec.material.name, "SME25");
    EXPECT_DOUBLE_EQ(preset("SME25_mono").first.left.spec.a, 60.0);
    EXPECT_DOUBLE_EQ(preset("SME25_mono").first.left.spec.b, 2.0);
    EXPECT_THROW(preset("foo"), UnknownPresetError);
}

TEST(DesignSweep, ReferenceCells) {
    const ThermalProtocol p;
    EXPECT_EQ(design_sweep({60}, {2}, "SME25", p)[0].outcome, SweepOutcome::SnapClose);
    EXPECT_EQ(design_sweep({60}, {2}, "L20", p)[0].outcome, SweepOutcome::Close);
    EXPECT_EQ(design_sweep({20}, {1}, "L20", p)[0].outcome, SweepOutcome::Fail);
    EXPECT_THROW(design_sweep({}, {1}, "L20", p), PreconditionError);
}

TEST(DesignSweep, OrderParallelismAndMonotonicity) {
    const std::vector<double> as{20, 30, 40, 50, 60}, bs{1, 2};
    const auto serial = design_sweep(as, bs, "L20", ThermalProtocol{});
    const auto parallel = design_sweep(as, bs, "L20", ThermalProtocol{}, default_materials(), {}, 4);
    EXPECT_EQ(serial, parallel);
    ASSERT_EQ(serial.size(), 10u);
    EXPECT_EQ(serial[0].a, 20.0);
    EXPECT_EQ(serial[1].b, 2.0);
    for (const auto& c : serial)
        for (const auto& d : serial)
            if (c.b == d.b && d.a >= c.a && c.outcome != SweepOutcome::Fail) {
                EXPECT_NE(d.outcome, SweepOutcome::Fail) << c.a << " " << d.a << " b=" << c.b;
            }
}

TEST(DesignSweep, UnknownMaterial) {
    EXPECT_THROW(design_sweep({60}, {2}, "PLA", ThermalProtocol{}), PreconditionError);
}

TEST(Glyphs, FigureConvention) {
    EXPECT_STREQ(glyph(SweepOutcome::Fail), "×");
    EXPECT_STREQ(glyph(SweepOutcome::Close), "✓");
    EXPECT_STREQ(glyph(SweepOutcome::SnapClose), "✓✓");
}
