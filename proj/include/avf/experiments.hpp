#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mechanics.hpp"
#include "solver.hpp"

namespace avf {

enum class SnapClass { Smooth, Snap, Failed };

inline const char* to_string(SnapClass c) {
    switch (c) {
    case SnapClass::Smooth: return "smooth";
    case SnapClass::Snap: return "snap";
    case SnapClass::Failed: return "failed";
    }
    return "failed";
}

struct MetricsReport {
    double closure_pct = 0.0;
    double reopening_pct = 0.0;
    double rom_pct = 0.0;
    SnapClass snap_class = SnapClass::Failed;
    std::optional<double> closure_temp;
    std::optional<double> reopening_temp;
};

namespace detail {
template <class Get>
std::pair<double, double> lobe_motion(const MotionTrace& tr, double x_open, Get x) {
    std::size_t imin = 0;
    for (std::size_t i = 1; i < tr.rows.size(); ++i)
        if (x(tr.rows[i]) < x(tr.rows[imin])) imin = i;
    const double xmin = x(tr.rows[imin]);
    double xback = xmin;
    for (std::size_t i = imin; i < tr.rows.size(); ++i) xback = std::max(xback, x(tr.rows[i]));
    const double closure = 100.0 * (x_open - xmin) / x_open;
    const double span = x_open - xmin;
    const double reopening = span > 0.0 ? 100.0 * (xback - xmin) / span : 0.0;
    return {closure, reopening};
}
} // namespace detail

inline MetricsReport compute_metrics(const MotionTrace& tr, const AvfAssembly& asm_) {
    if (tr.rows.empty()) throw EmptyTraceError("trace has no rows");
    const auto l = detail::lobe_motion(tr, asm_.x_open, [](const TraceRow& r) { return r.x_left_mm; });
    const auto r = detail::lobe_motion(tr, asm_.x_open, [](const TraceRow& r) { return r.x_right_mm; });
    MetricsReport m;
    m.closure_pct = 0.5 * (l.first + r.first);
    m.reopening_pct = 0.5 * (l.second + r.second);
    m.rom_pct = 0.5 * (m.closure_pct + m.reopening_pct);
    const EventReport ev = detect_events(tr, asm_);
    m.closure_temp = ev.closure_temp;
    m.reopening_temp = ev.reopening_temp;
    const bool snap = std::any_of(ev.snaps.begin(), ev.snaps.end(),
                                  [](const SnapEvent& e) { return e.kind == Event::SnapClose; });
    m.snap_class = !ev.closure_temp ? SnapClass::Failed : snap ? SnapClass::Snap : SnapClass::Smooth;
    return m;
}

// presets

inline const std::array<std::string, 5>& preset_names() {
    static const std::array<std::string, 5> names{"L20_mono", "SME25_mono", "bidir_single", "bidir_cross",
                                                  "bidir_diamond"};
    return names;
}

inline DemonstratorConfig preset_demonstrator(const std::string& name) {
    DemonstratorConfig c;
    if (name == "L20_mono") return c;
    if (name == "SME25_mono") {
        c.lobe_material = "SME25";
        return c;
    }
    if (name == "bidir_single") c.layout = LayoutKind::Single;
    else if (name == "bidir_cross") c.layout = LayoutKind::Cross;
    else if (name == "bidir_diamond") c.layout = LayoutKind::Diamond;
    else throw UnknownPresetError("unknown preset '" + name + "'");
    return c;
}

inline std::pair<AvfAssembly, ThermalProtocol> preset(const std::string& name) {
    return {build_assembly(preset_demonstrator(name)), ThermalProtocol{}};
}

// design sweep

enum class SweepOutcome { Fail, Close, SnapClose };

inline const char* to_string(SweepOutcome o) {
    switch (o) {
    case SweepOutcome::Fail: return "Fail";
    case SweepOutcome::Close: return "Close";
    case SweepOutcome::SnapClose: return "SnapClose";
    }
    return "Fail";
}

inline const char* glyph(SweepOutcome o) {
    switch (o) {
    case SweepOutcome::Fail: return "×";
    case SweepOutcome::Close: return "✓";
    case SweepOutcome::SnapClose: return "✓✓";
    }
    return "×";
}

struct SweepCell {
    double a = 0.0;
    double b = 0.0;
    std::string material;
    SweepOutcome outcome = SweepOutcome::Fail;
    bool operator==(const SweepCell&) const = default;
};

inline SweepOutcome classify(const MotionTrace& tr, const AvfAssembly& asm_) {
    const EventReport ev = detect_events(tr, asm_);
    if (!ev.closure_temp) return SweepOutcome::Fail;
    for (const auto& e : ev.snaps)
        if (e.kind == Event::SnapClose) return SweepOutcome::SnapClose;
    return SweepOutcome::Close;
}

// One mono-material ramp per (a, b) cell, row-major in lengths.
inline std::vector<SweepCell> design_sweep(const std::vector<double>& lengths, const std::vector<double>& thicknesses,
                                           const std::string& material, const ThermalProtocol& proto,
                                           const MaterialMap& mats = default_materials(),
                                           const SolverSettings& s = {}, unsigned jobs = 1,
                                           DemonstratorConfig base = {}) {
    if (lengths.empty() || thicknesses.empty()) throw PreconditionError("sweep grid must be nonempty");
    base.lobe_material = material;
    base.layout = LayoutKind::None;

    std::vector<SweepCell> cells;
    for (double a : lengths)
        for (double b : thicknesses) cells.push_back({a, b, material, SweepOutcome::Fail});

    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            try {
                DemonstratorConfig c = base;
                c.length_mm = cells[i].a;
                c.thickness_mm = cells[i].b;
                const AvfAssembly asm_ = build_assembly(c, mats);
                cells[i].outcome = classify(run_ramp(asm_, proto, s), asm_);
            } catch (const Error& e) {
                std::lock_guard lk(err_mu);
                if (!err) {
                    const std::string where = "cell a=" + std::to_string(cells[i].a) +
                                              " b=" + std::to_string(cells[i].b) + ": " + e.what();
                    try {
                        if (dynamic_cast<const SolverError*>(&e)) throw ConvergenceError(where);
                        throw PreconditionError(where);
                    } catch (...) {
                        err = std::current_exception();
                    }
                }
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return cells;
}

} // namespace avf
