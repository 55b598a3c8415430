#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mechanics.hpp"

namespace avf {

struct ThermalProtocol {
    double T_start = 20.0;   // degC
    double T_end = 70.0;     // degC
    double rate = 1.0;       // degC / min
    double dT_step = 0.05;   // degC

    bool operator==(const ThermalProtocol&) const = default;

    void validate(const std::string& path = "protocol") const {
        if (!(T_end > T_start)) throw ValidationError(path + ".T_end_C", "must exceed T_start_C");
        if (!(rate > 0.0)) throw ValidationError(path + ".rate_C_per_min", "must be positive");
        if (!(dT_step > 0.0 && dT_step <= 1.0)) throw ValidationError(path + ".dT_step_C", "must lie in (0, 1]");
    }

    std::size_t steps() const {
        return static_cast<std::size_t>(std::floor((T_end - T_start) / dT_step + 1e-9)) + 1;
    }
    double temperature(std::size_t i) const { return T_start + static_cast<double>(i) * dT_step; }
    double time_of(double T) const { return (T - T_start) / rate * 60.0; }
};

struct SolverSettings {
    double grad_tol = 1e-10;
    int max_iter = 100;
    double q_scan_min = -1.5;
    double q_scan_max = 1.5;
    int q_scan_points = 2001;
    double snap_window_s = 0.04;
    double snap_fraction = 0.3;

    bool operator==(const SolverSettings&) const = default;

    void validate(const std::string& path = "solver") const {
        if (!(grad_tol > 0.0)) throw ValidationError(path + ".grad_tol", "must be positive");
        if (!(max_iter > 0)) throw ValidationError(path + ".max_iter", "must be positive");
        if (!(q_scan_max > q_scan_min)) throw ValidationError(path + ".q_scan_max", "must exceed q_scan_min");
        if (!(q_scan_points >= 3)) throw ValidationError(path + ".q_scan_points", "must be at least 3");
        if (!(snap_window_s > 0.0)) throw ValidationError(path + ".snap_window_s", "must be positive");
        if (!(snap_fraction > 0.0)) throw ValidationError(path + ".snap_fraction", "must be positive");
    }
};

// tip threshold for closure, reopening and motion onset, as a fraction of x_open
inline constexpr double event_fraction = 0.05;

enum class Event { None, SnapClose, SnapOpen };

inline const char* to_string(Event e) {
    switch (e) {
    case Event::None: return "none";
    case Event::SnapClose: return "snap_close";
    case Event::SnapOpen: return "snap_open";
    }
    return "none";
}

struct TraceRow {
    double time_s = 0.0;
    double temp_C = 0.0;
    double q_left = -1.0;
    double q_right = -1.0;
    double x_left_mm = 0.0;
    double x_right_mm = 0.0;
    Event event = Event::None;

    bool operator==(const TraceRow&) const = default;
};

struct MotionTrace {
    std::vector<TraceRow> rows;
    bool operator==(const MotionTrace&) const = default;
};

inline double fold_threshold(double k) {
    if (k < 0.0) throw PreconditionError("stiffness must be non-negative");
    return 8.0 * k / (3.0 * std::sqrt(3.0));
}

// pure tilted double well k (q^2-1)^2 - m q, temperature ignored
struct DoubleWell {
    double k = 1.0;
    double m = 0.0;
    double energy(double q, double) const { return double_well_energy(q, k, m); }
    double gradient(double q, double) const { return 4.0 * k * q * (q * q - 1.0) - m; }
    double curvature(double q, double) const { return k * (12.0 * q * q - 4.0); }
};

struct StepResult {
    double q = 0.0;
    bool snapped = false;
    int iterations = 0;
};

namespace detail {

struct Descent {
    double q;
    bool fold;
    int iterations;
};

// Walk downhill from q0 to the first stationary point, then refine with
// safeguarded Newton. fold is set when |V'| grows or V'' <= 0 on the way.
template <class Ctx>
Descent descend(const Ctx& f, double q0, double T, const SolverSettings& s, int budget) {
    int it = 0;
    double g0 = f.gradient(q0, T);
    if (std::abs(g0) < s.grad_tol && f.curvature(q0, T) > 0.0) return {q0, false, 0};

    double dir;
    if (std::abs(g0) < s.grad_tol)
        dir = f.energy(q0 + 1e-3, T) <= f.energy(q0 - 1e-3, T) ? 1.0 : -1.0;
    else
        dir = g0 < 0.0 ? 1.0 : -1.0;

    bool fold = f.curvature(q0, T) <= 0.0;
    double a = q0, ga = g0, h = 1e-3, b = q0, gb = g0;
    for (;;) {
        if (++it > budget) throw ConvergenceError("no stationary point within iteration budget");
        b = a + dir * h;
        gb = f.gradient(b, T);
        if (std::abs(gb) > std::abs(ga) && dir * gb < 0.0) fold = true;
        if (f.curvature(b, T) <= 0.0 && dir * gb < 0.0) fold = true;
        if (dir * gb >= 0.0) break;
        a = b;
        ga = gb;
        h = std::min(2.0 * h, 0.1);
    }

    double lo = std::min(a, b), hi = std::max(a, b);
    double glo = f.gradient(lo, T);
    double x = std::abs(ga) < std::abs(gb) ? a : b;
    double gx = f.gradient(x, T);
    while (std::abs(gx) >= s.grad_tol) {
        if (++it > budget) throw ConvergenceError("Newton refinement did not reach grad_tol");
        const double c = f.curvature(x, T);
        double xn = c > 0.0 ? x - gx / c : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)))
            throw ConvergenceError("bracket collapsed above grad_tol");
        x = xn;
        gx = f.gradient(x, T);
        if ((gx < 0.0) == (glo < 0.0)) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
    }
    return {x, fold, it};
}

} // namespace detail

template <class Ctx>
StepResult equilibrate_step(double q_prev, double T, const Ctx& f, const SolverSettings& s = {}) {
    const auto d = detail::descend(f, q_prev, T, s, s.max_iter);
    if (!d.fold) return {d.q, false, d.iterations};

    const int n = s.q_scan_points;
    const double step = (s.q_scan_max - s.q_scan_min) / (n - 1);
    int best = 0;
    double vbest = f.energy(s.q_scan_min, T);
    for (int i = 1; i < n; ++i) {
        const double v = f.energy(s.q_scan_min + i * step, T);
        if (v < vbest) {
            vbest = v;
            best = i;
        }
    }
    const auto p = detail::descend(f, s.q_scan_min + best * step, T, s, s.max_iter);
    return {p.q, true, d.iterations + p.iterations};
}

namespace detail {

inline std::size_t snap_window_rows(double step_s, const SolverSettings& s) {
    if (!(step_s > 0.0)) return 1;
    return static_cast<std::size_t>(std::max(1.0, std::ceil(s.snap_window_s / step_s - 1e-12)));
}

// Tag rows whose tip moved more than snap_fraction * x_open within the window.
inline void tag_jumps(std::vector<TraceRow>& rows, std::size_t i, std::size_t window, double jump,
                      std::size_t& last_event, bool& any_event) {
    TraceRow& r = rows[i];
    if (r.event != Event::None) {
        last_event = i;
        any_event = true;
        return;
    }
    if (i < window || (any_event && i - last_event < window)) return;
    const TraceRow& p = rows[i - window];
    const double dl = r.x_left_mm - p.x_left_mm, dr = r.x_right_mm - p.x_right_mm;
    const double d = std::abs(dl) >= std::abs(dr) ? dl : dr;
    if (std::abs(d) > jump) {
        r.event = d < 0.0 ? Event::SnapClose : Event::SnapOpen;
        last_event = i;
        any_event = true;
    }
}

} // namespace detail

inline MotionTrace run_ramp(const AvfAssembly& asm_, const ThermalProtocol& proto, const SolverSettings& s = {}) {
    proto.validate();
    s.validate();
    const std::size_t n = proto.steps();
    const std::size_t window = detail::snap_window_rows(proto.dT_step / proto.rate * 60.0, s);
    const double jump = s.snap_fraction * asm_.x_open;
    const LobeContext ctx[2] = {asm_.context(Side::Left), asm_.context(Side::Right)};

    MotionTrace tr;
    tr.rows.reserve(n);
    double q[2] = {-1.0, -1.0};
    std::size_t last_event = 0;
    bool any_event = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double T = proto.temperature(i);
        for (int side = 0; side < 2; ++side) {
            try {
                q[side] = equilibrate_step(q[side], T, ctx[side], s).q;
            } catch (const ConvergenceError& e) {
                throw ConvergenceError(std::string(e.what()) + " (T = " + std::to_string(T) + " C, " +
                                       (side == 0 ? "left" : "right") + " lobe)");
            }
        }
        tr.rows.push_back({proto.time_of(T), T, q[0], q[1], tip_displacement(q[0], asm_),
                           tip_displacement(q[1], asm_), Event::None});
        detail::tag_jumps(tr.rows, i, window, jump, last_event, any_event);
    }
    return tr;
}

struct SnapEvent {
    double temp_C;
    Event kind;
    bool operator==(const SnapEvent&) const = default;
};

struct EventReport {
    std::optional<double> motion_onset_temp;
    std::optional<double> closure_temp;
    std::optional<double> reopening_temp;
    std::vector<SnapEvent> snaps;
    double final_rel_left = 1.0;   // x_final / x_open
    double final_rel_right = 1.0;
};

namespace detail {
// vertex of the parabola through three equally spaced samples when the middle
// one is a local minimum, so slow reopening is timed against the true trough
inline double trough(double a, double b, double c) {
    const double curv = a - 2.0 * b + c;
    if (!(b <= a && b <= c) || curv <= 0.0) return b;
    return b - (c - a) * (c - a) / (8.0 * curv);
}
} // namespace detail

// Snap events are the tagged rows plus any untagged jump above the threshold.
inline EventReport detect_events(const MotionTrace& tr, const AvfAssembly& asm_, const SolverSettings& s = {}) {
    EventReport rep;
    if (tr.rows.empty()) return rep;
    std::vector<TraceRow> rows = tr.rows;
    {
        const double step_s = rows.size() > 1 ? rows[1].time_s - rows[0].time_s : 0.0;
        const std::size_t window = detail::snap_window_rows(step_s, s);
        std::size_t last_event = 0;
        bool any_event = false;
        for (std::size_t i = 0; i < rows.size(); ++i)
            detail::tag_jumps(rows, i, window, s.snap_fraction * asm_.x_open, last_event, any_event);
    }
    const double x0 = asm_.x_open;
    const double thr = event_fraction * x0 * (1.0 - 1e-12);  // moved at least
    const double near = event_fraction * x0 * (1.0 + 1e-12);  // within

    std::size_t closure_idx = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!rep.motion_onset_temp && x0 - r.x_left_mm >= thr && x0 - r.x_right_mm >= thr)
            rep.motion_onset_temp = r.temp_C;
        if (!rep.closure_temp && std::abs(r.x_left_mm) <= near && std::abs(r.x_right_mm) <= near) {
            rep.closure_temp = r.temp_C;
            closure_idx = i;
        }
        if (r.event != Event::None) rep.snaps.push_back({r.temp_C, r.event});
    }

    double minL = tr.rows.front().x_left_mm, minR = tr.rows.front().x_right_mm;
    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
        const auto& r = tr.rows[i];
        minL = std::min(minL, r.x_left_mm);
        minR = std::min(minR, r.x_right_mm);
        if (i >= 2) {
            const auto& a = tr.rows[i - 2];
            const auto& b = tr.rows[i - 1];
            minL = std::min(minL, detail::trough(a.x_left_mm, b.x_left_mm, r.x_left_mm));
            minR = std::min(minR, detail::trough(a.x_right_mm, b.x_right_mm, r.x_right_mm));
        }
        if (rep.closure_temp && i <= closure_idx) continue;
        if (r.x_left_mm - minL >= thr && r.x_right_mm - minR >= thr) {
            rep.reopening_temp = r.temp_C;
            break;
        }
    }
    rep.final_rel_left = tr.rows.back().x_left_mm / x0;
    rep.final_rel_right = tr.rows.back().x_right_mm / x0;
    return rep;
}

} // namespace avf
