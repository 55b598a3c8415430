#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace avf {

struct MaterialParams {
    std::string name;
    double E_glassy = 300.0;  // MPa
    double E_rubbery = 3.0;   // MPa
    double T_sw = 38.1;       // degC
    double w = 2.0;           // degC, logistic half-width
    double R_f = 0.97;
    double R_r = 0.99;
    double eps_max = 1.0;

    bool operator==(const MaterialParams&) const = default;

    // throws ValidationError naming the offending key below `path`
    void validate(const std::string& path = "material") const {
        auto bad = [&](const char* key, const char* what) {
            throw ValidationError(path + "." + key, what);
        };
        if (!(E_rubbery > 0.0)) bad("E_rubbery_MPa", "must be positive");
        if (!(E_glassy > E_rubbery)) bad("E_glassy_MPa", "must exceed E_rubbery_MPa");
        if (!(w > 0.0)) bad("w_C", "must be positive");
        if (!(R_f > 0.0 && R_f <= 1.0)) bad("R_f", "must lie in (0, 1]");
        if (!(R_r > 0.0 && R_r <= 1.0)) bad("R_r", "must lie in (0, 1]");
        if (!(eps_max > 0.0)) bad("eps_max", "must be positive");
        if (!std::isfinite(T_sw)) bad("T_sw_C", "must be finite");
    }
};

struct ProgrammedState {
    double eps_prog = 0.0;
    double T_fix = 20.0;
    double phi_fix = 1.0;
    double eps_retained_at_fix = 0.0;

    bool operator==(const ProgrammedState&) const = default;
};

enum class CyclePhase { Deformation, CoolingFixing, Unloading, Recovery };

template <class Real>
Real logistic_frozen(Real T, Real T_sw, Real w) {
    return Real(1) / (Real(1) + std::exp((T - T_sw) / w));
}

inline double frozen_fraction(double T, const MaterialParams& p) {
    return logistic_frozen(T, p.T_sw, p.w);
}

inline double modulus(double T, const MaterialParams& p) {
    return p.E_rubbery + (p.E_glassy - p.E_rubbery) * frozen_fraction(T, p);
}

// Tracks one shape-memory cycle and rejects out-of-order phases.
class ShapeMemoryCycle {
public:
    explicit ShapeMemoryCycle(MaterialParams p) : p_(std::move(p)) { p_.validate(); }

    CyclePhase phase() const { return phase_; }
    bool started() const { return started_; }

    void deform(double eps_applied, double T_hot) {
        expect(!started_, "deformation must open the cycle");
        if (std::abs(eps_applied) > p_.eps_max)
            throw OverstrainError("applied strain " + std::to_string(eps_applied) +
                                  " exceeds eps_max " + std::to_string(p_.eps_max));
        if (!(T_hot > p_.T_sw + p_.w))
            throw ProtocolError("deformation temperature must exceed T_sw + w");
        eps_ = eps_applied;
        started_ = true;
        phase_ = CyclePhase::Deformation;
    }

    void cool_and_fix(double T_fix) {
        expect(started_ && phase_ == CyclePhase::Deformation, "cooling must follow deformation");
        if (!(T_fix < p_.T_sw - p_.w))
            throw ProtocolError("fixing temperature must lie below T_sw - w");
        T_fix_ = T_fix;
        phase_ = CyclePhase::CoolingFixing;
    }

    ProgrammedState unload() {
        expect(started_ && phase_ == CyclePhase::CoolingFixing, "unloading must follow fixing");
        phase_ = CyclePhase::Unloading;
        return ProgrammedState{eps_, T_fix_, frozen_fraction(T_fix_, p_), p_.R_f * eps_};
    }

    void recover() {
        expect(started_ && phase_ == CyclePhase::Unloading, "recovery must follow unloading");
        phase_ = CyclePhase::Recovery;
    }

private:
    static void expect(bool ok, const char* msg) {
        if (!ok) throw ProtocolError(msg);
    }

    MaterialParams p_;
    CyclePhase phase_ = CyclePhase::Deformation;
    bool started_ = false;
    double eps_ = 0.0;
    double T_fix_ = 0.0;
};

inline ProgrammedState program(const MaterialParams& p, double eps_applied, double T_hot, double T_fix) {
    ShapeMemoryCycle cycle(p);
    cycle.deform(eps_applied, T_hot);
    cycle.cool_and_fix(T_fix);
    return cycle.unload();
}

namespace detail {
inline void require_above_fix(double T, const ProgrammedState& s) {
    if (T < s.T_fix)
        throw DomainError("temperature " + std::to_string(T) + " below fixing temperature " +
                          std::to_string(s.T_fix));
}
} // namespace detail

inline double retained_strain(double T, const ProgrammedState& s, const MaterialParams& p) {
    detail::require_above_fix(T, s);
    const double lo = (1.0 - p.R_r) * s.eps_prog;
    const double hi = p.R_f * s.eps_prog;
    const double v = lo + (hi - lo) * frozen_fraction(T, p) / s.phi_fix;
    return std::clamp(v, std::min(lo, hi), std::max(lo, hi));
}

inline double release_ratio(double T, const ProgrammedState& s, const MaterialParams& p) {
    detail::require_above_fix(T, s);
    return std::clamp(1.0 - frozen_fraction(T, p) / s.phi_fix, 0.0, 1.0);
}

// fixed-grip recovery force in N (MPa * mm^2)
inline double blocked_recovery_force(double T, const ProgrammedState& s, const MaterialParams& p,
                                     double A) {
    if (!(A > 0.0)) throw PreconditionError("cross-section area must be positive");
    const double released = p.R_f * s.eps_prog - retained_strain(T, s, p);
    return p.E_rubbery * A * released;
}

namespace materials {

inline MaterialParams l20() {
    return {"L20", 300.0, 3.0, 38.1, 4.25, 0.97, 0.99, 1.0};
}

inline MaterialParams sme25() {
    return {"SME25", 6.4, 5.0, 48.8, 2.6, 0.97, 0.99, 4.0};
}

inline MaterialParams sme40() {
    MaterialParams p = sme25();
    p.name = "SME40";
    p.T_sw = 52.0;
    return p;
}

} // namespace materials

} // namespace avf
