#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "material.hpp"

namespace avf {

enum class LayoutKind { None, Single, Cross, Diamond };

inline const char* to_string(LayoutKind k) {
    switch (k) {
    case LayoutKind::None: return "none";
    case LayoutKind::Single: return "single";
    case LayoutKind::Cross: return "cross";
    case LayoutKind::Diamond: return "diamond";
    }
    return "none";
}

inline LayoutKind parse_layout(const std::string& s, const std::string& path = "demonstrator.layout") {
    if (s == "none") return LayoutKind::None;
    if (s == "single") return LayoutKind::Single;
    if (s == "cross") return LayoutKind::Cross;
    if (s == "diamond") return LayoutKind::Diamond;
    throw ConfigError(path, "unknown layout '" + s + "'");
}

// diamond strand frame, width : height
inline constexpr double diamond_aspect = 0.5;

struct LobeGains {
    double beta = 5.56;         // closing drive per unit k_ref
    double restraint = 2.78;    // shape restraint per unit k_ref
    double rho_sat = 0.55;      // release ratio at which the drive saturates
    double midrib_mm3 = 0.00363;  // base restraint per MPa of E_glassy
    double c_geom = 10.0 * 40.0 * 40.0 * 40.0 * 40.0 / (300.0 * 60.0 * 8.0);
    double L_norm_mm = 40.0;

    bool operator==(const LobeGains&) const = default;
};

struct LobeSpec {
    double a = 60.0;   // mm
    double b = 2.0;    // mm
    double R1 = 40.0;  // mm
    double R2 = 110.0; // mm
    MaterialParams material;
    ProgrammedState programmed;

    double gaussian_curvature() const { return 1.0 / (R1 * R2); }
};

inline double double_well_energy(double q, double k, double m) {
    const double s = q * q - 1.0;
    return k * s * s - m * q;
}

inline constexpr double saturation_blend = 0.05;

// min(1, u) with the corner replaced by a quadratic on [1 - d, 1 + d]
inline double soft_saturation(double u, double d = saturation_blend) {
    if (u <= 1.0 - d) return u;
    if (u >= 1.0 + d) return 1.0;
    const double e = u - (1.0 - d);
    return u - e * e / (4.0 * d);
}

struct BistableLobeElement {
    LobeSpec spec;
    double k_ref = 10.0;   // mJ
    double beta = 5.56;
    double rho_sat = 1.0;
    double kappa = 0.0;    // quadratic restraint about q = -1, mJ

    double barrier(double T) const { return k_ref * modulus(T, spec.material) / spec.material.E_glassy; }

    double drive(double T) const {
        const double rho = release_ratio(T, spec.programmed, spec.material);
        return beta * k_ref * (rho_sat < 1.0 ? soft_saturation(rho / rho_sat) : rho);
    }

    double energy(double q, double T) const {
        const double u = q + 1.0;
        return double_well_energy(q, barrier(T), drive(T)) + 0.5 * kappa * u * u;
    }

    double gradient(double q, double T) const {
        return 4.0 * barrier(T) * q * (q * q - 1.0) - drive(T) + kappa * (q + 1.0);
    }

    double curvature(double q, double T) const {
        return barrier(T) * (12.0 * q * q - 4.0) + kappa;
    }
};

inline double k_ref_of(double a, double b, double E_glassy, const LobeGains& g) {
    const double L = g.L_norm_mm;
    return g.c_geom * E_glassy * a * b * b * b / (L * L * L * L);
}

inline BistableLobeElement make_lobe(const LobeSpec& spec, const LobeGains& g) {
    BistableLobeElement e;
    e.spec = spec;
    e.k_ref = k_ref_of(spec.a, spec.b, spec.material.E_glassy, g);
    e.beta = g.beta;
    e.rho_sat = g.rho_sat;
    e.kappa = g.restraint * e.k_ref + g.midrib_mm3 * spec.material.E_glassy;
    return e;
}

struct StrandSpec {
    double L0 = 8.75;    // mm
    double A_s = 0.36;   // mm^2
    MaterialParams material;
    ProgrammedState programmed;
    double gamma = 0.28;
    double count_weight = 1.0;

    double stretched_length(double q) const {
        return L0 * (1.0 + programmed.eps_retained_at_fix) * (1.0 + gamma * (q + 1.0) / 2.0);
    }
    double natural_length(double T) const {
        return L0 * (1.0 + retained_strain(T, programmed, material));
    }
    double strain(double q, double T) const {
        const double Ln = natural_length(T);
        return (stretched_length(q) - Ln) / Ln;
    }
    double axial_stiffness(double T) const { return count_weight * modulus(T, material) * A_s * L0; }
    double strain_rate(double T) const {
        return L0 * (1.0 + programmed.eps_retained_at_fix) * gamma / 2.0 / natural_length(T);
    }

    double energy(double q, double T) const {
        const double e = strain(q, T);
        return 0.5 * axial_stiffness(T) * e * e;
    }
    double gradient(double q, double T) const {
        return axial_stiffness(T) * strain(q, T) * strain_rate(T);
    }
    double curvature(double, double T) const {
        const double r = strain_rate(T);
        return axial_stiffness(T) * r * r;
    }
};

inline double strand_energy(double q, double T, const StrandSpec& s) { return s.energy(q, T); }

// Strands of one lobe for a layout. `base` is the axial strand.
inline std::vector<StrandSpec> layout_strands(LayoutKind kind, const StrandSpec& base, double R1, double R2) {
    std::vector<StrandSpec> out;
    switch (kind) {
    case LayoutKind::None: break;
    case LayoutKind::Single: out.push_back(base); break;
    case LayoutKind::Cross: {
        out.push_back(base);
        StrandSpec t = base;
        t.gamma = base.gamma * R1 / R2;
        out.push_back(t);
        break;
    }
    case LayoutKind::Diamond: {
        // rhombus sides: two parallel paths of two strands each
        const double half_w = diamond_aspect / 2.0, half_h = 0.5;
        const double side = std::hypot(half_w, half_h);
        StrandSpec s = base;
        s.L0 = base.L0 * side;
        s.gamma = base.gamma * (half_h * half_h) / (side * side);
        out.assign(4, s);
        break;
    }
    }
    return out;
}

struct LobeContext {
    const BistableLobeElement* lobe;
    const std::vector<StrandSpec>* strands;

    double energy(double q, double T) const {
        double v = lobe->energy(q, T);
        for (const auto& s : *strands) v += s.energy(q, T);
        return v;
    }
    double gradient(double q, double T) const {
        double g = lobe->gradient(q, T);
        for (const auto& s : *strands) g += s.gradient(q, T);
        return g;
    }
    double curvature(double q, double T) const {
        double c = lobe->curvature(q, T);
        for (const auto& s : *strands) c += s.curvature(q, T);
        return c;
    }
};

enum class Side { Left, Right };

struct AvfAssembly {
    BistableLobeElement left;
    BistableLobeElement right;
    LayoutKind layout = LayoutKind::None;
    std::vector<StrandSpec> strands;  // per lobe
    double x_open = 0.0;
    bool midrib = true;

    LobeContext context(Side s) const { return {s == Side::Left ? &left : &right, &strands}; }
};

inline double x_open_of(double a, double R1) { return a * a / (8.0 * R1); }

inline double tip_displacement(double q, const AvfAssembly& asm_) { return asm_.x_open * (1.0 - q) / 2.0; }

inline double lobe_energy(double q, double T, const BistableLobeElement& lobe) { return lobe.energy(q, T); }

inline double total_energy(double qL, double qR, double T, const AvfAssembly& asm_) {
    return asm_.context(Side::Left).energy(qL, T) + asm_.context(Side::Right).energy(qR, T);
}

struct StrandConfig {
    std::string material = "SME25";
    double length_mm = 8.75;
    double area_mm2 = 0.36;
    double prestrain = 0.40;
    double gamma = 0.28;
    double T_fix_C = 20.0;

    bool operator==(const StrandConfig&) const = default;
};

struct DemonstratorConfig {
    double length_mm = 60.0;
    double thickness_mm = 2.0;
    double R1_mm = 40.0;
    double R2_mm = 110.0;
    std::string lobe_material = "L20";
    double lobe_strain = 0.05;
    double lobe_T_fix_C = 20.0;
    double asymmetry = 0.0;  // relative thickness offset of the right lobe
    LayoutKind layout = LayoutKind::None;
    StrandConfig strand;
    LobeGains gains;

    bool operator==(const DemonstratorConfig&) const = default;
};

using MaterialMap = std::map<std::string, MaterialParams>;

inline MaterialMap default_materials() {
    MaterialMap m;
    for (const auto& p : {materials::l20(), materials::sme25(), materials::sme40()}) m[p.name] = p;
    return m;
}

inline AvfAssembly build_assembly(const DemonstratorConfig& cfg, const MaterialMap& mats = default_materials()) {
    const std::string root = "demonstrator";
    auto positive = [&](double v, const std::string& key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(root + "." + key, "must be positive");
    };
    positive(cfg.length_mm, "length_mm");
    positive(cfg.thickness_mm, "thickness_mm");
    positive(cfg.R1_mm, "R1_mm");
    positive(cfg.R2_mm, "R2_mm");
    positive(cfg.gains.c_geom, "gains.c_geom");
    positive(cfg.gains.L_norm_mm, "gains.L_norm_mm");
    positive(cfg.gains.rho_sat, "gains.rho_sat");
    if (!(cfg.thickness_mm * (1.0 + cfg.asymmetry) > 0.0))
        throw ConfigError(root + ".asymmetry", "right lobe thickness must stay positive");

    auto find = [&](const std::string& name, const std::string& key) -> const MaterialParams& {
        auto it = mats.find(name);
        if (it == mats.end()) throw ConfigError(root + "." + key, "unknown material '" + name + "'");
        return it->second;
    };

    const MaterialParams& lm = find(cfg.lobe_material, "lobe_material");
    lm.validate("materials." + lm.name);

    LobeSpec spec;
    spec.a = cfg.length_mm;
    spec.b = cfg.thickness_mm;
    spec.R1 = cfg.R1_mm;
    spec.R2 = cfg.R2_mm;
    spec.material = lm;
    spec.programmed = program(lm, cfg.lobe_strain, lm.T_sw + 3.0 * lm.w, cfg.lobe_T_fix_C);

    AvfAssembly out;
    out.left = make_lobe(spec, cfg.gains);
    LobeSpec rspec = spec;
    rspec.b = spec.b * (1.0 + cfg.asymmetry);
    out.right = make_lobe(rspec, cfg.gains);
    out.layout = cfg.layout;
    out.x_open = x_open_of(cfg.length_mm, cfg.R1_mm);

    if (cfg.layout != LayoutKind::None) {
        positive(cfg.strand.length_mm, "strand.length_mm");
        positive(cfg.strand.area_mm2, "strand.area_mm2");
        const MaterialParams& sm = find(cfg.strand.material, "strand.material");
        sm.validate("materials." + sm.name);
        StrandSpec base;
        base.L0 = cfg.strand.length_mm;
        base.A_s = cfg.strand.area_mm2;
        base.material = sm;
        base.programmed = program(sm, cfg.strand.prestrain, sm.T_sw + 3.0 * sm.w, cfg.strand.T_fix_C);
        base.gamma = cfg.strand.gamma;
        out.strands = layout_strands(cfg.layout, base, cfg.R1_mm, cfg.R2_mm);
    }
    return out;
}

} // namespace avf
