#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "experiments.hpp"
#include "mechanics.hpp"
#include "solver.hpp"

namespace avf {

struct OutputConfig {
    std::string trace_csv;
    std::string plot_svg;
    std::string metrics_json;
    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    MaterialMap materials = default_materials();
    DemonstratorConfig demonstrator;
    ThermalProtocol protocol;
    SolverSettings solver;
    OutputConfig outputs;
    bool operator==(const RunConfig&) const = default;
};

inline RunConfig preset_run_config(const std::string& name) {
    RunConfig c;
    c.demonstrator = preset_demonstrator(name);
    return c;
}

namespace detail {

using json = nlohmann::json;

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) throw ParseError(key(it.key()), "unknown key");
    }

    void num(const char* k, double& out) const {
        if (!j_.contains(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number()) throw ParseError(key(k), "expected a number");
        out = v.get<double>();
    }
    void integer(const char* k, int& out) const {
        if (!j_.contains(k)) return;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw ParseError(key(k), "expected an integer");
        out = v.get<int>();
    }
    void str(const char* k, std::string& out) const {
        if (!j_.contains(k)) return;
        const json& v = j_.at(k);
        if (!v.is_string()) throw ParseError(key(k), "expected a string");
        out = v.get<std::string>();
    }
    bool has(const char* k) const { return j_.contains(k); }
    Reader sub(const char* k) const { return Reader(j_.at(k), key(k)); }
    const json& raw() const { return j_; }
    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

private:
    const json& j_;
    std::string path_;
};

inline void read_material(const Reader& r, MaterialParams& p) {
    r.allow({"E_glassy_MPa", "E_rubbery_MPa", "T_sw_C", "w_C", "R_f", "R_r", "eps_max"});
    r.num("E_glassy_MPa", p.E_glassy);
    r.num("E_rubbery_MPa", p.E_rubbery);
    r.num("T_sw_C", p.T_sw);
    r.num("w_C", p.w);
    r.num("R_f", p.R_f);
    r.num("R_r", p.R_r);
    r.num("eps_max", p.eps_max);
}

inline void read_demonstrator(const Reader& r, DemonstratorConfig& d) {
    r.allow({"length_mm", "thickness_mm", "R1_mm", "R2_mm", "lobe_material", "lobe_strain", "lobe_T_fix_C",
             "asymmetry", "layout", "strand", "gains"});
    r.num("length_mm", d.length_mm);
    r.num("thickness_mm", d.thickness_mm);
    r.num("R1_mm", d.R1_mm);
    r.num("R2_mm", d.R2_mm);
    r.str("lobe_material", d.lobe_material);
    r.num("lobe_strain", d.lobe_strain);
    r.num("lobe_T_fix_C", d.lobe_T_fix_C);
    r.num("asymmetry", d.asymmetry);
    if (r.has("layout")) {
        std::string s;
        r.str("layout", s);
        try {
            d.layout = parse_layout(s, r.key("layout"));
        } catch (const ConfigError& e) {
            throw ValidationError(e.key_path, "unknown layout '" + s + "'");
        }
    }
    if (r.has("strand")) {
        const Reader s = r.sub("strand");
        s.allow({"material", "length_mm", "area_mm2", "prestrain", "gamma", "T_fix_C"});
        s.str("material", d.strand.material);
        s.num("length_mm", d.strand.length_mm);
        s.num("area_mm2", d.strand.area_mm2);
        s.num("prestrain", d.strand.prestrain);
        s.num("gamma", d.strand.gamma);
        s.num("T_fix_C", d.strand.T_fix_C);
    }
    if (r.has("gains")) {
        const Reader g = r.sub("gains");
        g.allow({"beta", "restraint", "rho_sat", "midrib_mm3", "c_geom", "L_norm_mm"});
        g.num("beta", d.gains.beta);
        g.num("restraint", d.gains.restraint);
        g.num("rho_sat", d.gains.rho_sat);
        g.num("midrib_mm3", d.gains.midrib_mm3);
        g.num("c_geom", d.gains.c_geom);
        g.num("L_norm_mm", d.gains.L_norm_mm);
    }
}

} // namespace detail

inline void validate_config(const RunConfig& c) {
    for (const auto& [name, p] : c.materials) p.validate("materials." + name);
    const auto& d = c.demonstrator;
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("demonstrator.") + key, "must be positive");
    };
    positive(d.length_mm, "length_mm");
    positive(d.thickness_mm, "thickness_mm");
    positive(d.R1_mm, "R1_mm");
    positive(d.R2_mm, "R2_mm");
    positive(d.gains.rho_sat, "gains.rho_sat");
    positive(d.gains.c_geom, "gains.c_geom");
    positive(d.gains.L_norm_mm, "gains.L_norm_mm");
    if (!c.materials.count(d.lobe_material))
        throw ValidationError("demonstrator.lobe_material", "unknown material '" + d.lobe_material + "'");
    if (d.layout != LayoutKind::None) {
        positive(d.strand.length_mm, "strand.length_mm");
        positive(d.strand.area_mm2, "strand.area_mm2");
        if (!c.materials.count(d.strand.material))
            throw ValidationError("demonstrator.strand.material", "unknown material '" + d.strand.material + "'");
    }
    c.protocol.validate();
    c.solver.validate();
    try {
        build_assembly(d, c.materials);
    } catch (const KeyedError& e) {
        throw ValidationError(e.key_path, e.what());
    } catch (const InputError& e) {
        throw ValidationError("demonstrator", e.what());
    }
}

inline RunConfig parse_config(const std::string& text) {
    detail::json j;
    try {
        j = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        throw ParseError("<root>", e.what());
    }
    const detail::Reader root(j, "");
    root.allow({"preset", "materials", "demonstrator", "protocol", "solver", "outputs"});

    RunConfig c;
    if (root.has("preset")) {
        std::string name;
        root.str("preset", name);
        try {
            c = preset_run_config(name);
        } catch (const UnknownPresetError& e) {
            throw ValidationError("preset", e.what());
        }
    }
    if (root.has("materials")) {
        const detail::Reader ms = root.sub("materials");
        for (auto it = ms.raw().begin(); it != ms.raw().end(); ++it) {
            const std::string name = it.key();
            const detail::Reader mr(it.value(), "materials." + name);
            auto found = c.materials.find(name);
            MaterialParams p;
            if (found != c.materials.end()) {
                p = found->second;
            } else {
                for (const char* k : {"E_glassy_MPa", "E_rubbery_MPa", "T_sw_C", "w_C", "R_f", "R_r", "eps_max"})
                    if (!mr.has(k)) throw ValidationError(mr.key(k), "required for a new material");
            }
            p.name = name;
            detail::read_material(mr, p);
            c.materials[name] = p;
        }
    }
    if (root.has("demonstrator")) detail::read_demonstrator(root.sub("demonstrator"), c.demonstrator);
    if (root.has("protocol")) {
        const auto r = root.sub("protocol");
        r.allow({"T_start_C", "T_end_C", "rate_C_per_min", "dT_step_C"});
        r.num("T_start_C", c.protocol.T_start);
        r.num("T_end_C", c.protocol.T_end);
        r.num("rate_C_per_min", c.protocol.rate);
        r.num("dT_step_C", c.protocol.dT_step);
    }
    if (root.has("solver")) {
        const auto r = root.sub("solver");
        r.allow({"grad_tol", "max_iter", "q_scan_min", "q_scan_max", "q_scan_points", "snap_window_s", "snap_fraction"});
        r.num("grad_tol", c.solver.grad_tol);
        r.integer("max_iter", c.solver.max_iter);
        r.num("q_scan_min", c.solver.q_scan_min);
        r.num("q_scan_max", c.solver.q_scan_max);
        r.integer("q_scan_points", c.solver.q_scan_points);
        r.num("snap_window_s", c.solver.snap_window_s);
        r.num("snap_fraction", c.solver.snap_fraction);
    }
    if (root.has("outputs")) {
        const auto r = root.sub("outputs");
        r.allow({"trace_csv", "plot_svg", "metrics_json"});
        r.str("trace_csv", c.outputs.trace_csv);
        r.str("plot_svg", c.outputs.plot_svg);
        r.str("metrics_json", c.outputs.metrics_json);
    }
    validate_config(c);
    return c;
}

inline std::string serialize_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    for (const auto& [name, p] : c.materials)
        j["materials"][name] = {{"E_glassy_MPa", p.E_glassy}, {"E_rubbery_MPa", p.E_rubbery}, {"T_sw_C", p.T_sw},
                                {"w_C", p.w}, {"R_f", p.R_f}, {"R_r", p.R_r}, {"eps_max", p.eps_max}};
    const auto& d = c.demonstrator;
    j["demonstrator"] = {
        {"length_mm", d.length_mm}, {"thickness_mm", d.thickness_mm}, {"R1_mm", d.R1_mm}, {"R2_mm", d.R2_mm},
        {"lobe_material", d.lobe_material}, {"lobe_strain", d.lobe_strain}, {"lobe_T_fix_C", d.lobe_T_fix_C},
        {"asymmetry", d.asymmetry}, {"layout", to_string(d.layout)}};
    j["demonstrator"]["strand"] = {{"material", d.strand.material}, {"length_mm", d.strand.length_mm},
                                   {"area_mm2", d.strand.area_mm2}, {"prestrain", d.strand.prestrain},
                                   {"gamma", d.strand.gamma}, {"T_fix_C", d.strand.T_fix_C}};
    j["demonstrator"]["gains"] = {{"beta", d.gains.beta}, {"restraint", d.gains.restraint},
                                  {"rho_sat", d.gains.rho_sat}, {"midrib_mm3", d.gains.midrib_mm3},
                                  {"c_geom", d.gains.c_geom}, {"L_norm_mm", d.gains.L_norm_mm}};
    j["protocol"] = {{"T_start_C", c.protocol.T_start}, {"T_end_C", c.protocol.T_end},
                     {"rate_C_per_min", c.protocol.rate}, {"dT_step_C", c.protocol.dT_step}};
    j["solver"] = {{"grad_tol", c.solver.grad_tol}, {"max_iter", c.solver.max_iter},
                   {"q_scan_min", c.solver.q_scan_min}, {"q_scan_max", c.solver.q_scan_max},
                   {"q_scan_points", c.solver.q_scan_points}, {"snap_window_s", c.solver.snap_window_s},
                   {"snap_fraction", c.solver.snap_fraction}};
    j["outputs"] = {{"trace_csv", c.outputs.trace_csv}, {"plot_svg", c.outputs.plot_svg},
                    {"metrics_json", c.outputs.metrics_json}};
    return j.dump(2) + "\n";
}

} // namespace avf
