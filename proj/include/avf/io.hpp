#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibration.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "solver.hpp"

namespace avf {

inline std::string fmt6(double v) {
    if (v == 0.0) v = 0.0;  // drop negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Write to a sibling temp file, then rename over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// trace CSV

inline constexpr const char* trace_header = "time_s,temp_C,q_left,q_right,x_left_mm,x_right_mm,event";

inline std::string trace_to_csv(const MotionTrace& tr) {
    std::string out = trace_header;
    out += '\n';
    for (const auto& r : tr.rows) {
        out += fmt6(r.time_s) + ',' + fmt6(r.temp_C) + ',' + fmt6(r.q_left) + ',' + fmt6(r.q_right) + ',' +
               fmt6(r.x_left_mm) + ',' + fmt6(r.x_right_mm) + ',' + to_string(r.event) + '\n';
    }
    return out;
}

inline void emit_trace(const MotionTrace& tr, const std::filesystem::path& path) { atomic_write(path, trace_to_csv(tr)); }

namespace detail {
inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t n = 0;
        const double v = std::stod(s, &n);
        if (n != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where, "not a number: '" + s + "'");
    }
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string line; std::getline(ss, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}
} // namespace detail

inline MotionTrace parse_trace_csv(const std::string& text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty() || lines[0] != trace_header) throw ParseError("trace:1", "unexpected header");
    MotionTrace tr;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "trace:" + std::to_string(i + 1);
        const auto f = detail::split(lines[i], ',');
        if (f.size() != 7) throw ParseError(where, "expected 7 fields");
        TraceRow r;
        r.time_s = detail::to_double(f[0], where);
        r.temp_C = detail::to_double(f[1], where);
        r.q_left = detail::to_double(f[2], where);
        r.q_right = detail::to_double(f[3], where);
        r.x_left_mm = detail::to_double(f[4], where);
        r.x_right_mm = detail::to_double(f[5], where);
        if (f[6] == "none") r.event = Event::None;
        else if (f[6] == "snap_close") r.event = Event::SnapClose;
        else if (f[6] == "snap_open") r.event = Event::SnapOpen;
        else throw ParseError(where, "unknown event '" + f[6] + "'");
        tr.rows.push_back(r);
    }
    return tr;
}

// force samples CSV

inline std::vector<ForceSample> parse_samples_csv(const std::string& text) {
    const auto lines = detail::lines_of(text);
    if (lines.empty() || lines[0] != "temp_C,force_N") throw ParseError("samples:1", "expected header temp_C,force_N");
    std::vector<ForceSample> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "samples:" + std::to_string(i + 1);
        const auto f = detail::split(lines[i], ',');
        if (f.size() != 2) throw ParseError(where, "expected 2 fields");
        out.push_back({detail::to_double(f[0], where), detail::to_double(f[1], where)});
    }
    return out;
}

inline std::string samples_to_csv(const std::vector<ForceSample>& s) {
    std::string out = "temp_C,force_N\n";
    for (const auto& x : s) out += fmt6(x.T) + ',' + fmt6(x.F) + '\n';
    return out;
}

// sweep

inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
    std::string out = "a_mm,b_mm,material,outcome\n";
    for (const auto& c : cells) out += fmt6(c.a) + ',' + fmt6(c.b) + ',' + c.material + ',' + to_string(c.outcome) + '\n';
    return out;
}

// rows are thicknesses, columns lengths
inline std::string sweep_table(const std::vector<SweepCell>& cells) {
    std::vector<double> as, bs;
    for (const auto& c : cells) {
        if (std::find(as.begin(), as.end(), c.a) == as.end()) as.push_back(c.a);
        if (std::find(bs.begin(), bs.end(), c.b) == bs.end()) bs.push_back(c.b);
    }
    auto pad = [](const std::string& s, std::size_t width) {
        std::size_t cps = 0;
        for (unsigned char ch : s) cps += (ch & 0xC0) != 0x80;
        return std::string(width > cps ? width - cps : 0, ' ') + s;
    };
    const std::size_t w = 6;
    std::string out = pad("b\\a", w);
    for (double a : as) out += pad(fmt6(a), w);
    out += '\n';
    for (double b : bs) {
        out += pad(fmt6(b), w);
        for (double a : as) {
            std::string g = "?";
            for (const auto& c : cells)
                if (c.a == a && c.b == b) g = glyph(c.outcome);
            out += pad(g, w);
        }
        out += '\n';
    }
    return out;
}

// metrics document

inline std::string metrics_json(const MetricsReport& m, const EventReport& ev) {
    nlohmann::ordered_json j;
    // grid temperatures carry accumulated rounding, e.g. 38.400000000000006
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(std::round(*v * 1e9) / 1e9) : nlohmann::ordered_json(nullptr);
    };
    j["closure_pct"] = m.closure_pct;
    j["reopening_pct"] = m.reopening_pct;
    j["rom_pct"] = m.rom_pct;
    j["snap_class"] = to_string(m.snap_class);
    j["motion_onset_temp_C"] = opt(ev.motion_onset_temp);
    j["closure_temp_C"] = opt(m.closure_temp);
    j["reopening_temp_C"] = opt(m.reopening_temp);
    j["snap_events"] = ev.snaps.size();
    j["final_rel_left"] = ev.final_rel_left;
    j["final_rel_right"] = ev.final_rel_right;
    return j.dump(2) + "\n";
}

inline std::string fit_report(const FitResult& r) {
    char buf[64];
    auto line = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(k) + ": " + buf + "\n";
    };
    std::string out = "material: " + r.params.name + "\n";
    out += line("T_sw_C", r.params.T_sw);
    out += line("w_C", r.params.w);
    out += line("plateau_scale_N", r.plateau_scale);
    out += line("E_rubbery_MPa", r.params.E_rubbery);
    out += line("rss_N2", r.rss);
    out += "iterations: " + std::to_string(r.iterations) + "\n";
    out += "restart: " + std::to_string(r.restart) + "\n";
    out += std::string("converged: ") + (r.converged ? "true" : "false") + "\n";
    out += std::string("identifiable: ") + (r.identifiable ? "true" : "false") + "\n";
    return out;
}

// SVG plot

struct PlotSeries {
    std::string label;
    std::string x_column;
    std::string y_column;
};

struct PlotSpec {
    std::vector<PlotSeries> series;
    std::string x_label = "temperature (C)";
    std::string y_label = "horizontal displacement (mm)";
    bool zero_line = true;
    std::vector<double> vlines;  // dashed markers, e.g. switching temperatures
};

inline bool is_trace_column(const std::string& c) {
    for (const char* k : {"time_s", "temp_C", "q_left", "q_right", "x_left_mm", "x_right_mm"})
        if (c == k) return true;
    return false;
}

inline double column(const TraceRow& r, const std::string& c) {
    if (c == "time_s") return r.time_s;
    if (c == "temp_C") return r.temp_C;
    if (c == "q_left") return r.q_left;
    if (c == "q_right") return r.q_right;
    if (c == "x_left_mm") return r.x_left_mm;
    if (c == "x_right_mm") return r.x_right_mm;
    throw PreconditionError("unknown trace column '" + c + "'");
}

inline PlotSpec default_plot_spec(const AvfAssembly& a) {
    PlotSpec p;
    p.series = {{"left tip", "temp_C", "x_left_mm"}, {"right tip", "temp_C", "x_right_mm"}};
    p.vlines.push_back(a.left.spec.material.T_sw);
    if (!a.strands.empty() && a.strands.front().material.T_sw != a.left.spec.material.T_sw)
        p.vlines.push_back(a.strands.front().material.T_sw);
    return p;
}

inline std::string render_svg(const MotionTrace& tr, const PlotSpec& spec) {
    for (const auto& s : spec.series)
        if (!is_trace_column(s.x_column) || !is_trace_column(s.y_column))
            throw PreconditionError("unknown trace column in series '" + s.label + "'");

    const double W = 640, H = 400, L = 60, R = 20, Tm = 20, B = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    const bool data = !spec.series.empty() && !tr.rows.empty();
    if (data) {
        x0 = y0 = std::numeric_limits<double>::infinity();
        x1 = y1 = -std::numeric_limits<double>::infinity();
        for (const auto& s : spec.series)
            for (const auto& r : tr.rows) {
                const double x = column(r, s.x_column), y = column(r, s.y_column);
                x0 = std::min(x0, x), x1 = std::max(x1, x);
                y0 = std::min(y0, y), y1 = std::max(y1, y);
            }
        if (spec.zero_line) y0 = std::min(y0, 0.0), y1 = std::max(y1, 0.0);
        if (x1 == x0) x1 = x0 + 1;
        if (y1 == y0) y1 = y0 + 1;
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return Tm + (y1 - y) / (y1 - y0) * (H - Tm - B); };
    auto f = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.2f", v);
        return std::string(b);
    };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(W) + "\" height=\"" + f(H) + "\" viewBox=\"0 0 " +
         f(W) + " " + f(H) + "\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"" + f(W) + "\" height=\"" + f(H) + "\" fill=\"white\"/>\n";
    o += "<path class=\"axis\" d=\"M" + f(L) + " " + f(Tm) + " V" + f(H - B) + " H" + f(W - R) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    o += "<text x=\"" + f((L + W - R) / 2) + "\" y=\"" + f(H - 12) + "\" text-anchor=\"middle\" font-size=\"12\">" +
         spec.x_label + "</text>\n";
    o += "<text x=\"14\" y=\"" + f((Tm + H - B) / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
         f((Tm + H - B) / 2) + ")\">" + spec.y_label + "</text>\n";
    if (data) {
        o += "<text x=\"" + f(L) + "\" y=\"" + f(H - B + 14) + "\" font-size=\"10\">" + fmt6(x0) + "</text>\n";
        o += "<text x=\"" + f(W - R) + "\" y=\"" + f(H - B + 14) + "\" text-anchor=\"end\" font-size=\"10\">" + fmt6(x1) +
             "</text>\n";
        if (spec.zero_line)
            o += "<line class=\"ref zero\" x1=\"" + f(L) + "\" y1=\"" + f(py(0)) + "\" x2=\"" + f(W - R) + "\" y2=\"" +
                 f(py(0)) + "\" stroke=\"gray\"/>\n";
        for (double v : spec.vlines) {
            if (v < x0 || v > x1) continue;
            o += "<line class=\"ref tsw\" x1=\"" + f(px(v)) + "\" y1=\"" + f(Tm) + "\" x2=\"" + f(px(v)) + "\" y2=\"" +
                 f(H - B) + "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
        }
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
        std::size_t k = 0;
        for (const auto& s : spec.series) {
            o += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(colors[k++ % 5]) + "\" points=\"";
            bool first = true;
            for (const auto& r : tr.rows) {
                if (!first) o += ' ';
                first = false;
                o += f(px(column(r, s.x_column))) + "," + f(py(column(r, s.y_column)));
            }
            o += "\"><title>" + s.label + "</title></polyline>\n";
        }
    }
    o += "</svg>\n";
    return o;
}

inline void emit_plot(const MotionTrace& tr, const PlotSpec& spec, const std::filesystem::path& path) {
    const std::string svg = render_svg(tr, spec);  // validates before any write
    atomic_write(path, svg);
}

} // namespace avf
