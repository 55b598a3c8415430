#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avf/avf.hpp"

namespace {

avf::RunConfig load_config(const std::string& path) { return avf::parse_config(avf::read_file(path)); }

void make_parent(const std::string& path) {
    if (path.empty()) return;
    const auto dir = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!dir.empty()) std::filesystem::create_directories(dir, ec);
}

int cmd_presets() {
    for (const auto& n : avf::preset_names()) std::cout << n << '\n';
    return 0;
}

int cmd_simulate(const std::string& config, std::string out, std::string svg, std::string metrics) {
    const avf::RunConfig cfg = load_config(config);
    if (out.empty()) out = cfg.outputs.trace_csv;
    if (svg.empty()) svg = cfg.outputs.plot_svg;
    if (metrics.empty()) metrics = cfg.outputs.metrics_json;
    if (out.empty()) throw avf::ValidationError("outputs.trace_csv", "no trace path given (--out)");

    const avf::AvfAssembly a = avf::build_assembly(cfg.demonstrator, cfg.materials);
    const avf::MotionTrace tr = avf::run_ramp(a, cfg.protocol, cfg.solver);
    const std::string doc = avf::metrics_json(avf::compute_metrics(tr, a), avf::detect_events(tr, a, cfg.solver));

    const std::string svg_text = svg.empty() ? std::string() : avf::render_svg(tr, avf::default_plot_spec(a));
    for (const auto* p : {&out, &svg, &metrics}) make_parent(*p);
    avf::emit_trace(tr, out);
    if (!svg.empty()) avf::atomic_write(svg, svg_text);
    if (!metrics.empty()) avf::atomic_write(metrics, doc);
    std::cout << doc;
    return 0;
}

int cmd_sweep(const std::string& config, const std::vector<double>& lengths, const std::vector<double>& thick,
              const std::string& out, std::string material, unsigned jobs) {
    const avf::RunConfig cfg = load_config(config);
    if (material.empty()) material = cfg.demonstrator.lobe_material;
    if (!cfg.materials.count(material)) throw avf::ValidationError("material", "unknown material '" + material + "'");
    const auto cells =
        avf::design_sweep(lengths, thick, material, cfg.protocol, cfg.materials, cfg.solver, jobs, cfg.demonstrator);
    make_parent(out);
    avf::atomic_write(out, avf::sweep_to_csv(cells));
    std::cout << avf::sweep_table(cells);
    return 0;
}

int cmd_calibrate(const std::string& samples_path, const std::string& material, const std::string& out,
                  const std::string& config, double area, double prestrain, double T_fix) {
    const avf::RunConfig cfg = config.empty() ? avf::RunConfig{} : load_config(config);
    const auto it = cfg.materials.find(material);
    if (it == cfg.materials.end()) throw avf::ValidationError("material", "unknown material '" + material + "'");
    const avf::MaterialParams& p = it->second;
    const auto samples = avf::parse_samples_csv(avf::read_file(samples_path));
    const avf::ProgrammedState s = avf::program(p, prestrain, p.T_sw + 3.0 * p.w, T_fix);
    avf::FitBounds bounds;
    bounds.T_sw = {p.T_sw - 25.0, p.T_sw + 25.0};
    bounds.w = {0.05, 20.0};
    bounds.scale = {0.0, 100.0 * avf::plateau_scale_of(p, s, area)};
    const avf::FitResult r = avf::fit_material(samples, p, s, area, bounds);
    const std::string report = avf::fit_report(r);
    make_parent(out);
    avf::atomic_write(out, report);
    std::cout << report;
    return 0;
}

int cmd_metrics(const std::string& trace_path, const std::string& config) {
    const avf::RunConfig cfg = load_config(config);
    const avf::AvfAssembly a = avf::build_assembly(cfg.demonstrator, cfg.materials);
    const avf::MotionTrace tr = avf::parse_trace_csv(avf::read_file(trace_path));
    std::cout << avf::metrics_json(avf::compute_metrics(tr, a), avf::detect_events(tr, a, cfg.solver));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-static simulator for thermo-responsive flytrap demonstrators"};
    app.require_subcommand(1);

    auto* presets = app.add_subcommand("presets", "List the named presets");

    std::string config, out, svg, metrics;
    auto* simulate = app.add_subcommand("simulate", "Run one thermal ramp and write the motion trace");
    simulate->add_option("--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out, "Trace CSV path");
    simulate->add_option("--svg", svg, "Optional SVG plot path");
    simulate->add_option("--metrics", metrics, "Optional metrics document path");

    std::vector<double> lengths, thick;
    std::string material;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Closure matrix over lobe length and thickness");
    sweep->add_option("--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--lengths", lengths, "Lobe lengths in mm, comma separated")->required()->delimiter(',');
    sweep->add_option("--thicknesses", thick, "Lobe thicknesses in mm, comma separated")->required()->delimiter(',');
    sweep->add_option("--out", out, "Sweep CSV path")->required();
    sweep->add_option("--material", material, "Lobe material (defaults to the config's)");
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string samples;
    double area = 0.36, prestrain = 0.40, T_fix = 20.0;
    auto* calibrate = app.add_subcommand("calibrate", "Fit T_sw, w and plateau force to force samples");
    calibrate->add_option("--samples", samples, "CSV with temp_C,force_N")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--material", material, "Material to start from")->required();
    calibrate->add_option("--out", out, "Report path")->required();
    calibrate->add_option("--config", config, "Optional config supplying materials")->check(CLI::ExistingFile);
    calibrate->add_option("--area", area, "Specimen cross-section in mm^2");
    calibrate->add_option("--prestrain", prestrain, "Programming strain");
    calibrate->add_option("--T-fix", T_fix, "Fixing temperature in C");

    std::string trace;
    auto* metrics_cmd = app.add_subcommand("metrics", "Closure, reopening and ROM of a trace");
    metrics_cmd->add_option("--trace", trace, "Trace CSV")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--config", config, "Config the trace was produced with")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*presets) return cmd_presets();
        if (*simulate) return cmd_simulate(config, out, svg, metrics);
        if (*sweep) return cmd_sweep(config, lengths, thick, out, material, jobs);
        if (*calibrate) return cmd_calibrate(samples, material, out, config, area, prestrain, T_fix);
        if (*metrics_cmd) return cmd_metrics(trace, config);
    } catch (const avf::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
