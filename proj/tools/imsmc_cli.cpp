#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "imsmc/csv.hpp"
#include "imsmc/plot.hpp"
#include "imsmc/sweep.hpp"
#include "imsmc/verify.hpp"

using namespace imsmc;

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string matrix_literal(const Matrix& m) {
    std::string s = "[";
    for (Index i = 0; i < m.rows(); ++i) {
        s += i ? ", [" : "[";
        for (Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + fmt(m(i, j), "%.17g");
        s += "]";
    }
    return s + "]";
}

void print_metrics_header() {
    std::printf("%-12s %14s %16s %18s %18s %14s\n", "controller", "settling_time", "band_entry_time",
                "max_band_violation", "chattering_index", "delta_hat");
}

void print_metrics_row(const std::string& label, const Metrics& m) {
    std::printf("%-12s %14ld %16ld %18.6g %18.6g %14.6g\n", label.c_str(), m.settling_time, m.band_entry_time,
                m.max_band_violation, m.chattering_index, m.delta_hat);
}

int design_g(const std::string& path) {
    const ExperimentConfig cfg = load_config(path);
    const RegularForm rf = to_regular_form(cfg.plant);
    const LmiSolution sol = design_g_lmi(rf);
    const StabilityReport rep = verify_quadratic_stability(rf, SurfaceGain(sol.g), default_delta_grid(rf, 21, cfg.seed));
    std::cout << "G = " << matrix_literal(sol.g) << "\n";
    std::cout << "certificate (-max eig) = " << fmt(sol.certificate, "%.6e") << "\n";
    std::cout << "gamma = " << fmt(sol.gamma, "%.17g") << "\n";
    std::cout << "R1 = " << matrix_literal(sol.r1) << "\n";
    std::cout << "Rg = " << matrix_literal(sol.rg) << "\n";
    std::cout << "max spectral radius over delta grid = " << fmt(rep.max_radius) << (rep.stable ? " (stable)" : " (UNSTABLE)")
              << "\n";
    return rep.stable ? 0 : 1;
}

int run(const std::string& path, const std::string& out) {
    const ExperimentConfig cfg = load_config(path);
    const TrajectoryLog log = run_experiment(cfg);
    export_csv(log, out);
    print_metrics_header();
    print_metrics_row(to_string(cfg.controller), compute_metrics(log, cfg));
    return 0;
}

int compare(const std::string& path) {
    ExperimentConfig robust = load_config(path);
    ExperimentConfig im = robust;
    robust.controller = ControllerKind::robust;
    im.controller = ControllerKind::imsmc;
    const Metrics mr = compute_metrics(run_experiment(robust), robust);
    const Metrics mi = compute_metrics(run_experiment(im), im);
    print_metrics_header();
    print_metrics_row("robust", mr);
    print_metrics_row("imsmc", mi);
    return 0;
}

int verify(const std::string& path) {
    const ExperimentConfig cfg = load_config(path);
    int failed = 0;
    for (const auto& c : run_verify_suite(cfg)) {
        std::printf("[%s] %s / %s: %s\n", c.passed ? "PASS" : "FAIL", c.module.c_str(), c.name.c_str(),
                    c.detail.c_str());
        failed += c.passed ? 0 : 1;
    }
    std::printf("%d check(s) failed\n", failed);
    return failed ? 1 : 0;
}

int sweep(const std::string& path, const std::string& param, const std::string& values, const std::string& out_dir) {
    const ConfigDocument doc = load_config_document(path);
    const auto points = run_sweep(doc, param, split_values(values));
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    std::printf("%-20s %14s %16s %18s %18s %14s\n", param.c_str(), "settling_time", "band_entry_time",
                "max_band_violation", "chattering_index", "delta_hat");
    int failed = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!p.error.empty()) {
            std::printf("%-20s error: %s\n", p.value.c_str(), p.error.c_str());
            ++failed;
            continue;
        }
        const Metrics& m = p.metrics;
        std::printf("%-20s %14ld %16ld %18.6g %18.6g %14.6g\n", p.value.c_str(), m.settling_time, m.band_entry_time,
                    m.max_band_violation, m.chattering_index, m.delta_hat);
        if (!out_dir.empty()) {
            export_csv(p.log, out_dir + "/sweep_" + std::to_string(i) + ".csv");
        }
    }
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Input-mapping sliding mode control experiments"};
    app.require_subcommand(1);

    std::string config, out, param, values, out_dir, csv, svg;
    std::vector<std::string> columns;

    auto* dg = app.add_subcommand("design-g", "Design the sliding gain from the LMI and certify it");
    dg->add_option("config", config, "Experiment configuration")->required();

    auto* rn = app.add_subcommand("run", "Run one experiment and write its trajectory CSV");
    rn->add_option("config", config, "Experiment configuration")->required();
    rn->add_option("--out", out, "Output CSV path")->required();

    auto* cp = app.add_subcommand("compare", "Run robust and input-mapping controllers and tabulate metrics");
    cp->add_option("config", config, "Experiment configuration")->required();

    auto* vf = app.add_subcommand("verify", "Run the invariant suite");
    vf->add_option("config", config, "Experiment configuration")->required();

    auto* sw = app.add_subcommand("sweep", "Run a parameter grid in parallel");
    sw->add_option("config", config, "Experiment configuration")->required();
    sw->add_option("--param", param, "Parameter as section.key")->required();
    sw->add_option("--values", values, "Comma-separated config literals")->required();
    sw->add_option("--out-dir", out_dir, "Write one CSV per grid point here");

    auto* pl = app.add_subcommand("plot", "Render CSV columns as SVG line charts");
    pl->add_option("csv", csv, "Trajectory CSV")->required();
    pl->add_option("--out", svg, "Output SVG (default: <csv>.svg)");
    pl->add_option("--columns", columns, "Columns to plot (default: all)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*dg) return design_g(config);
        if (*rn) return run(config, out);
        if (*cp) return compare(config);
        if (*vf) return verify(config);
        if (*sw) return sweep(config, param, values, out_dir);
        if (*pl) {
            plot_csv(csv, svg.empty() ? csv + ".svg" : svg, columns);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
