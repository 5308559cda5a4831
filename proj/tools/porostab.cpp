// porostab command line front end.
//
// usage: porostab <mode> --config <file> [--out <dir>] [--seed <u64>]
// modes: homog | map | dispersion | critical | patterning | simulate
// exit codes: 0 success, 2 configuration/schema error, 3 numerical failure

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "porostab/io/config.hpp"
#include "porostab/io/writers.hpp"
#include "porostab/stabmap.hpp"

namespace {

using namespace porostab;

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<double> make_axis(double lo, double hi, int n, bool log_spaced) {
    std::vector<double> v(n);
    if (log_spaced) {
        if (!(lo > 0)) throw ValueError("log-spaced axis requires a positive lower bound");
        const double la = std::log(lo), lb = std::log(hi);
        for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / (n - 1));
    } else {
        for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

ScanGrid make_grid(const RunConfig& cfg) {
    ScanGrid g;
    g.param_name = cfg.param;
    g.param_values = make_axis(cfg.param_range[0], cfg.param_range[1], cfg.param_count, false);
    g.k_values = make_axis(cfg.k_range[0], cfg.k_range[1], cfg.k_count, cfg.k_log);
    g.regime = cfg.regime;
    g.theta_variant = cfg.params.theta_variant;
    g.rho_mode = cfg.rho_mode;
    return g;
}

Scenario make_scenario(const RunConfig& cfg) {
    Scenario sc;
    const int res = cfg.resolution;
    if (cfg.scenario == "test1") sc = scenario_test1(res > 0 ? res : 90, res > 0 ? (3 * res) / 5 : 54);
    else if (cfg.scenario == "test2") sc = scenario_test2(res > 0 ? res : 52);
    else sc = scenario_test3(cfg.params.tau, cfg.tau2, res > 0 ? res : 52);
    if (cfg.has_params) {
        // explicit parameter block replaces the preset values wholesale
        sc.params = cfg.params;
    }
    if (cfg.dt > 0) sc.dt = cfg.dt;
    if (cfg.t_final > 0) sc.t_final = cfg.t_final;
    sc.perturb_amplitude = cfg.perturb_amplitude;
    sc.seed = cfg.seed;
    sc.sample_stride = cfg.sample_stride;
    sc.snapshot_stride = cfg.snapshot_stride;
    return sc;
}

int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    auto path = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };

    if (cfg.mode == "homog") {
        ModelParams p = cfg.params;
        if (cfg.rho_mode == RhoMode::QuasiStatic) p.rho = 0.0;
        const HomogReport h = homog_verdict(p);
        std::ofstream os(path("homog.csv"));
        if (!os) throw IoError("cannot open " + path("homog.csv"));
        os << "quantity,value\n";
        os << "degree," << h.degree << "\n";
        os << "stable," << (h.stable ? 1 : 0) << "\n";
        os << "max_re," << fmt17(h.max_re) << "\n";
        for (std::size_t i = 0; i < h.coeffs.size(); ++i)
            os << "coeff_" << i << "," << fmt17(h.coeffs[i]) << "\n";
        std::cout << (h.stable ? "stable" : "unstable") << " (max Re = " << h.max_re << ")\n";
    } else if (cfg.mode == "map") {
        const LevelSetField f = scan(cfg.params, make_grid(cfg), cfg.expression);
        write_field_csv(f, path("map_" + cfg.expression + ".csv"));
        write_contours_csv(f, path("map_" + cfg.expression + "_contours.csv"));
        std::cout << "wrote " << f.values.rows() << "x" << f.values.cols() << " map with "
                  << f.contour_polylines.size() << " contour lines\n";
    } else if (cfg.mode == "dispersion") {
        const std::vector<double> ks =
            make_axis(cfg.k_range[0], cfg.k_range[1], cfg.k_count, cfg.k_log);
        const std::vector<double> re = dispersion_curve(cfg.params, ks, cfg.regime);
        write_curve_csv(ks, re, path("dispersion.csv"));
        std::cout << "wrote dispersion curve with " << ks.size() << " points\n";
    } else if (cfg.mode == "critical") {
        ScanGrid g = make_grid(cfg);
        g.param_values = {cfg.param_range[0], cfg.param_range[1]};
        g.k_values = {cfg.k_range[0], cfg.k_range[1]};
        const double pc = critical_parameter(cfg.params, g, cfg.expression);
        write_curve_csv({pc}, {0.0}, path("critical.csv"), cfg.param + "_critical,level");
        std::cout << "critical " << cfg.param << " = " << pc << "\n";
    } else if (cfg.mode == "patterning") {
        const PatterningSpace ps =
            patterning_space(cfg.params, {cfg.beta2_range[0], cfg.beta2_range[1]},
                             {cfg.beta3_range[0], cfg.beta3_range[1]}, cfg.n_beta2, cfg.n_beta3);
        for (const LevelSetField* f : {&ps.necessary_b, &ps.discriminant, &ps.homogeneous}) {
            write_field_csv(*f, path("patterning_" + f->label + ".csv"));
            write_contours_csv(*f, path("patterning_" + f->label + "_contours.csv"));
        }
        std::cout << "wrote patterning-space fields\n";
    } else if (cfg.mode == "simulate") {
        Scenario sc = make_scenario(cfg);
        FemSolver solver(std::move(sc));
        const RunResult rr = solver.run();
        write_probes_csv(rr.series, path("probes.csv"));
        write_mesh(solver.mesh(), path("mesh.txt"));
        for (std::size_t i = 0; i < rr.snapshots.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "snapshot_%04zu.vtk", i);
            write_vtk(solver.mesh(), solver.dofmap(), rr.snapshots[i].second, path(name));
        }
        write_vtk(solver.mesh(), solver.dofmap(), rr.final_state, path("final.vtk"));
        std::cout << "simulated to t = " << rr.final_state.time << ", " << rr.series.size()
                  << " samples\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear stability and finite element tools for poroelastic "
                 "chemotaxis-type pattern formation"};
    std::string mode, config_path, out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    app.add_option("mode", mode, "homog|map|dispersion|critical|patterning|simulate")->required();
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--seed", seed_override, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_given = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::string config_text;
    try {
        config_text = slurp(config_path);
    } catch (const porostab::IoError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    try {
        RunConfig cfg = parse_config(config_text);
        if (cfg.mode != mode)
            throw SchemaError("config mode '" + cfg.mode + "' does not match CLI mode '" + mode +
                              "'");
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_given) cfg.seed = seed_override;
        return run(cfg);
    } catch (const SchemaError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ValueError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
