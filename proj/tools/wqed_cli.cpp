// wqed_cli.cpp — batch experiment runner for the two-giant-atom waveguide simulator
//
// Subcommands: correlate, simulate, sweep, noise-test, validate. Each takes a JSON
// config (schema in the README); --output (or WQED_OUTPUT_DIR) overrides the
// output directory.
#include "wqed/wqed.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

wqed::ExperimentConfig load_with_overrides(const std::string& path,
                                           const std::string& out_override) {
    wqed::ExperimentConfig cfg = wqed::load_config(path);
    if (!out_override.empty()) {
        cfg.out_dir = out_override;
    } else if (const char* env = std::getenv("WQED_OUTPUT_DIR"); env && *env) {
        cfg.out_dir = env;
    }
    return cfg;
}

// Cross-checks the master-equation path against the dressed-state solvers on the
// configured scenario. Returns the worst deviations.
int run_validate(const wqed::ExperimentConfig& cfg_in) {
    using namespace wqed;
    ExperimentConfig cfg = cfg_in;
    if (cfg.beta || cfg.squeeze) {
        std::cerr << "validate: thermal/squeezed scenarios have no dressed-state oracle\n";
        return 2;
    }
    Scenario sc = build_scenario(cfg);
    const auto of = evolve_matrix_field(sc.kernel, sc.h_atoms, cfg.dt, cfg.t_max);

    const bool single = std::abs(cfg.initial_vector(kEE)) < 1e-12;
    const Matrix4c rho0 = pure_density(cfg.initial_vector);
    const auto master = master_equation_solve(rho0, of, sc.h_atoms, cfg.dt, cfg.t_max);

    double worst_pop = 0.0, worst_conc = 0.0;
    if (single) {
        const auto sx = solve_single_excitation(sc.ga, sc.gb, sc.grid, cfg.omega_a, cfg.omega_b,
                                                cfg.initial_vector(kEG), cfg.initial_vector(kGE),
                                                cfg.dt, cfg.t_max, cfg.initial_vector(kGG));
        for (size_t i = 0; i < master.times.size(); ++i) {
            const auto pm = populations(master.rho[i]);
            const auto po = populations(sx.reduced.rho[i]);
            worst_pop = std::max({worst_pop, std::abs(pm.eg - po.eg), std::abs(pm.ge - po.ge),
                                  std::abs(pm.gg - po.gg)});
            worst_conc = std::max(worst_conc, std::abs(concurrence(master.rho[i]) -
                                                       concurrence(sx.reduced.rho[i])));
        }
        std::cout << "validate (single excitation): max |dP| = " << worst_pop
                  << ", max |dC| = " << worst_conc << "\n";
    } else {
        const auto dx = solve_double_excitation(sc.ga, sc.gb, sc.grid, cfg.omega_a, cfg.omega_b,
                                                cfg.dt, cfg.t_max);
        for (size_t i = 0; i < master.times.size(); ++i) {
            const auto pm = populations(master.rho[i]);
            const auto po = populations(dx.reduced.rho[i]);
            worst_pop = std::max({worst_pop, std::abs(pm.ee - po.ee)});
            worst_conc = std::max(worst_conc, std::abs(concurrence(master.rho[i]) -
                                                       concurrence(dx.reduced.rho[i])));
        }
        std::cout << "validate (double excitation): max |dP_ee| = " << worst_pop
                  << ", max |dC| = " << worst_conc << "\n";
    }
    const double tol_pop = single ? 1e-2 : 5e-2;
    const double tol_conc = single ? 1e-2 : 5e-2;
    const bool ok = worst_pop <= tol_pop && worst_conc <= tol_conc;
    std::cout << (ok ? "validate: OK" : "validate: FAILED") << "\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wqed — giant atoms coupled to a 1D waveguide: SSE trajectories, "
                 "master equation, and dressed-state oracles"};
    app.require_subcommand(1);

    std::string config_path, out_override;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "JSON config file")->required();
        sub->add_option("-o,--output", out_override, "output directory override");
    };

    auto* c_correlate = app.add_subcommand("correlate", "tabulate correlation kernels to CSV");
    auto* c_simulate = app.add_subcommand("simulate", "run one scenario to CSV + manifest");
    auto* c_sweep = app.add_subcommand("sweep", "Cartesian sweep over configured axes");
    auto* c_noise = app.add_subcommand("noise-test", "empirical vs tabulated noise covariances");
    auto* c_validate = app.add_subcommand("validate", "dressed-state oracle cross-checks");
    for (auto* sub : {c_correlate, c_simulate, c_sweep, c_noise, c_validate}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_with_overrides(config_path, out_override);
        if (c_correlate->parsed()) {
            for (const auto& f : wqed::correlate(cfg)) std::cout << f << "\n";
        } else if (c_simulate->parsed()) {
            const auto r = wqed::run(cfg);
            for (const auto& f : r.files) std::cout << f << "\n";
            std::cout << "c_max = " << r.c_max << ", c(t_probe) = " << r.c_at_probe << "\n";
        } else if (c_sweep->parsed()) {
            const auto r = wqed::sweep(cfg);
            std::cout << r.surface_csv << " (" << r.cells.size() << " cells)\n";
        } else if (c_noise->parsed()) {
            std::cout << wqed::noise_test(cfg) << "\n";
        } else if (c_validate->parsed()) {
            return run_validate(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
