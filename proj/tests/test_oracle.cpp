#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wqed/oracle.hpp"

#include <cmath>

using namespace wqed;

TEST_CASE("decoupled amplitudes stay constant") {
    const auto grid = build_mode_grid(5.0, 32, 2.0);
    std::vector<Complex> zeros(static_cast<size_t>(grid.size()), Complex{0.0, 0.0});
    const auto out = solve_single_excitation(zeros, zeros, grid, 1.0, 1.0, 1.0, 0.0, 0.01, 2.0);
    for (size_t i = 0; i < out.times.size(); i += 20) {
        CHECK(std::abs(out.amplitudes[i][0] - 1.0) < 1e-12);
        CHECK(std::abs(out.amplitudes[i][1]) < 1e-12);
    }
}

TEST_CASE("two-mode toy grid gives the resonant Rabi form") {
    // single atom coupled to ±k0 with omega_k0 = omega_a: |A(t)| = |cos(sqrt(2)|G| t)|
    ModeGrid toy;
    toy.k = {-1.0, 1.0};
    toy.omega = {1.0, 1.0};
    toy.dk = 2.0;
    toy.k_max = 1.0;
    toy.recurrence_time = kPi;

    const Complex g{0.3, 0.0};
    std::vector<Complex> ga{g, g};
    std::vector<Complex> gb{Complex{0.0, 0.0}, Complex{0.0, 0.0}};
    const double dt = 0.002, t_max = 6.0;
    // interaction-picture equations carry no recurrence issue for this closed system
    const auto out = solve_single_excitation(ga, gb, toy, 1.0, 1.0, 1.0, 0.0, dt, t_max);
    const double gr = std::sqrt(2.0) * std::abs(g);
    double worst = 0.0;
    for (size_t i = 0; i < out.times.size(); i += 100) {
        const double t = out.times[i];
        worst = std::max(worst,
                         std::abs(std::abs(out.amplitudes[i][0]) - std::abs(std::cos(gr * t))));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("single-excitation reduced state has no |ee> weight and matches the master path") {
    const double gamma = 0.3, dt = 0.01, t_max = 4.0;
    const auto grid = build_mode_grid(10.0, 200, t_max);
    const auto da = make_comb({0.0, 0.7}, strength_for_rate(gamma));
    const auto db = make_comb({1.6, 2.3}, strength_for_rate(gamma));
    const auto ga = fourier_coupling(da, grid), gb = fourier_coupling(db, grid);
    const auto h = atom_hamiltonian(1.0, 1.0);

    const auto oracle = solve_single_excitation(ga, gb, grid, 1.0, 1.0, 1.0, 0.0, dt, t_max);
    const auto ker = build_kernel(da, db, grid, dt, t_max);
    const auto of = evolve_matrix_field(ker, h, dt, t_max);
    const auto master = master_equation_solve(pure_density(basis_ket(kEG)), of, h, dt, t_max);

    double worst_pop = 0.0, worst_conc = 0.0;
    for (size_t i = 0; i < master.rho.size(); i += 20) {
        CHECK(oracle.reduced.rho[i](kEE, kEE).real() == 0.0);
        const auto pm = populations(master.rho[i]);
        const auto po = populations(oracle.reduced.rho[i]);
        worst_pop = std::max({worst_pop, std::abs(pm.eg - po.eg), std::abs(pm.ge - po.ge),
                              std::abs(pm.gg - po.gg)});
        worst_conc = std::max(worst_conc, std::abs(concurrence(master.rho[i]) -
                                                   concurrence(oracle.reduced.rho[i])));
    }
    CHECK(worst_pop < 1e-2);
    CHECK(worst_conc < 1e-2);
}

TEST_CASE("norm drift guard trips on an unresolved step") {
    const auto grid = build_mode_grid(10.0, 64, 3.0);
    const auto d = make_comb({0.0}, 3.0);
    const auto g = fourier_coupling(d, grid);
    CHECK_THROWS_AS(solve_single_excitation(g, g, grid, 1.0, 1.0, 1.0, 0.0, 0.5, 3.0),
                    integrator_error);
}

TEST_CASE("normalized initial state is required") {
    const auto grid = build_mode_grid(5.0, 16, 1.0);
    std::vector<Complex> zeros(static_cast<size_t>(grid.size()), Complex{0.0, 0.0});
    CHECK_THROWS_AS(solve_single_excitation(zeros, zeros, grid, 1.0, 1.0, 0.7, 0.0, 0.01, 1.0),
                    config_error);
}

TEST_CASE("double excitation: decoupled state is frozen") {
    const auto grid = build_mode_grid(5.0, 16, 1.0);
    std::vector<Complex> zeros(static_cast<size_t>(grid.size()), Complex{0.0, 0.0});
    const auto out = solve_double_excitation(zeros, zeros, grid, 1.0, 1.0, 0.01, 1.0);
    CHECK(std::abs(out.c_ab.back() - 1.0) < 1e-12);
}

TEST_CASE("double excitation short-time law |C|^2 = 1 - sum|G|^2 t^2") {
    const double gamma = 0.5;
    const auto grid = build_mode_grid(10.0, 128, 1.0);
    const auto da = make_gaussian(0.0, 0.2, strength_for_rate(gamma));
    const auto db = make_gaussian(0.9, 0.2, strength_for_rate(gamma));
    const auto ga = fourier_coupling(da, grid), gb = fourier_coupling(db, grid);
    double sum_g2 = 0.0;
    for (const auto& v : ga) sum_g2 += std::norm(v);
    for (const auto& v : gb) sum_g2 += std::norm(v);

    const double dt = 0.002, t_max = 0.1;
    const auto out = solve_double_excitation(ga, gb, grid, 1.0, 1.0, dt, t_max);
    for (size_t i = 10; i < out.times.size(); i += 10) {
        const double t = out.times[i];
        const double predicted = 1.0 - sum_g2 * t * t;
        const double measured = std::norm(out.c_ab[i]);
        CHECK(std::abs(measured - predicted) < 0.01 * (1.0 - predicted) + 1e-12);
    }
}

TEST_CASE("double excitation: pair amplitudes are symmetric and the mode cap guards memory") {
    const auto grid = build_mode_grid(6.0, 32, 0.6);
    const auto d = make_comb({0.0}, 0.6);
    const auto g = fourier_coupling(d, grid);
    const auto out = solve_double_excitation(g, g, grid, 1.0, 1.0, 0.005, 0.6);
    for (int k = 0; k < 6; ++k)
        for (int kp = 0; kp < 6; ++kp)
            CHECK(out.a2(k, kp) == out.a2(kp, k));

    const auto big = build_mode_grid(6.0, 64, 0.5);
    const auto gbig = fourier_coupling(d, big);
    CHECK_THROWS_AS(solve_double_excitation(gbig, gbig, big, 1.0, 1.0, 0.01, 0.5, 32),
                    config_error);
}

TEST_CASE("double excitation concurrence tracks the master path at short times") {
    const double gamma = 0.5, dt = 0.005, t_max = 1.5;
    const auto grid = build_mode_grid(8.0, 100, t_max);
    const auto da = make_gaussian(0.0, 0.1, strength_for_rate(gamma));
    const auto db = make_gaussian(0.5, 0.1, strength_for_rate(gamma));
    const auto ga = fourier_coupling(da, grid), gb = fourier_coupling(db, grid);
    const auto h = atom_hamiltonian(1.0, 1.0);

    const auto oracle = solve_double_excitation(ga, gb, grid, 1.0, 1.0, dt, t_max);
    const auto ker = build_kernel(da, db, grid, dt, t_max);
    const auto of = evolve_matrix_field(ker, h, dt, t_max);
    const auto master = master_equation_solve(pure_density(basis_ket(kEE)), of, h, dt, t_max);
    double worst = 0.0;
    for (size_t i = 0; i < master.rho.size(); i += 20)
        worst = std::max(worst, std::abs(concurrence(master.rho[i]) -
                                         concurrence(oracle.reduced.rho[i])));
    CHECK(worst < 0.05);
}
