#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_oracles.hpp"
#include "wqed/coupling.hpp"

#include <cmath>
#include <random>

using namespace wqed;

TEST_CASE("mode grid arithmetic and horizon guard") {
    const auto grid = build_mode_grid(20.0, 4000, 10.0);
    CHECK(grid.dk == doctest::Approx(40.0 / 3999.0));
    CHECK(grid.recurrence_time == doctest::Approx(2.0 * kPi * 3999.0 / 40.0));
    CHECK(grid.k.front() == doctest::Approx(-20.0));
    CHECK(grid.k.back() == doctest::Approx(20.0));

    // t_rec = 2 pi / (10/9) ~ 5.65 < 2 * 100
    CHECK_THROWS_AS(build_mode_grid(5.0, 10, 100.0), config_error);
    CHECK_THROWS_WITH_AS(build_mode_grid(5.0, 10, 100.0),
                         doctest::Contains("t_max must be <"), config_error);
    CHECK_THROWS_AS(build_mode_grid(5.0, 11, 1.0), config_error);  // odd n
    CHECK_THROWS_AS(build_mode_grid(-1.0, 10, 1.0), config_error);
}

TEST_CASE("single point comb transform is flat and real") {
    const auto grid = build_mode_grid(10.0, 64, 1.0);
    const auto g = fourier_coupling(make_comb({0.0}, 1.0), grid);
    const double w = std::sqrt(grid.dk / (2.0 * kPi));
    for (const auto& v : g) {
        CHECK(v.real() == doctest::Approx(w).epsilon(1e-14));
        CHECK(v.imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("gaussian transform matches closed form and quadrature") {
    const auto grid = build_mode_grid(8.0, 128, 1.0);
    const double s = 1.0, g0 = 1.0;
    const auto g = fourier_coupling(make_gaussian(0.0, s, g0), grid);
    const double w = std::sqrt(grid.dk / (2.0 * kPi));
    for (int j = 0; j < grid.size(); ++j) {
        const double k = grid.k[static_cast<size_t>(j)];
        CHECK(std::abs(g[static_cast<size_t>(j)] - w * std::exp(-0.5 * k * k)) < 1e-12);

        // independent Simpson quadrature of the defining integral
        const Complex quad = testo::simpson(
            [&](double x) {
                return g0 / (s * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * x * x / (s * s)) *
                       std::exp(Complex{0.0, -k * x});
            },
            -10.0 * s, 10.0 * s, 4000);
        CHECK(std::abs(g[static_cast<size_t>(j)] - w * quad) < 1e-8);
    }
}

TEST_CASE("narrow double gaussian approaches the two-point comb limit") {
    const auto grid = build_mode_grid(6.0, 64, 1.0);
    const double x1 = 0.3, x2 = 1.7;
    const auto g = fourier_coupling(make_double_gaussian(x1, x2, 1e-4, 1.0), grid);
    const double w = std::sqrt(grid.dk / (2.0 * kPi));
    for (int j = 0; j < grid.size(); ++j) {
        const double k = grid.k[static_cast<size_t>(j)];
        const Complex comb = std::exp(Complex{0.0, -k * x1}) + std::exp(Complex{0.0, -k * x2});
        CHECK(std::abs(g[static_cast<size_t>(j)] / w - comb) < 1e-6);
    }
}

TEST_CASE("modulus is even in k for symmetric distributions") {
    const auto grid = build_mode_grid(7.0, 64, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        const double x = u(rng);
        const auto gc = fourier_coupling(make_comb({-x, x}, u(rng)), grid);
        const auto gg = fourier_coupling(make_gaussian(0.0, u(rng), u(rng)), grid);
        const int n = grid.size();
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(gc[static_cast<size_t>(j)]) ==
                  doctest::Approx(std::abs(gc[static_cast<size_t>(n - 1 - j)])).epsilon(1e-12));
            CHECK(std::abs(gg[static_cast<size_t>(j)]) ==
                  doctest::Approx(std::abs(gg[static_cast<size_t>(n - 1 - j)])).epsilon(1e-12));
        }
    }
}

TEST_CASE("Parseval consistency for gaussians") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.05, 0.5), ug(0.3, 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        const double s = us(rng), g0 = ug(rng);
        const double k_max = 10.0 / s;
        const auto grid = build_mode_grid(k_max, 2000, 1.0);
        const auto g = fourier_coupling(make_gaussian(0.4, s, g0), grid);
        double sum = 0.0;
        for (const auto& v : g) sum += std::norm(v);
        const double exact = g0 * g0 / (2.0 * s * std::sqrt(kPi));
        CHECK(sum == doctest::Approx(exact).epsilon(1e-4));
    }
}

TEST_CASE("translation multiplies the transform by a pure phase") {
    const auto grid = build_mode_grid(5.0, 32, 1.0);
    const double shift = 0.83;
    const auto base = make_double_gaussian(0.1, 1.2, 0.4, 0.9);
    const auto g1 = fourier_coupling(base, grid);
    const auto g2 = fourier_coupling(translated(base, shift), grid);
    for (int j = 0; j < grid.size(); ++j) {
        const Complex ph = std::exp(Complex{0.0, -grid.k[static_cast<size_t>(j)] * shift});
        CHECK(std::abs(g2[static_cast<size_t>(j)] - ph * g1[static_cast<size_t>(j)]) < 1e-14);
    }
}

TEST_CASE("separation spec validates congruent double peaks") {
    const auto a = make_double_gaussian(0.0, kPi, 0.1, 1.0);
    const auto b = make_double_gaussian(0.5, kPi + 0.5, 0.1, 1.0);
    CHECK(separation(a, b).delta_x_ab == doctest::Approx(0.5));
    const auto bad = make_double_gaussian(0.5, kPi + 0.7, 0.1, 1.0);
    CHECK_THROWS_AS(separation(a, bad), config_error);
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(make_gaussian(0.0, -1.0, 1.0).validate(), config_error);
    CHECK_THROWS_AS(make_comb({}, 1.0).validate(), config_error);
    CHECK_THROWS_AS(make_comb_grid(0.0, 0, 0.5, 1.0), config_error);
}
