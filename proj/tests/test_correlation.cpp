#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wqed/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace wqed;

TEST_CASE("cross kernel peaks at the photon flight time") {
    const double xa = 0.0, xb = 1.3, dt = 0.003;
    const auto grid = build_mode_grid(30.0, 1024, 3.0);
    const auto ker = build_kernel(make_comb({xa}, 1.0), make_comb({xb}, 1.0), grid, dt, 3.0);

    const auto& ab = ker.values[idx(Pair::ab)];
    int best = 0;
    for (int i = 1; i < ker.size(); ++i)
        if (std::abs(ab[static_cast<size_t>(i)]) > std::abs(ab[static_cast<size_t>(best)]))
            best = i;
    CHECK(std::abs(best * dt - (xb - xa)) <= dt + 1e-12);
}

TEST_CASE("auto kernel of a two-point comb shows delayed self-absorption") {
    const double d = 2.0, dt = 0.003;
    const auto grid = build_mode_grid(30.0, 1024, 4.0);
    const auto dist = make_comb({0.0, d}, 1.0);
    const auto ker = build_kernel(dist, dist, grid, dt, 4.0);

    // beyond the tau = 0 main lobe the tallest envelope peak sits at tau = d
    const int skip = static_cast<int>(std::round(2.5 * kPi / (30.0 * dt)));
    const auto peaks = kernel_peaks(ker.values[idx(Pair::aa)], dt, 30.0, 0.3, skip);
    REQUIRE(!peaks.empty());
    CHECK(std::abs(peaks.front().tau - d) <= 2.0 * dt);
}

TEST_CASE("cross kernel of two-point combs has three route peaks") {
    const double d = 2.0, off = 5.0, dt = 0.003;
    const auto grid = build_mode_grid(30.0, 1024, 8.2);
    const auto ker = build_kernel(make_comb({0.0, d}, 1.0), make_comb({off, off + d}, 1.0),
                                  grid, dt, 8.2);
    auto peaks = kernel_peaks(ker.values[idx(Pair::ab)], dt, 30.0, 0.3);
    REQUIRE(peaks.size() >= 3);
    peaks.resize(3);  // three tallest
    std::sort(peaks.begin(), peaks.end(),
              [](const KernelPeak& a, const KernelPeak& b) { return a.tau < b.tau; });
    const std::vector<double> expect{off - d, off, off + d};
    for (size_t i = 0; i < 3; ++i)
        CHECK_MESSAGE(std::abs(peaks[i].tau - expect[i]) <= 2.0 * dt,
                      "route peak ", i, " at ", peaks[i].tau, " expected ", expect[i]);
}

TEST_CASE("hermitian symmetry alpha_nm(-tau) = conj(alpha_mn(tau))") {
    const auto grid = build_mode_grid(12.0, 256, 2.0);
    const auto da = make_comb({0.0, 0.4}, 0.8);
    const auto db = make_gaussian(1.1, 0.3, 1.2);
    const auto ker = build_kernel(da, db, grid, 0.005, 2.0);
    // alpha_mn(-tau) recomputed with the opposite phase sign
    const auto ga = fourier_coupling(da, grid), gb = fourier_coupling(db, grid);
    const auto neg = build_kernel_from_couplings(ga, gb, grid, 0.005, 2.0, +1.0);
    for (int i = 0; i < ker.size(); i += 7) {
        const Complex lhs = neg.values[idx(Pair::ab)][static_cast<size_t>(i)];  // alpha_ab(-tau)
        const Complex rhs = std::conj(ker.values[idx(Pair::ba)][static_cast<size_t>(i)]);
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
    // alpha_mm(0) real and nonnegative
    CHECK(ker.values[idx(Pair::aa)][0].imag() == doctest::Approx(0.0));
    CHECK(ker.values[idx(Pair::aa)][0].real() >= 0.0);
}

TEST_CASE("power-spectrum positivity proxy") {
    const auto grid = build_mode_grid(15.0, 512, 2.0);
    const auto dist = make_comb({0.0, 0.5, 1.0}, 1.0);
    const double dt = 0.005;
    const auto ker = build_kernel(dist, dist, grid, dt, 2.0);
    const auto& aa = ker.values[idx(Pair::aa)];
    const int n = ker.size();

    // Bartlett-weighted transform over the symmetric window, using
    // alpha(-tau) = conj(alpha(tau)); the triangular lag window makes the
    // estimate a Fejer smoothing of the nonnegative power spectrum.
    double max_s = 0.0, min_s = 0.0;
    for (int q = -40; q <= 40; ++q) {
        const double w = 2.0 * kPi * q / (2.0 * n * dt);
        double s = aa[0].real();
        for (int i = 1; i < n; ++i) {
            const double lag_w = 1.0 - static_cast<double>(i) / n;
            s += 2.0 * lag_w *
                 (aa[static_cast<size_t>(i)] * std::exp(Complex{0.0, w * i * dt})).real();
        }
        max_s = std::max(max_s, s);
        min_s = std::min(min_s, s);
    }
    CHECK(min_s >= -1e-6 * max_s);
}

TEST_CASE("comb kernels decompose into translated point kernels") {
    const auto grid = build_mode_grid(10.0, 128, 1.5);
    const double dt = 0.01;
    const std::vector<double> xs{0.2, 0.9};
    const auto comb = make_comb(xs, 1.0);
    const auto ker = build_kernel(comb, comb, grid, dt, 1.5);

    // bilinear expansion over point pairs, weights (g0 / Ntilde)^2
    std::vector<CorrelationKernel> parts;
    for (double xi : xs)
        for (double xj : xs)
            parts.push_back(
                build_kernel(make_comb({xi}, 0.5), make_comb({xj}, 0.5), grid, dt, 1.5));
    for (int i = 0; i < ker.size(); i += 5) {
        Complex sum{0.0, 0.0};
        for (const auto& p : parts) sum += p.values[idx(Pair::ab)][static_cast<size_t>(i)];
        CHECK(std::abs(sum - ker.values[idx(Pair::aa)][static_cast<size_t>(i)]) < 1e-10);
    }
}

TEST_CASE("under-resolved tau grid is rejected") {
    const auto grid = build_mode_grid(30.0, 128, 1.0);
    CHECK_THROWS_AS(build_kernel(make_comb({0.0}, 1.0), make_comb({0.0}, 1.0), grid, 0.01, 1.0),
                    config_error);
}

TEST_CASE("thermal pair: cold limit, toy grid value, monotone occupation") {
    const double dt = 0.005;
    const auto grid = build_mode_grid(10.0, 128, 2.0);
    const auto dist = make_comb({0.0}, 1.0);

    const auto cold = build_thermal_pair(dist, dist, grid, 1e6, dt, 2.0);
    double amax = 0.0;
    for (const auto& v : cold.alpha_prime.values[idx(Pair::aa)])
        amax = std::max(amax, std::abs(v));
    CHECK(amax < 1e-4 * std::abs(cold.alpha.values[idx(Pair::aa)][0]));

    // two-mode toy grid: alpha'(0) = 2 nbar |G|^2
    const auto toy = build_mode_grid(1.0, 2, 0.5);
    const double beta = 1.7;
    const auto pair = build_thermal_pair(dist, dist, toy, beta, 0.01, 0.5);
    const auto g = fourier_coupling(dist, toy);
    const double nbar = 1.0 / std::expm1(beta * 1.0);
    CHECK(pair.alpha_prime.values[idx(Pair::aa)][0].real() ==
          doctest::Approx(2.0 * nbar * std::norm(g[0])).epsilon(1e-12));

    // alpha'(0) increases with temperature
    double prev = 0.0;
    for (double b : {4.0, 2.0, 1.0}) {
        const auto p = build_thermal_pair(dist, dist, grid, b, dt, 2.0);
        const double v = p.alpha_prime.values[idx(Pair::aa)][0].real();
        CHECK(v > prev);
        prev = v;
    }

    CHECK_THROWS_AS(build_thermal_pair(dist, dist, grid, -1.0, dt, 2.0), config_error);
}

TEST_CASE("squeezed pair: zero profile, proportionality, tanh scaling") {
    const double dt = 0.005;
    const auto grid = build_mode_grid(10.0, 128, 1.0);
    const auto dist = make_comb({0.0}, 1.0);

    SqueezeProfile off;
    const auto none = build_squeezed_pair(dist, dist, grid, off, dt, 1.0);
    for (const auto& v : none.beta.values[idx(Pair::aa)]) CHECK(std::abs(v) == 0.0);

    // real flat G at x = 0: beta(tau) = tanh(r) alpha(tau)
    SqueezeProfile flat;
    flat.r = 0.8;
    const auto sq = build_squeezed_pair(dist, dist, grid, flat, dt, 1.0);
    for (int i = 0; i < sq.alpha.size(); i += 9) {
        const Complex b = sq.beta.values[idx(Pair::aa)][static_cast<size_t>(i)];
        const Complex a = sq.alpha.values[idx(Pair::aa)][static_cast<size_t>(i)];
        CHECK(std::abs(b - std::tanh(0.8) * a) < 1e-12);
    }

    SqueezeProfile half;
    half.r = 0.5;
    SqueezeProfile one;
    one.r = 1.0;
    const auto s1 = build_squeezed_pair(dist, dist, grid, half, dt, 1.0);
    const auto s2 = build_squeezed_pair(dist, dist, grid, one, dt, 1.0);
    const double ratio = std::tanh(1.0) / std::tanh(0.5);
    for (int i = 0; i < s1.beta.size(); i += 11) {
        const Complex b1 = s1.beta.values[idx(Pair::ab)][static_cast<size_t>(i)];
        const Complex b2 = s2.beta.values[idx(Pair::ab)][static_cast<size_t>(i)];
        CHECK(std::abs(b2 - ratio * b1) < 1e-12);
    }

    // beta extends to 2 t_max for the reflected two-time domain
    CHECK(s1.beta.t_max == doctest::Approx(2.0));
}

TEST_CASE("kernel csv export") {
    const auto grid = build_mode_grid(5.0, 32, 0.5);
    const auto ker =
        build_kernel(make_comb({0.0}, 1.0), make_comb({0.3}, 1.0), grid, 0.01, 0.5);
    write_kernel_csv(ker, "/tmp/wqed_test_kernel.csv");
    std::ifstream in("/tmp/wqed_test_kernel.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "tau,re_aa,im_aa,re_ab,im_ab,re_ba,im_ba,re_bb,im_bb");
}
