// correlation.hpp — tabulated auto-/cross-correlation kernels of the waveguide bath
//
// alpha_{mu nu}(tau) = sum_k conj(G_{mu k}) G_{nu k} exp(-i omega_k tau) on a uniform
// tau grid. The kernels are stationary (|G| and omega are time independent), so a
// single table per ordered pair covers every (t, s) with tau = t - s >= 0; negative
// lags follow from alpha_{nu mu}(-tau) = conj(alpha_{mu nu}(tau)).
#pragma once

#include "wqed/coupling.hpp"
#include "wqed/errors.hpp"
#include "wqed/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace wqed {

struct CorrelationKernel {
    double dt = 0.0;
    double t_max = 0.0;
    // values[pair][i] = alpha_pair(i * dt), pair in {aa, ab, ba, bb}
    std::array<std::vector<Complex>, 4> values;

    // Exact delta-kernel mode: alpha_pair(tau) = strength * delta(tau). Convolutions
    // then reduce to the half-weight boundary term (strength/2) * f(t).
    bool is_delta = false;
    std::array<double, 4> delta_strength{0.0, 0.0, 0.0, 0.0};

    int size() const { return static_cast<int>(values[0].size()); }

    // Linear interpolation in tau >= 0.
    Complex at(Pair p, double tau) const {
        if (is_delta) throw config_error("delta kernel has no pointwise values");
        if (tau < 0.0) tau = 0.0;
        const auto& v = values[static_cast<size_t>(idx(p))];
        const double x = tau / dt;
        const int i = static_cast<int>(x);
        if (i >= size() - 1) return v.back();
        const double f = x - i;
        return (1.0 - f) * v[static_cast<size_t>(i)] + f * v[static_cast<size_t>(i + 1)];
    }

    Complex at_index(Pair p, int i) const {
        return values[static_cast<size_t>(idx(p))][static_cast<size_t>(i)];
    }
};

namespace detail {

// sum_k conj(Ga_k)^(maybe) ... generic mode-sum tabulator.
// sign = -1 gives exp(-i omega tau) (vacuum), +1 gives exp(+i omega tau)
// (thermal anomalous channel).
inline std::vector<Complex> tabulate_pair(const std::vector<Complex>& gmu,
                                          const std::vector<Complex>& gnu,
                                          const ModeGrid& grid, double dt, int n_tau,
                                          double sign, bool conjugate_first) {
    std::vector<Complex> out(static_cast<size_t>(n_tau), Complex{0.0, 0.0});
    const int nk = grid.size();
    std::vector<Complex> phase(static_cast<size_t>(nk)), step(static_cast<size_t>(nk)),
        weight(static_cast<size_t>(nk));
    for (int j = 0; j < nk; ++j) {
        const auto js = static_cast<size_t>(j);
        weight[js] = (conjugate_first ? std::conj(gmu[js]) : gmu[js]) * gnu[js];
        phase[js] = Complex{1.0, 0.0};
        step[js] = std::exp(Complex{0.0, sign * grid.omega[js] * dt});
    }
    for (int i = 0; i < n_tau; ++i) {
        Complex acc{0.0, 0.0};
        for (int j = 0; j < nk; ++j) {
            const auto js = static_cast<size_t>(j);
            acc += weight[js] * phase[js];
            phase[js] *= step[js];
        }
        out[static_cast<size_t>(i)] = acc;
    }
    return out;
}

inline void require_resolved(double dt, const ModeGrid& grid) {
    const double limit = 0.1 / grid.k_max;  // omega(k_max) = k_max with c = 1
    if (dt > limit + 1e-15)
        throw config_error("dt = " + std::to_string(dt) +
                           " under-resolves the fastest bath phase; need dt <= " +
                           std::to_string(limit));
}

} // namespace detail

// Tabulate the four vacuum kernels for a pair of distributions on [0, t_max].
inline CorrelationKernel build_kernel(const CouplingDistribution& dist_a,
                                      const CouplingDistribution& dist_b,
                                      const ModeGrid& grid, double dt, double t_max) {
    detail::require_resolved(dt, grid);
    CorrelationKernel ker;
    ker.dt = dt;
    ker.t_max = t_max;
    const int n_tau = static_cast<int>(std::round(t_max / dt)) + 1;
    const auto ga = fourier_coupling(dist_a, grid);
    const auto gb = fourier_coupling(dist_b, grid);
    const std::array<const std::vector<Complex>*, 2> g{&ga, &gb};
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu)
            ker.values[static_cast<size_t>(2 * mu + nu)] = detail::tabulate_pair(
                *g[static_cast<size_t>(mu)], *g[static_cast<size_t>(nu)], grid, dt, n_tau,
                -1.0, /*conjugate_first=*/true);
    return ker;
}

// Same grid and pairs, directly from precomputed per-mode couplings.
inline CorrelationKernel build_kernel_from_couplings(const std::vector<Complex>& ga,
                                                     const std::vector<Complex>& gb,
                                                     const ModeGrid& grid, double dt,
                                                     double t_max, double sign = -1.0) {
    detail::require_resolved(dt, grid);
    CorrelationKernel ker;
    ker.dt = dt;
    ker.t_max = t_max;
    const int n_tau = static_cast<int>(std::round(t_max / dt)) + 1;
    const std::array<const std::vector<Complex>*, 2> g{&ga, &gb};
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu)
            ker.values[static_cast<size_t>(2 * mu + nu)] = detail::tabulate_pair(
                *g[static_cast<size_t>(mu)], *g[static_cast<size_t>(nu)], grid, dt, n_tau,
                sign, /*conjugate_first=*/true);
    return ker;
}

// alpha_pair(tau) = gamma * delta(tau) for every pair, as the analytic broadband limit.
inline CorrelationKernel delta_kernel(double gamma, double dt, double t_max) {
    CorrelationKernel ker;
    ker.dt = dt;
    ker.t_max = t_max;
    ker.is_delta = true;
    ker.delta_strength = {gamma, gamma, gamma, gamma};
    return ker;
}

// Delta kernel with per-pair strengths {aa, ab, ba, bb}.
inline CorrelationKernel delta_kernel_pairs(const std::array<double, 4>& gamma, double dt,
                                            double t_max) {
    CorrelationKernel ker;
    ker.dt = dt;
    ker.t_max = t_max;
    ker.is_delta = true;
    ker.delta_strength = gamma;
    return ker;
}

// Broadband family with shrinking support: alpha(tau) = gamma * N_sigma exp(-tau^2/2sigma^2)
// for every pair, normalized so the full-line integral is gamma. As sigma -> 0 this
// approaches the delta kernel with its half-weight boundary convention.
inline CorrelationKernel gaussian_kernel(double gamma, double sigma, double dt, double t_max) {
    if (!(sigma > 0.0)) throw config_error("gaussian kernel width must be > 0");
    CorrelationKernel ker;
    ker.dt = dt;
    ker.t_max = t_max;
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    std::vector<Complex> v(static_cast<size_t>(n));
    const double norm = gamma / (sigma * std::sqrt(2.0 * kPi));
    for (int i = 0; i < n; ++i) {
        const double tau = i * dt;
        v[static_cast<size_t>(i)] = norm * std::exp(-0.5 * tau * tau / (sigma * sigma));
    }
    for (auto& pair : ker.values) pair = v;
    return ker;
}

// ------------------------------ thermal --------------------------------------

// Bose-Einstein occupation with a low-frequency floor: modes below omega_floor are
// capped at n(omega_floor) to keep the ultra-low-frequency occupation finite.
inline double bose_occupation(double omega, double beta, double omega_floor) {
    const double w = std::max(omega, omega_floor);
    const double x = beta * w;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

// Kernels after the Bogoliubov mapping of a thermal waveguide state:
//   alpha  from f_k = sqrt(n_k + 1) G_k, phase exp(-i omega tau)
//   alpha' from h_k = sqrt(n_k) G_k,     phase exp(+i omega tau)
// alpha' tabulates M[w_{mu t} w*_{nu s}]; the +i sign follows from the
// negative-frequency fictitious modes and gives detailed balance.
struct ThermalKernelPair {
    CorrelationKernel alpha;
    CorrelationKernel alpha_prime;
    double beta = 0.0;
    std::array<std::vector<Complex>, 2> f;  // per atom, per mode
    std::array<std::vector<Complex>, 2> h;
};

inline ThermalKernelPair build_thermal_pair(const CouplingDistribution& dist_a,
                                            const CouplingDistribution& dist_b,
                                            const ModeGrid& grid, double beta, double dt,
                                            double t_max, double omega_floor = -1.0) {
    if (!(beta > 0.0)) throw config_error("inverse temperature beta must be > 0");
    if (omega_floor < 0.0) omega_floor = grid.min_omega();
    ThermalKernelPair pair;
    pair.beta = beta;
    const std::array<std::vector<Complex>, 2> g{fourier_coupling(dist_a, grid),
                                                fourier_coupling(dist_b, grid)};
    for (int mu = 0; mu < 2; ++mu) {
        const auto mus = static_cast<size_t>(mu);
        pair.f[mus].resize(g[mus].size());
        pair.h[mus].resize(g[mus].size());
        for (size_t j = 0; j < g[mus].size(); ++j) {
            const double n = bose_occupation(grid.omega[j], beta, omega_floor);
            pair.f[mus][j] = std::sqrt(n + 1.0) * g[mus][j];
            pair.h[mus][j] = std::sqrt(n) * g[mus][j];
        }
    }
    pair.alpha = build_kernel_from_couplings(pair.f[0], pair.f[1], grid, dt, t_max, -1.0);
    pair.alpha_prime = build_kernel_from_couplings(pair.h[0], pair.h[1], grid, dt, t_max, +1.0);
    return pair;
}

// ------------------------------ squeezed -------------------------------------

// Per-mode squeeze amplitude r_k: either constant or a Gaussian band around ±k_c.
struct SqueezeProfile {
    double r = 0.0;
    bool banded = false;
    double k_center = 0.0;
    double band_width = 1.0;

    double at(double k) const {
        if (!banded) return r;
        const double d = std::abs(k) - k_center;
        return r * std::exp(-0.5 * d * d / (band_width * band_width));
    }
};

// beta_{mu nu}(tau) = sum_k G_{mu k} G_{nu k} tanh(r_k) exp(-i omega_k tau)
// (no conjugation on either coupling). Tabulated out to 2 t_max: the squeezed
// two-time domain s in [-t, 0] probes lags tau = t - s up to 2 t_max.
struct SqueezedKernelPair {
    CorrelationKernel alpha;  // as vacuum
    CorrelationKernel beta;
    SqueezeProfile profile;
    std::array<std::vector<Complex>, 2> g;       // couplings
    std::vector<double> tanh_r;                  // per mode
};

inline SqueezedKernelPair build_squeezed_pair(const CouplingDistribution& dist_a,
                                              const CouplingDistribution& dist_b,
                                              const ModeGrid& grid,
                                              const SqueezeProfile& profile, double dt,
                                              double t_max) {
    SqueezedKernelPair pair;
    pair.profile = profile;
    pair.g = {fourier_coupling(dist_a, grid), fourier_coupling(dist_b, grid)};
    pair.tanh_r.resize(static_cast<size_t>(grid.size()));
    for (int j = 0; j < grid.size(); ++j) {
        const double r = profile.at(grid.k[static_cast<size_t>(j)]);
        if (!std::isfinite(r)) throw config_error("squeeze profile produced non-finite r_k");
        pair.tanh_r[static_cast<size_t>(j)] = std::tanh(r);
    }
    pair.alpha = build_kernel_from_couplings(pair.g[0], pair.g[1], grid, dt, t_max, -1.0);

    // beta: unconjugated product weighted by tanh r_k, lags out to 2 t_max.
    detail::require_resolved(dt, grid);
    pair.beta.dt = dt;
    pair.beta.t_max = 2.0 * t_max;
    const int n_tau = static_cast<int>(std::round(2.0 * t_max / dt)) + 1;
    for (int mu = 0; mu < 2; ++mu)
        for (int nu = 0; nu < 2; ++nu) {
            std::vector<Complex> weighted(pair.g[static_cast<size_t>(nu)].size());
            for (size_t j = 0; j < weighted.size(); ++j)
                weighted[j] = pair.tanh_r[j] * pair.g[static_cast<size_t>(nu)][j];
            pair.beta.values[static_cast<size_t>(2 * mu + nu)] =
                detail::tabulate_pair(pair.g[static_cast<size_t>(mu)], weighted, grid, dt,
                                      n_tau, -1.0, /*conjugate_first=*/false);
        }
    return pair;
}

// ------------------------------ peak analysis ---------------------------------

// Kernel magnitudes ring at the band-edge frequency k_max (Gibbs lobes of the
// truncated dispersion); the moving average over one ringing period exposes the
// physical route peaks.
inline std::vector<double> kernel_envelope(const std::vector<Complex>& v, double dt,
                                           double k_max) {
    const int half = std::max(1, static_cast<int>(std::round(kPi / (k_max * dt))));
    const int n = static_cast<int>(v.size());
    std::vector<double> env(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        int c = 0;
        for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
            s += std::abs(v[static_cast<size_t>(j)]);
            ++c;
        }
        env[static_cast<size_t>(i)] = s / c;
    }
    return env;
}

struct KernelPeak {
    double tau = 0.0;
    double height = 0.0;
};

// Local maxima of the envelope with sub-grid quadratic vertex refinement,
// tallest first. `skip` drops the leading samples (e.g. the tau = 0 main lobe).
inline std::vector<KernelPeak> kernel_peaks(const std::vector<Complex>& v, double dt,
                                            double k_max, double floor_frac = 0.1,
                                            int skip = 0) {
    const auto env = kernel_envelope(v, dt, k_max);
    const int n = static_cast<int>(env.size());
    double top = 0.0;
    for (int i = skip; i < n; ++i) top = std::max(top, env[static_cast<size_t>(i)]);
    std::vector<KernelPeak> out;
    for (int i = std::max(1, skip); i + 1 < n; ++i) {
        const double y0 = env[static_cast<size_t>(i - 1)];
        const double y1 = env[static_cast<size_t>(i)];
        const double y2 = env[static_cast<size_t>(i + 1)];
        if (y1 > y0 && y1 >= y2 && y1 > floor_frac * top) {
            const double den = y0 - 2.0 * y1 + y2;
            const double frac = std::abs(den) > 0.0 ? 0.5 * (y0 - y2) / den : 0.0;
            out.push_back({(i + frac) * dt, y1});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const KernelPeak& a, const KernelPeak& b) { return a.height > b.height; });
    return out;
}

// ------------------------------ CSV export -----------------------------------

inline void write_kernel_csv(const CorrelationKernel& ker, const std::string& path) {
    if (ker.is_delta) throw config_error("delta kernel has no tabulated values to export");
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    out << "tau,re_aa,im_aa,re_ab,im_ab,re_ba,im_ba,re_bb,im_bb\n";
    char buf[64];
    for (int i = 0; i < ker.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", i * ker.dt);
        out << buf;
        for (int p = 0; p < 4; ++p) {
            const Complex v = ker.values[static_cast<size_t>(p)][static_cast<size_t>(i)];
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", v.real(), v.imag());
            out << buf;
        }
        out << "\n";
    }
}

} // namespace wqed
