// noise.hpp — colored complex Gaussian processes by mode superposition
//
// z*_{mu t} = -i sum_k G_{mu k} z*_k exp(+i omega_k t) with one i.i.d. standard
// complex Gaussian z_k per mode (E|z_k|^2 = 1, Bargmann measure). Both atoms'
// processes are built from the same draw, so their cross-correlations are exact
// by construction.
#pragma once

#include "wqed/correlation.hpp"
#include "wqed/coupling.hpp"
#include "wqed/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace wqed {

// ------------------------------ RNG ------------------------------------------

// Counter-based stream: the state is derived from (master seed, stream index) only,
// so ensembles are order-independent and parallel-safe.
namespace rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// xoshiro256++, seeded deterministically from (seed, stream).
class Stream {
  public:
    Stream(uint64_t seed, uint64_t stream) {
        uint64_t x = splitmix64(seed ^ (0x2545f4914f6cdd1dULL * (stream + 1)));
        for (auto& si : s_) {
            x = splitmix64(x);
            si = x;
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0, 1]; never returns 0 so log() below is safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard real normal via Box-Muller (deterministic, platform-independent).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    // Circular complex Gaussian with E|z|^2 = 1 (re, im each variance 1/2).
    Complex next_complex_gaussian() {
        const double s = std::sqrt(0.5);
        const double re = s * next_normal();
        const double im = s * next_normal();
        return {re, im};
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rng

// ------------------------------ realizations ---------------------------------

struct NoiseRealization {
    std::vector<double> times;
    // z_star[atom][time index]
    std::array<std::vector<Complex>, 2> z_star;
    // thermal / squeezed partner noise; empty when absent
    std::array<std::vector<Complex>, 2> w_star;
    uint64_t seed = 0;
    uint64_t trajectory = 0;

    bool has_w() const { return !w_star[0].empty(); }
};

namespace detail {

inline std::vector<double> uniform_times(double dt, double t_max) {
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    std::vector<double> t(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) t[static_cast<size_t>(i)] = i * dt;
    return t;
}

// out[atom][i] = -i sum_k c[atom][k] draw_k exp(i sign omega_k t_i), evaluated with a
// per-mode phase recurrence when the time grid is uniform.
inline void mode_superposition(const std::array<const std::vector<Complex>*, 2>& coupling,
                               const std::vector<Complex>& draw, const ModeGrid& grid,
                               const std::vector<double>& times, double sign,
                               Complex prefactor,
                               std::array<std::vector<Complex>, 2>& out) {
    const int nk = grid.size();
    const auto nt = times.size();
    for (auto& o : out) o.assign(nt, Complex{0.0, 0.0});

    // uniform grid detection
    bool uniform = nt >= 2;
    const double dt = nt >= 2 ? times[1] - times[0] : 0.0;
    for (size_t i = 1; i + 1 < nt && uniform; ++i)
        if (std::abs(times[i + 1] - times[i] - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
            uniform = false;

    std::vector<Complex> wa(static_cast<size_t>(nk)), wb(static_cast<size_t>(nk));
    for (int j = 0; j < nk; ++j) {
        const auto js = static_cast<size_t>(j);
        wa[js] = (*coupling[0])[js] * draw[js];
        wb[js] = (*coupling[1])[js] * draw[js];
    }

    if (uniform) {
        std::vector<Complex> phase(static_cast<size_t>(nk)), step(static_cast<size_t>(nk));
        for (int j = 0; j < nk; ++j) {
            const auto js = static_cast<size_t>(j);
            phase[js] = std::exp(Complex{0.0, sign * grid.omega[js] * times[0]});
            step[js] = std::exp(Complex{0.0, sign * grid.omega[js] * dt});
        }
        for (size_t i = 0; i < nt; ++i) {
            Complex acc_a{0.0, 0.0}, acc_b{0.0, 0.0};
            for (int j = 0; j < nk; ++j) {
                const auto js = static_cast<size_t>(j);
                acc_a += wa[js] * phase[js];
                acc_b += wb[js] * phase[js];
                phase[js] *= step[js];
            }
            out[0][i] = prefactor * acc_a;
            out[1][i] = prefactor * acc_b;
        }
    } else {
        for (size_t i = 0; i < nt; ++i) {
            Complex acc_a{0.0, 0.0}, acc_b{0.0, 0.0};
            for (int j = 0; j < nk; ++j) {
                const auto js = static_cast<size_t>(j);
                const Complex ph = std::exp(Complex{0.0, sign * grid.omega[js] * times[i]});
                acc_a += wa[js] * ph;
                acc_b += wb[js] * ph;
            }
            out[0][i] = prefactor * acc_a;
            out[1][i] = prefactor * acc_b;
        }
    }
}

} // namespace detail

// Vacuum noise z*_{mu t} on the given times, one shared draw {z_k} for both atoms.
inline NoiseRealization sample_vacuum_noise(const std::vector<Complex>& ga,
                                            const std::vector<Complex>& gb,
                                            const ModeGrid& grid,
                                            const std::vector<double>& times, uint64_t seed,
                                            uint64_t trajectory = 0) {
    NoiseRealization n;
    n.times = times;
    n.seed = seed;
    n.trajectory = trajectory;
    rng::Stream rs(seed, trajectory);
    std::vector<Complex> zk(static_cast<size_t>(grid.size()));
    for (auto& z : zk) z = rs.next_complex_gaussian();
    // the mode sum uses conj(draw): z*_k
    for (auto& z : zk) z = std::conj(z);
    detail::mode_superposition({&ga, &gb}, zk, grid, times, +1.0, Complex{0.0, -1.0},
                               n.z_star);
    return n;
}

inline NoiseRealization sample_vacuum_noise(const CouplingDistribution& da,
                                            const CouplingDistribution& db,
                                            const ModeGrid& grid, double dt, double t_max,
                                            uint64_t seed, uint64_t trajectory = 0) {
    return sample_vacuum_noise(fourier_coupling(da, grid), fourier_coupling(db, grid), grid,
                               detail::uniform_times(dt, t_max), seed, trajectory);
}

// Thermal noises: z* from the f-couplings and an independent draw for
// w*_{mu t} = -i sum_k conj(h_{mu k}) w*_k exp(-i omega_k t).
inline NoiseRealization sample_thermal_noise(const ThermalKernelPair& pair,
                                             const ModeGrid& grid,
                                             const std::vector<double>& times, uint64_t seed,
                                             uint64_t trajectory = 0) {
    NoiseRealization n;
    n.times = times;
    n.seed = seed;
    n.trajectory = trajectory;

    rng::Stream rs_z(seed, 2 * trajectory);
    rng::Stream rs_w(seed, 2 * trajectory + 1);
    std::vector<Complex> zk(static_cast<size_t>(grid.size())),
        wk(static_cast<size_t>(grid.size()));
    for (auto& z : zk) z = std::conj(rs_z.next_complex_gaussian());
    for (auto& w : wk) w = std::conj(rs_w.next_complex_gaussian());

    detail::mode_superposition({&pair.f[0], &pair.f[1]}, zk, grid, times, +1.0,
                               Complex{0.0, -1.0}, n.z_star);
    std::array<std::vector<Complex>, 2> hconj{pair.h[0], pair.h[1]};
    for (auto& hv : hconj)
        for (auto& h : hv) h = std::conj(h);
    detail::mode_superposition({&hconj[0], &hconj[1]}, wk, grid, times, -1.0,
                               Complex{0.0, -1.0}, n.w_star);
    return n;
}

// Squeezed noises, both built from the SAME draw {z_k}:
//   z*_{mu t} = -i sum_k conj(g_{mu k}) z*_k exp(+i omega_k t)
//   w*_{mu t} = +i sum_k g_{mu k} tanh(r_k) z*_k exp(+i omega_k t)
// With `bargmann` true the draw is the circular measure used for moment checks;
// false applies the squeezed-state reweighting (non-circular re/im variances
// 1/(2(1 ± tanh r_k))) under which plain trajectory averaging reconstructs rho.
inline NoiseRealization sample_squeezed_noise(const SqueezedKernelPair& pair,
                                              const ModeGrid& grid,
                                              const std::vector<double>& times,
                                              uint64_t seed, uint64_t trajectory = 0,
                                              bool bargmann = true) {
    NoiseRealization n;
    n.times = times;
    n.seed = seed;
    n.trajectory = trajectory;

    rng::Stream rs(seed, trajectory);
    std::vector<Complex> zk(static_cast<size_t>(grid.size()));
    for (size_t j = 0; j < zk.size(); ++j) {
        if (bargmann) {
            zk[j] = rs.next_complex_gaussian();
        } else {
            const double th = pair.tanh_r[j];
            const double sre = std::sqrt(0.5 / (1.0 + th));
            const double sim = std::sqrt(0.5 / (1.0 - th));
            zk[j] = Complex{sre * rs.next_normal(), sim * rs.next_normal()};
        }
    }
    for (auto& z : zk) z = std::conj(z);

    std::array<std::vector<Complex>, 2> gconj{pair.g[0], pair.g[1]};
    for (auto& gv : gconj)
        for (auto& g : gv) g = std::conj(g);
    detail::mode_superposition({&gconj[0], &gconj[1]}, zk, grid, times, +1.0,
                               Complex{0.0, -1.0}, n.z_star);

    std::array<std::vector<Complex>, 2> gth{pair.g[0], pair.g[1]};
    for (int mu = 0; mu < 2; ++mu)
        for (size_t j = 0; j < gth[static_cast<size_t>(mu)].size(); ++j)
            gth[static_cast<size_t>(mu)][j] *= pair.tanh_r[j];
    detail::mode_superposition({&gth[0], &gth[1]}, zk, grid, times, +1.0, Complex{0.0, 1.0},
                               n.w_star);
    return n;
}

} // namespace wqed
