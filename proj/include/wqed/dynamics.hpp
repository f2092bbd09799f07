// dynamics.hpp — SSE trajectory propagation, ensemble averaging, and the derived
// master equation, plus the Lindblad limiting case
//
// Linear SSE: d/dt |psi> = [-i H_A + sum_mu (sigma_mu^- z*_{mu t} - sigma_mu^+ Obar_mu(t))] |psi>.
// Trajectories are unnormalized; the Gaussian-measure average of |psi><psi| over
// noise realizations reproduces rho(t).
//
// Master equation: d/dt rho = -i[H_A, rho] + sum_mu ([sigma_mu^-, rho Obar_mu^dag] + H.c.).
#pragma once

#include "wqed/hilbert.hpp"
#include "wqed/noise.hpp"
#include "wqed/osolver.hpp"
#include "wqed/types.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace wqed {

struct DensitySeries {
    std::vector<double> times;
    std::vector<Matrix4c> rho;
};

struct EnsembleSeries {
    std::vector<double> times;
    std::vector<Matrix4c> mean;
    // per-entry standard error of the mean, real and imaginary parts
    std::vector<Eigen::Matrix4d> se_re, se_im;
    int n_trajectories = 0;
    int n_excluded = 0;

    double max_se(int i) const {
        return std::max(se_re[static_cast<size_t>(i)].maxCoeff(),
                        se_im[static_cast<size_t>(i)].maxCoeff());
    }
};

namespace detail {

// Linear interpolation of a complex sequence on the uniform grid of `times`.
inline Complex interp(const std::vector<double>& times, const std::vector<Complex>& v,
                      double t) {
    const double dt = times[1] - times[0];
    const double x = (t - times[0]) / dt;
    const int i = static_cast<int>(std::max(0.0, x));
    if (i >= static_cast<int>(v.size()) - 1) return v.back();
    const double f = x - i;
    return (1.0 - f) * v[static_cast<size_t>(i)] + f * v[static_cast<size_t>(i + 1)];
}

} // namespace detail

// Propagate one linear SSE trajectory with RK4; noise and Obar are interpolated
// linearly to half-steps. Returns the state at every grid time; entries after a
// numerical blowup are left NaN for the caller's exclusion handling.
inline std::vector<Vector4c> propagate_trajectory(const Vector4c& initial,
                                                  const NoiseRealization& noise,
                                                  const OField& ofield,
                                                  const Matrix4c& h_atoms, double dt) {
    const auto& times = noise.times;
    const int n = static_cast<int>(times.size());
    std::vector<Vector4c> out(static_cast<size_t>(n));
    out[0] = initial;

    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};

    const auto gen = [&](double t) {
        const auto ob = obar_at(ofield, t);
        Matrix4c g = -kI * h_atoms;
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            g += detail::interp(times, noise.z_star[m], t) * sm[m];
            g -= sp[m] * ob[m];
        }
        return g;
    };

    Vector4c y = initial;
    for (int i = 0; i < n - 1; ++i) {
        const double t = times[static_cast<size_t>(i)];
        const Matrix4c g1 = gen(t);
        const Matrix4c g2 = gen(t + 0.5 * dt);
        const Matrix4c g3 = gen(t + dt);
        const Vector4c k1 = g1 * y;
        const Vector4c k2 = g2 * (y + 0.5 * dt * k1);
        const Vector4c k3 = g2 * (y + 0.5 * dt * k2);
        const Vector4c k4 = g3 * (y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[static_cast<size_t>(i + 1)] = y;
    }
    return out;
}

// ------------------------------ ensemble averaging ----------------------------

// Average |psi><psi| over trajectories produced by `make_trajectory(index)`.
// Trajectories are processed in fixed blocks and merged in index order, so the
// result is bit-stable for a given seed regardless of the worker count.
inline EnsembleSeries ensemble_from_sampler(
    const std::vector<double>& times, int n_traj,
    const std::function<std::vector<Vector4c>(uint64_t)>& make_trajectory,
    int n_threads = 0, double max_exclusion_fraction = 1e-3) {
    if (n_traj < 2) throw config_error("ensemble needs n_traj >= 2");
    const auto nt = times.size();
    constexpr int kBlock = 32;
    const int n_blocks = (n_traj + kBlock - 1) / kBlock;

    struct Block {
        std::vector<Matrix4c> sum;
        std::vector<Eigen::Matrix4d> sum_sq_re, sum_sq_im;
        int excluded = 0;
        int count = 0;
    };
    std::vector<Block> blocks(static_cast<size_t>(n_blocks));

    const auto run_block = [&](int bi) {
        Block& blk = blocks[static_cast<size_t>(bi)];
        blk.sum.assign(nt, Matrix4c::Zero());
        blk.sum_sq_re.assign(nt, Eigen::Matrix4d::Zero());
        blk.sum_sq_im.assign(nt, Eigen::Matrix4d::Zero());
        const int lo = bi * kBlock;
        const int hi = std::min(n_traj, lo + kBlock);
        for (int traj = lo; traj < hi; ++traj) {
            const auto series = make_trajectory(static_cast<uint64_t>(traj));
            bool ok = true;
            for (const auto& v : series)
                if (!v.allFinite()) {
                    ok = false;
                    break;
                }
            if (!ok) {
                ++blk.excluded;
                continue;
            }
            ++blk.count;
            for (size_t i = 0; i < nt; ++i) {
                const Matrix4c p = series[i] * series[i].adjoint();
                blk.sum[i] += p;
                blk.sum_sq_re[i] += p.real().cwiseProduct(p.real());
                blk.sum_sq_im[i] += p.imag().cwiseProduct(p.imag());
            }
        }
    };

    int workers = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > 1) {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int bi = next.fetch_add(1); bi < n_blocks; bi = next.fetch_add(1))
                    run_block(bi);
            });
        for (auto& th : pool) th.join();
    } else {
        for (int bi = 0; bi < n_blocks; ++bi) run_block(bi);
    }

    EnsembleSeries ens;
    ens.times = times;
    ens.mean.assign(nt, Matrix4c::Zero());
    ens.se_re.assign(nt, Eigen::Matrix4d::Zero());
    ens.se_im.assign(nt, Eigen::Matrix4d::Zero());
    int n_ok = 0, n_excluded = 0;

    std::vector<Matrix4c> sum(nt, Matrix4c::Zero());
    std::vector<Eigen::Matrix4d> ssr(nt, Eigen::Matrix4d::Zero()), ssi(nt, Eigen::Matrix4d::Zero());
    for (const auto& blk : blocks) {  // fixed merge order
        n_ok += blk.count;
        n_excluded += blk.excluded;
        for (size_t i = 0; i < nt; ++i) {
            sum[i] += blk.sum[i];
            ssr[i] += blk.sum_sq_re[i];
            ssi[i] += blk.sum_sq_im[i];
        }
    }
    if (n_excluded > max_exclusion_fraction * n_traj)
        throw integrator_error("trajectory exclusion rate " + std::to_string(n_excluded) + "/" +
                               std::to_string(n_traj) + " exceeds the allowed fraction");
    if (n_ok < 2) throw integrator_error("fewer than two usable trajectories");

    const double n = static_cast<double>(n_ok);
    for (size_t i = 0; i < nt; ++i) {
        ens.mean[i] = sum[i] / n;
        // sample variance of the mean, per entry
        const Eigen::Matrix4d mr = ens.mean[i].real();
        const Eigen::Matrix4d mi = ens.mean[i].imag();
        ens.se_re[i] =
            ((ssr[i] / n - mr.cwiseProduct(mr)).cwiseMax(0.0) / (n - 1.0)).cwiseSqrt();
        ens.se_im[i] =
            ((ssi[i] / n - mi.cwiseProduct(mi)).cwiseMax(0.0) / (n - 1.0)).cwiseSqrt();
    }
    ens.n_trajectories = n_ok;
    ens.n_excluded = n_excluded;
    return ens;
}

// Scenario bundle for vacuum SSE ensembles.
struct SseRun {
    std::vector<Complex> ga, gb;
    ModeGrid grid;
    const OField* ofield = nullptr;
    Matrix4c h_atoms = Matrix4c::Zero();
    Vector4c initial = Vector4c::Zero();
    double dt = 0.0;
    double t_max = 0.0;
};

inline EnsembleSeries ensemble_average(const SseRun& run, int n_traj, uint64_t seed,
                                       int n_threads = 0) {
    const auto times = detail::uniform_times(run.dt, run.t_max);
    return ensemble_from_sampler(
        times, n_traj,
        [&](uint64_t traj) {
            const auto noise =
                sample_vacuum_noise(run.ga, run.gb, run.grid, times, seed, traj);
            return propagate_trajectory(run.initial, noise, *run.ofield, run.h_atoms, run.dt);
        },
        n_threads);
}

// ------------------------------ master equation -------------------------------

namespace detail {

inline Matrix4c master_rhs(const Matrix4c& rho, const Matrix4c& h_atoms,
                           const std::array<Matrix4c, 2>& obar,
                           const std::array<Matrix4c, 2>& sm) {
    Matrix4c d = -kI * (h_atoms * rho - rho * h_atoms);
    for (int mu = 0; mu < 2; ++mu) {
        const auto m = static_cast<size_t>(mu);
        const Matrix4c x = rho * obar[m].adjoint();
        const Matrix4c c = sm[m] * x - x * sm[m];
        d += c + c.adjoint();
    }
    return d;
}

} // namespace detail

// RK4 integration of the non-Markovian master equation with tabulated Obar(t).
// Hermiticity is restored each step; trace drift beyond tolerance aborts.
inline DensitySeries master_equation_solve(const Matrix4c& initial, const OField& ofield,
                                           const Matrix4c& h_atoms, double dt, double t_max,
                                           double trace_tol = 1e-6) {
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    DensitySeries series;
    series.times.resize(static_cast<size_t>(n));
    series.rho.resize(static_cast<size_t>(n));
    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};

    Matrix4c rho = 0.5 * (initial + initial.adjoint());
    series.times[0] = 0.0;
    series.rho[0] = rho;
    for (int i = 0; i < n - 1; ++i) {
        const double t = i * dt;
        const auto ob1 = obar_at(ofield, t);
        const auto ob2 = obar_at(ofield, t + 0.5 * dt);
        const auto ob3 = obar_at(ofield, t + dt);
        const Matrix4c k1 = detail::master_rhs(rho, h_atoms, ob1, sm);
        const Matrix4c k2 = detail::master_rhs(rho + 0.5 * dt * k1, h_atoms, ob2, sm);
        const Matrix4c k3 = detail::master_rhs(rho + 0.5 * dt * k2, h_atoms, ob2, sm);
        const Matrix4c k4 = detail::master_rhs(rho + dt * k3, h_atoms, ob3, sm);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint());
        const double drift = std::abs(rho.trace().real() - 1.0);
        if (drift > trace_tol)
            throw integrator_error("master equation trace drift " + fmt_sci(drift) +
                                   " at t = " + std::to_string(t + dt) + "; reduce dt");
        series.times[static_cast<size_t>(i + 1)] = t + dt;
        series.rho[static_cast<size_t>(i + 1)] = rho;
    }
    return series;
}

// Collective-decay Lindblad equation with jump operator J = sigma_a^- + sigma_b^-:
// d rho/dt = -i[H_A, rho] + gamma (J rho J^dag - 1/2 {J^dag J, rho}).
inline DensitySeries lindblad_solve(double gamma, const Matrix4c& initial,
                                    const Matrix4c& h_atoms, double dt, double t_max) {
    const Matrix4c j = sigma_minus(Atom::a) + sigma_minus(Atom::b);
    const Matrix4c jdj = j.adjoint() * j;
    const auto rhs = [&](const Matrix4c& rho) {
        Matrix4c d = -kI * (h_atoms * rho - rho * h_atoms);
        d += gamma * (j * rho * j.adjoint() - 0.5 * (jdj * rho + rho * jdj));
        return d;
    };
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    DensitySeries series;
    series.times.resize(static_cast<size_t>(n));
    series.rho.resize(static_cast<size_t>(n));
    Matrix4c rho = 0.5 * (initial + initial.adjoint());
    series.times[0] = 0.0;
    series.rho[0] = rho;
    for (int i = 0; i < n - 1; ++i) {
        const Matrix4c k1 = rhs(rho);
        const Matrix4c k2 = rhs(rho + 0.5 * dt * k1);
        const Matrix4c k3 = rhs(rho + 0.5 * dt * k2);
        const Matrix4c k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint());
        series.times[static_cast<size_t>(i + 1)] = (i + 1) * dt;
        series.rho[static_cast<size_t>(i + 1)] = rho;
    }
    return series;
}

} // namespace wqed
