// thermal_squeezed.hpp — finite-temperature and squeezed-vacuum extensions:
// dual O-fields, dual-noise SSE generators, and the finite-temperature master equation
//
// Thermal (Bogoliubov picture): two fields with diagonal data O_z(t,t) = sigma^-,
// O_w(t,t) = sigma^+, jointly advanced by
//   K(t) = -i H_A - sum_nu (sigma_nu^+ Obar_z_nu(t) + sigma_nu^- Obar_w_nu(t)),
// where Obar_z convolves alpha (f-couplings) and Obar_w convolves alpha'
// (h-couplings, positive-frequency phase). The SSE generator gains
// +sigma_mu^+ w*_{mu t} - sigma_mu^- Obar_w_mu(t), and the master equation the
// channel ([sigma_mu^+, rho Obar_w_mu^dag] + H.c.).
//
// Squeezed (experimental): the w-field lives on s in [-t, 0] with
// O_w(t, s=-t) = sigma^+; it is stored reflected, U_w(t,u) = O_w(t,-u), so the
// march is structurally identical with kernel argument beta(t + u).
#pragma once

#include "wqed/correlation.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/hilbert.hpp"
#include "wqed/noise.hpp"
#include "wqed/osolver.hpp"
#include "wqed/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace wqed {

struct DualOField {
    OField oz;  // obar = Obar_z series
    OField ow;  // obar = Obar_w series
};

namespace detail {

// Trapezoidal convolution with lag (i - j) (standard) or (i + j) (reflected domain).
inline std::array<Matrix4c, 2> convolve_row_lag(const CorrelationKernel& ker, double dt,
                                                int i, int j0,
                                                const std::array<std::vector<Matrix4c>, 2>& row,
                                                bool reflected) {
    std::array<Matrix4c, 2> obar{Matrix4c::Zero(), Matrix4c::Zero()};
    if (ker.is_delta) {
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu)
                obar[static_cast<size_t>(mu)] +=
                    0.5 * ker.delta_strength[static_cast<size_t>(2 * mu + nu)] *
                    row[static_cast<size_t>(nu)][static_cast<size_t>(i)];
        return obar;
    }
    if (i == j0) return obar;
    for (int j = j0; j <= i; ++j) {
        const double w = (j == j0 || j == i) ? 0.5 : 1.0;
        const double tau = (reflected ? (i + j) : (i - j)) * dt;
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu)
                obar[static_cast<size_t>(mu)] +=
                    (w * dt) *
                    ker.at(make_pair(static_cast<Atom>(mu), static_cast<Atom>(nu)), tau) *
                    row[static_cast<size_t>(nu)][static_cast<size_t>(j)];
    }
    return obar;
}

struct DualMarchSpec {
    const CorrelationKernel* ker_z = nullptr;
    const CorrelationKernel* ker_w = nullptr;
    bool w_reflected = false;
    double w_generator_sign = -1.0;  // sign of the sigma_x^{z/w} Obar_w term in K
    bool w_couples_with_sigma_minus = true;  // thermal: -sigma^- Obar_w; squeezed: +sigma^+ Obar_w
};

// Joint Heun march of both fields; mirrors evolve_matrix_field.
inline DualOField dual_march(const DualMarchSpec& spec, const Matrix4c& h_atoms, double dt,
                             double t_max, OFieldOptions opts) {
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    DualOField dual;
    for (OField* f : {&dual.oz, &dual.ow}) {
        f->dt = dt;
        f->t_max = t_max;
        f->h_atoms = h_atoms;
        f->times.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) f->times[static_cast<size_t>(i)] = i * dt;
        f->obar[0].assign(static_cast<size_t>(n), Matrix4c::Zero());
        f->obar[1].assign(static_cast<size_t>(n), Matrix4c::Zero());
        f->has_rows = opts.keep_rows;
        if (opts.keep_rows) {
            f->rows[0].resize(static_cast<size_t>(n));
            f->rows[1].resize(static_cast<size_t>(n));
        }
    }

    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};

    const int support_z =
        opts.keep_rows ? n : kernel_support_steps(*spec.ker_z, dt, n, opts.support_threshold);
    // reflected kernels probe lags up to 2 t_max and never truncate safely; keep all
    const int support_w =
        spec.w_reflected ? n
                         : (opts.keep_rows ? n
                                           : kernel_support_steps(*spec.ker_w, dt, n,
                                                                  opts.support_threshold));

    std::array<std::vector<Matrix4c>, 2> row_z, row_w, pred_z, pred_w;
    for (int mu = 0; mu < 2; ++mu) {
        const auto m = static_cast<size_t>(mu);
        row_z[m].assign(static_cast<size_t>(n), Matrix4c::Zero());
        row_w[m].assign(static_cast<size_t>(n), Matrix4c::Zero());
        pred_z[m].assign(static_cast<size_t>(n), Matrix4c::Zero());
        pred_w[m].assign(static_cast<size_t>(n), Matrix4c::Zero());
        row_z[m][0] = sm[m];
        row_w[m][0] = sp[m];
    }

    const auto snapshot = [&](int i) {
        if (!opts.keep_rows) return;
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            dual.oz.rows[m][static_cast<size_t>(i)].assign(row_z[m].begin(),
                                                           row_z[m].begin() + i + 1);
            dual.ow.rows[m][static_cast<size_t>(i)].assign(row_w[m].begin(),
                                                           row_w[m].begin() + i + 1);
        }
    };

    int j0z = 0, j0w = 0;
    auto obz = convolve_row_lag(*spec.ker_z, dt, 0, j0z, row_z, false);
    auto obw = convolve_row_lag(*spec.ker_w, dt, 0, j0w, row_w, spec.w_reflected);
    snapshot(0);

    const auto generator = [&](const std::array<Matrix4c, 2>& oz,
                               const std::array<Matrix4c, 2>& ow) {
        Matrix4c k = -kI * h_atoms;
        for (int nu = 0; nu < 2; ++nu) {
            const auto m = static_cast<size_t>(nu);
            k -= sp[m] * oz[m];
            if (spec.w_couples_with_sigma_minus)
                k += spec.w_generator_sign * (sm[m] * ow[m]);
            else
                k += spec.w_generator_sign * (sp[m] * ow[m]);
        }
        return k;
    };

    dual.oz.obar[0][0] = obz[0];
    dual.oz.obar[1][0] = obz[1];
    dual.ow.obar[0][0] = obw[0];
    dual.ow.obar[1][0] = obw[1];

    for (int i = 0; i < n - 1; ++i) {
        const Matrix4c k_now = generator(obz, obw);
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            for (int j = j0z; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                pred_z[m][js] = row_z[m][js] + dt * commutator(k_now, row_z[m][js]);
            }
            for (int j = j0w; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                pred_w[m][js] = row_w[m][js] + dt * commutator(k_now, row_w[m][js]);
            }
            pred_z[m][static_cast<size_t>(i + 1)] = sm[m];
            pred_w[m][static_cast<size_t>(i + 1)] = sp[m];
        }
        const auto obz_p = convolve_row_lag(*spec.ker_z, dt, i + 1, j0z, pred_z, false);
        const auto obw_p = convolve_row_lag(*spec.ker_w, dt, i + 1, j0w, pred_w, spec.w_reflected);
        const Matrix4c k_pred = generator(obz_p, obw_p);

        double max_norm = 0.0;
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            for (int j = j0z; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                row_z[m][js] += 0.5 * dt * (commutator(k_now, row_z[m][js]) +
                                            commutator(k_pred, pred_z[m][js]));
                max_norm = std::max(max_norm, row_z[m][js].cwiseAbs().maxCoeff());
            }
            for (int j = j0w; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                row_w[m][js] += 0.5 * dt * (commutator(k_now, row_w[m][js]) +
                                            commutator(k_pred, pred_w[m][js]));
                max_norm = std::max(max_norm, row_w[m][js].cwiseAbs().maxCoeff());
            }
            row_z[m][static_cast<size_t>(i + 1)] = sm[m];
            row_w[m][static_cast<size_t>(i + 1)] = sp[m];
        }
        if (max_norm > opts.instability_norm)
            throw integrator_error("dual O-field norm grew beyond " +
                                   std::to_string(opts.instability_norm) + " at t = " +
                                   std::to_string((i + 1) * dt) + "; reduce dt");

        j0z = std::max(j0z, (i + 1) - support_z);
        j0w = std::max(j0w, (i + 1) - support_w);
        obz = convolve_row_lag(*spec.ker_z, dt, i + 1, j0z, row_z, false);
        obw = convolve_row_lag(*spec.ker_w, dt, i + 1, j0w, row_w, spec.w_reflected);
        dual.oz.obar[0][static_cast<size_t>(i + 1)] = obz[0];
        dual.oz.obar[1][static_cast<size_t>(i + 1)] = obz[1];
        dual.ow.obar[0][static_cast<size_t>(i + 1)] = obw[0];
        dual.ow.obar[1][static_cast<size_t>(i + 1)] = obw[1];
        snapshot(i + 1);
    }
    return dual;
}

} // namespace detail

// Thermal dual field: Obar_z from alpha, Obar_w from alpha'; at beta -> inf the
// w-channel convolutions vanish and oz reproduces the vacuum field.
inline DualOField evolve_dual_field_thermal(const ThermalKernelPair& pair,
                                            const Matrix4c& h_atoms, double dt, double t_max,
                                            OFieldOptions opts = {}) {
    detail::DualMarchSpec spec;
    spec.ker_z = &pair.alpha;
    spec.ker_w = &pair.alpha_prime;
    spec.w_reflected = false;
    spec.w_generator_sign = -1.0;
    spec.w_couples_with_sigma_minus = true;  // -sigma_nu^- Obar_w_nu in K
    return detail::dual_march(spec, h_atoms, dt, t_max, opts);
}

// Squeezed dual field: Obar^alpha_z from the vacuum kernel and Obar^beta_w from the
// beta kernel on the reflected domain; the generator carries +sigma^+ Obar^beta_w.
inline DualOField evolve_dual_field_squeezed(const SqueezedKernelPair& pair,
                                             const Matrix4c& h_atoms, double dt, double t_max,
                                             OFieldOptions opts = {}) {
    detail::DualMarchSpec spec;
    spec.ker_z = &pair.alpha;
    spec.ker_w = &pair.beta;
    spec.w_reflected = true;
    spec.w_generator_sign = +1.0;
    spec.w_couples_with_sigma_minus = false;  // +sigma_nu^+ Obar^beta_w_nu in K
    return detail::dual_march(spec, h_atoms, dt, t_max, opts);
}

// ------------------------------ thermal dynamics ------------------------------

// d rho/dt = -i[H_A, rho] + sum_mu ([sigma_mu^-, rho Obar_z_mu^dag] + H.c.)
//                         + sum_mu ([sigma_mu^+, rho Obar_w_mu^dag] + H.c.)
inline DensitySeries thermal_master_solve(const Matrix4c& initial, const DualOField& dual,
                                          const Matrix4c& h_atoms, double dt, double t_max,
                                          double trace_tol = 1e-6) {
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    DensitySeries series;
    series.times.resize(static_cast<size_t>(n));
    series.rho.resize(static_cast<size_t>(n));
    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};

    const auto rhs = [&](const Matrix4c& rho, double t) {
        const auto oz = obar_at(dual.oz, t);
        const auto ow = obar_at(dual.ow, t);
        Matrix4c d = -kI * (h_atoms * rho - rho * h_atoms);
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            const Matrix4c xz = rho * oz[m].adjoint();
            const Matrix4c cz = sm[m] * xz - xz * sm[m];
            const Matrix4c xw = rho * ow[m].adjoint();
            const Matrix4c cw = sp[m] * xw - xw * sp[m];
            d += cz + cz.adjoint() + cw + cw.adjoint();
        }
        return d;
    };

    Matrix4c rho = 0.5 * (initial + initial.adjoint());
    series.times[0] = 0.0;
    series.rho[0] = rho;
    for (int i = 0; i < n - 1; ++i) {
        const double t = i * dt;
        const Matrix4c k1 = rhs(rho, t);
        const Matrix4c k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt);
        const Matrix4c k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt);
        const Matrix4c k4 = rhs(rho + dt * k3, t + dt);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        rho = 0.5 * (rho + rho.adjoint());
        const double drift = std::abs(rho.trace().real() - 1.0);
        if (drift > trace_tol)
            throw integrator_error("thermal master equation trace drift " +
                                   fmt_sci(drift) + " at t = " + std::to_string(t + dt));
        series.times[static_cast<size_t>(i + 1)] = t + dt;
        series.rho[static_cast<size_t>(i + 1)] = rho;
    }
    return series;
}

// SSE generator with both thermal noises:
//   -i H_A + sum_mu [sigma^- z* + sigma^+ w* - sigma^+ Obar_z - sigma^- Obar_w]
inline std::vector<Vector4c> propagate_trajectory_thermal(const Vector4c& initial,
                                                          const NoiseRealization& noise,
                                                          const DualOField& dual,
                                                          const Matrix4c& h_atoms, double dt) {
    const auto& times = noise.times;
    const int n = static_cast<int>(times.size());
    std::vector<Vector4c> out(static_cast<size_t>(n));
    out[0] = initial;
    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};

    const auto gen = [&](double t) {
        const auto oz = obar_at(dual.oz, t);
        const auto ow = obar_at(dual.ow, t);
        Matrix4c g = -kI * h_atoms;
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            g += detail::interp(times, noise.z_star[m], t) * sm[m];
            g += detail::interp(times, noise.w_star[m], t) * sp[m];
            g -= sp[m] * oz[m];
            g -= sm[m] * ow[m];
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

inline EnsembleSeries ensemble_average_thermal(const ThermalKernelPair& pair,
                                               const ModeGrid& grid, const DualOField& dual,
                                               const Matrix4c& h_atoms, const Vector4c& initial,
                                               double dt, double t_max, int n_traj,
                                               uint64_t seed, int n_threads = 0) {
    const auto times = detail::uniform_times(dt, t_max);
    return ensemble_from_sampler(
        times, n_traj,
        [&](uint64_t traj) {
            const auto noise = sample_thermal_noise(pair, grid, times, seed, traj);
            return propagate_trajectory_thermal(initial, noise, dual, h_atoms, dt);
        },
        n_threads);
}

// ------------------------------ squeezed dynamics -----------------------------

// Per-step effective generator for squeezed-vacuum trajectories. The stored w*
// sequence is the reflected one (w*(-t_i) at index i), matching the s -> -s
// convention of the w-field two-time domain.
inline Matrix4c squeezed_generator_terms(const NoiseRealization& noise, const DualOField& dual,
                                         const Matrix4c& h_atoms, double t) {
    if (!noise.has_w())
        throw config_error("squeezed generator requires a dual-noise realization");
    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};
    const auto oz = obar_at(dual.oz, t);
    const auto ow = obar_at(dual.ow, t);
    Matrix4c g = -kI * h_atoms;
    for (int mu = 0; mu < 2; ++mu) {
        const auto m = static_cast<size_t>(mu);
        g += detail::interp(noise.times, noise.z_star[m], t) * sm[m];
        g += detail::interp(noise.times, noise.w_star[m], t) * sp[m];
        g -= sp[m] * oz[m];
        g += sp[m] * ow[m];
    }
    return g;
}

// Reflected-w noise under the squeezed-state measure; used for propagation.
inline NoiseRealization sample_squeezed_noise_propagation(const SqueezedKernelPair& pair,
                                                          const ModeGrid& grid,
                                                          const std::vector<double>& times,
                                                          uint64_t seed, uint64_t trajectory) {
    NoiseRealization n;
    n.times = times;
    n.seed = seed;
    n.trajectory = trajectory;
    rng::Stream rs(seed, trajectory);
    std::vector<Complex> zk(static_cast<size_t>(grid.size()));
    for (size_t j = 0; j < zk.size(); ++j) {
        const double th = pair.tanh_r[j];
        const double sre = std::sqrt(0.5 / (1.0 + th));
        const double sim = std::sqrt(0.5 / (1.0 - th));
        zk[j] = Complex{sre * rs.next_normal(), sim * rs.next_normal()};
    }
    for (auto& z : zk) z = std::conj(z);

    std::array<std::vector<Complex>, 2> gconj{pair.g[0], pair.g[1]};
    for (auto& gv : gconj)
        for (auto& g : gv) g = std::conj(g);
    detail::mode_superposition({&gconj[0], &gconj[1]}, zk, grid, times, +1.0,
                               Complex{0.0, -1.0}, n.z_star);
    // w*(-t): exp(-i omega t) phases
    std::array<std::vector<Complex>, 2> gth{pair.g[0], pair.g[1]};
    for (int mu = 0; mu < 2; ++mu)
        for (size_t j = 0; j < gth[static_cast<size_t>(mu)].size(); ++j)
            gth[static_cast<size_t>(mu)][j] *= pair.tanh_r[j];
    detail::mode_superposition({&gth[0], &gth[1]}, zk, grid, times, -1.0, Complex{0.0, 1.0},
                               n.w_star);
    return n;
}

inline std::vector<Vector4c> propagate_trajectory_squeezed(const Vector4c& initial,
                                                           const NoiseRealization& noise,
                                                           const DualOField& dual,
                                                           const Matrix4c& h_atoms, double dt) {
    const auto& times = noise.times;
    const int n = static_cast<int>(times.size());
    std::vector<Vector4c> out(static_cast<size_t>(n));
    out[0] = initial;
    Vector4c y = initial;
    for (int i = 0; i < n - 1; ++i) {
        const double t = times[static_cast<size_t>(i)];
        const Matrix4c g1 = squeezed_generator_terms(noise, dual, h_atoms, t);
        const Matrix4c g2 = squeezed_generator_terms(noise, dual, h_atoms, t + 0.5 * dt);
        const Matrix4c g3 = squeezed_generator_terms(noise, dual, h_atoms, t + dt);
        const Vector4c k1 = g1 * y;
        const Vector4c k2 = g2 * (y + 0.5 * dt * k1);
        const Vector4c k3 = g2 * (y + 0.5 * dt * k2);
        const Vector4c k4 = g3 * (y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out[static_cast<size_t>(i + 1)] = y;
    }
    return out;
}

inline EnsembleSeries ensemble_average_squeezed(const SqueezedKernelPair& pair,
                                                const ModeGrid& grid, const DualOField& dual,
                                                const Matrix4c& h_atoms,
                                                const Vector4c& initial, double dt,
                                                double t_max, int n_traj, uint64_t seed,
                                                int n_threads = 0) {
    const auto times = detail::uniform_times(dt, t_max);
    return ensemble_from_sampler(
        times, n_traj,
        [&](uint64_t traj) {
            const auto noise =
                sample_squeezed_noise_propagation(pair, grid, times, seed, traj);
            return propagate_trajectory_squeezed(initial, noise, dual, h_atoms, dt);
        },
        n_threads);
}

} // namespace wqed
