// oracle.hpp — dressed-state wavefunction solvers on the shared mode grid
//
// Exact integration within a fixed excitation sector; serves as the independent
// ground truth for the SSE / master-equation path. Amplitudes are kept in the
// interaction picture; the free phases are reinserted when the reduced two-atom
// density matrix is assembled.
#pragma once

#include "wqed/coupling.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/errors.hpp"
#include "wqed/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace wqed {

// ------------------------------ single excitation -----------------------------

// Equations of motion (interaction picture):
//   dA_mu/dt = -i sum_k conj(G_{mu k}) B_k exp(-i(omega_k - omega_mu) t)
//   dB_k/dt  = -i sum_mu G_{mu k} A_mu exp(+i(omega_k - omega_mu) t)
// A constant |gg;0> amplitude may ride along; it does not couple.
struct SingleExcitationSeries {
    std::vector<double> times;
    std::vector<std::array<Complex, 2>> amplitudes;  // A_a(t), A_b(t)
    std::vector<double> photon_norm;                 // sum_k |B_k|^2
    Complex a_gg{0.0, 0.0};
    DensitySeries reduced;
};

inline SingleExcitationSeries solve_single_excitation(
    const std::vector<Complex>& ga, const std::vector<Complex>& gb, const ModeGrid& grid,
    double omega_a, double omega_b, Complex init_a, Complex init_b, double dt, double t_max,
    Complex init_gg = Complex{0.0, 0.0}, double norm_tol = 1e-6) {
    const int nk = grid.size();
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    const std::array<const std::vector<Complex>*, 2> g{&ga, &gb};
    const std::array<double, 2> omega{omega_a, omega_b};

    const double norm0 = std::norm(init_a) + std::norm(init_b) + std::norm(init_gg);
    if (std::abs(norm0 - 1.0) > 1e-9)
        throw config_error("single-excitation initial state must be normalized");

    // state y = (A_a, A_b, B_0 .. B_{nk-1})
    std::vector<Complex> y(static_cast<size_t>(nk) + 2, Complex{0.0, 0.0});
    y[0] = init_a;
    y[1] = init_b;

    std::vector<Complex> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
        tmp(y.size());

    const auto rhs = [&](const std::vector<Complex>& s, double t, std::vector<Complex>& d) {
        d[0] = Complex{0.0, 0.0};
        d[1] = Complex{0.0, 0.0};
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            Complex acc{0.0, 0.0};
            for (int k = 0; k < nk; ++k) {
                const auto ks = static_cast<size_t>(k);
                const Complex ph =
                    std::exp(Complex{0.0, -(grid.omega[ks] - omega[m]) * t});
                acc += std::conj((*g[m])[ks]) * s[ks + 2] * ph;
            }
            d[m] = -kI * acc;
        }
        for (int k = 0; k < nk; ++k) {
            const auto ks = static_cast<size_t>(k);
            Complex acc{0.0, 0.0};
            for (int mu = 0; mu < 2; ++mu) {
                const auto m = static_cast<size_t>(mu);
                const Complex ph = std::exp(Complex{0.0, (grid.omega[ks] - omega[m]) * t});
                acc += (*g[m])[ks] * s[m] * ph;
            }
            d[ks + 2] = -kI * acc;
        }
    };

    SingleExcitationSeries out;
    out.times.resize(static_cast<size_t>(n));
    out.amplitudes.resize(static_cast<size_t>(n));
    out.photon_norm.resize(static_cast<size_t>(n));
    out.a_gg = init_gg;
    out.reduced.times.resize(static_cast<size_t>(n));
    out.reduced.rho.resize(static_cast<size_t>(n));

    const auto record = [&](int i, double t) {
        out.times[static_cast<size_t>(i)] = t;
        out.amplitudes[static_cast<size_t>(i)] = {y[0], y[1]};
        double pn = 0.0;
        for (int k = 0; k < nk; ++k) pn += std::norm(y[static_cast<size_t>(k) + 2]);
        out.photon_norm[static_cast<size_t>(i)] = pn;

        const double total = std::norm(y[0]) + std::norm(y[1]) + pn + std::norm(init_gg);
        if (std::abs(total - norm0) > norm_tol)
            throw integrator_error("dressed-state norm drift " +
                                   fmt_sci(std::abs(total - norm0)) + " at t = " +
                                   std::to_string(t) + "; reduce dt");

        // lab-frame amplitudes for the reduced state
        const Complex la = y[0] * std::exp(Complex{0.0, -omega_a * t});
        const Complex lb = y[1] * std::exp(Complex{0.0, -omega_b * t});
        Matrix4c rho = Matrix4c::Zero();
        rho(kEG, kEG) = std::norm(la);
        rho(kGE, kGE) = std::norm(lb);
        rho(kEG, kGE) = la * std::conj(lb);
        rho(kGE, kEG) = std::conj(rho(kEG, kGE));
        rho(kGG, kGG) = pn + std::norm(init_gg);
        rho(kEG, kGG) = la * std::conj(init_gg);
        rho(kGG, kEG) = std::conj(rho(kEG, kGG));
        rho(kGE, kGG) = lb * std::conj(init_gg);
        rho(kGG, kGE) = std::conj(rho(kGE, kGG));
        out.reduced.times[static_cast<size_t>(i)] = t;
        out.reduced.rho[static_cast<size_t>(i)] = rho;
    };
    record(0, 0.0);

    for (int i = 0; i < n - 1; ++i) {
        const double t = i * dt;
        rhs(y, t, k1);
        for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        rhs(tmp, t + 0.5 * dt, k2);
        for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        rhs(tmp, t + 0.5 * dt, k3);
        for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + dt * k3[j];
        rhs(tmp, t + dt, k4);
        for (size_t j = 0; j < y.size(); ++j)
            y[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        record(i + 1, t + dt);
    }
    return out;
}

// ------------------------------ double excitation ------------------------------

// Two-excitation sector from |ee;0>. Photon-pair amplitudes are stored over
// normalized unordered-pair states (including double occupancy |2_k>), which keeps
// the integration exactly unitary. The symmetric ordered-pair amplitude
// A_{k k'} (bosonic, A_{k k'} = A_{k' k}) is exposed through a2().
//
// The equations follow from the Hamiltonian; the printed forms in the source
// material carry inconsistent conjugations/indices, so the index-consistent
// reading is used and checked against the short-time expansion
// |C(t)|^2 = 1 - (sum_{mu k} |G_{mu k}|^2) t^2 + O(t^4).
struct DoubleExcitationSeries {
    std::vector<double> times;
    std::vector<Complex> c_ab;
    DensitySeries reduced;

    // final-time pair amplitudes in the symmetric ordered-pair convention
    int n_modes = 0;
    std::vector<Complex> pair_final;  // packed upper triangle k <= k'
    Complex a2(int k, int kp) const {
        if (k > kp) std::swap(k, kp);
        const Complex v = pair_final[pair_index(k, kp, n_modes)];
        return k == kp ? v / std::sqrt(2.0) : 0.5 * v;
    }
    static size_t pair_index(int k, int kp, int n) {
        return static_cast<size_t>(k) * static_cast<size_t>(n) -
               static_cast<size_t>(k) * static_cast<size_t>(k - 1) / 2 +
               static_cast<size_t>(kp - k);
    }
};

inline DoubleExcitationSeries solve_double_excitation(const std::vector<Complex>& ga,
                                                      const std::vector<Complex>& gb,
                                                      const ModeGrid& grid, double omega_a,
                                                      double omega_b, double dt, double t_max,
                                                      int mode_cap = 200,
                                                      double norm_tol = 1e-7) {
    const int nk = grid.size();
    if (nk > mode_cap)
        throw config_error("double-excitation solver: " + std::to_string(nk) +
                           " modes exceed the configured cap " + std::to_string(mode_cap) +
                           " (O(N^2) pair amplitudes)");
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    const std::array<const std::vector<Complex>*, 2> g{&ga, &gb};
    const std::array<double, 2> omega{omega_a, omega_b};
    const size_t npair = static_cast<size_t>(nk) * static_cast<size_t>(nk + 1) / 2;

    // state layout: [0] = C, [1 .. 2 nk] = B_{a k}, B_{b k}, then pairs k <= k'
    const size_t nb = 2 * static_cast<size_t>(nk);
    const size_t dim = 1 + nb + npair;
    std::vector<Complex> y(dim, Complex{0.0, 0.0});
    y[0] = 1.0;

    const auto bidx = [nk](int mu, int k) {
        return 1 + static_cast<size_t>(mu) * static_cast<size_t>(nk) + static_cast<size_t>(k);
    };
    const auto aidx = [nk, nb](int k, int kp) {
        return 1 + nb + DoubleExcitationSeries::pair_index(k, kp, nk);
    };

    const double sqrt2 = std::sqrt(2.0);

    std::vector<Complex> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    std::vector<Complex> pha(static_cast<size_t>(nk)), phb(static_cast<size_t>(nk));

    const auto rhs = [&](const std::vector<Complex>& s, double t, std::vector<Complex>& d) {
        // per-mode phases exp(+i (omega_k - omega_mu) t)
        for (int k = 0; k < nk; ++k) {
            const auto ks = static_cast<size_t>(k);
            pha[ks] = std::exp(Complex{0.0, (grid.omega[ks] - omega[0]) * t});
            phb[ks] = std::exp(Complex{0.0, (grid.omega[ks] - omega[1]) * t});
        }
        const std::array<const std::vector<Complex>*, 2> ph{&pha, &phb};

        // dC = -i sum_{mu k} conj(G_{nu k}) exp(-i(omega_k - omega_nu) t) B_{mu k}
        Complex dc{0.0, 0.0};
        for (int mu = 0; mu < 2; ++mu) {
            const int nu = 1 - mu;
            for (int k = 0; k < nk; ++k) {
                const auto ks = static_cast<size_t>(k);
                dc += std::conj((*g[static_cast<size_t>(nu)])[ks] * (*ph[static_cast<size_t>(nu)])[ks]) *
                      s[bidx(mu, k)];
            }
        }
        d[0] = -kI * dc;

        // dB_{mu k} = -i [ G_{nu k} e^{+i(w_k - w_nu) t} C
        //                 + sum_{k'} conj(G_{mu k'} e^{+i(w_k' - w_mu) t}) A(k,k') ]
        for (int mu = 0; mu < 2; ++mu) {
            const int nu = 1 - mu;
            for (int k = 0; k < nk; ++k) {
                const auto ks = static_cast<size_t>(k);
                Complex acc = (*g[static_cast<size_t>(nu)])[ks] * (*ph[static_cast<size_t>(nu)])[ks] * s[0];
                for (int kp = 0; kp < nk; ++kp) {
                    const auto kps = static_cast<size_t>(kp);
                    const Complex cpl =
                        std::conj((*g[static_cast<size_t>(mu)])[kps] * (*ph[static_cast<size_t>(mu)])[kps]);
                    const Complex pair =
                        (kp == k) ? sqrt2 * s[aidx(k, k)]
                                  : s[aidx(std::min(k, kp), std::max(k, kp))];
                    acc += cpl * pair;
                }
                d[bidx(mu, k)] = -kI * acc;
            }
        }

        // dA(k,k') = -i sum_mu [ G_{mu k'} e^{+i(w_k' - w_mu) t} B_{mu k}
        //                      + G_{mu k}  e^{+i(w_k  - w_mu) t} B_{mu k'} ]   (k < k')
        // dA(k,k)  = -i sqrt(2) sum_mu G_{mu k} e^{+i(w_k - w_mu) t} B_{mu k}
        for (int k = 0; k < nk; ++k) {
            const auto ks = static_cast<size_t>(k);
            for (int kp = k; kp < nk; ++kp) {
                const auto kps = static_cast<size_t>(kp);
                Complex acc{0.0, 0.0};
                for (int mu = 0; mu < 2; ++mu) {
                    const auto m = static_cast<size_t>(mu);
                    if (kp == k) {
                        acc += sqrt2 * (*g[m])[ks] * (*ph[m])[ks] * s[bidx(mu, k)];
                    } else {
                        acc += (*g[m])[kps] * (*ph[m])[kps] * s[bidx(mu, k)];
                        acc += (*g[m])[ks] * (*ph[m])[ks] * s[bidx(mu, kp)];
                    }
                }
                d[aidx(k, kp)] = -kI * acc;
            }
        }
    };

    DoubleExcitationSeries out;
    out.n_modes = nk;
    out.times.resize(static_cast<size_t>(n));
    out.c_ab.resize(static_cast<size_t>(n));
    out.reduced.times.resize(static_cast<size_t>(n));
    out.reduced.rho.resize(static_cast<size_t>(n));

    const auto record = [&](int i, double t) {
        out.times[static_cast<size_t>(i)] = t;
        out.c_ab[static_cast<size_t>(i)] = y[0];
        double nb_a = 0.0, nb_b = 0.0, na2 = 0.0;
        Complex coh{0.0, 0.0};
        for (int k = 0; k < nk; ++k) {
            nb_a += std::norm(y[bidx(0, k)]);
            nb_b += std::norm(y[bidx(1, k)]);
            coh += y[bidx(0, k)] * std::conj(y[bidx(1, k)]);
        }
        for (size_t p = 1 + nb; p < dim; ++p) na2 += std::norm(y[p]);
        const double total = std::norm(y[0]) + nb_a + nb_b + na2;
        if (std::abs(total - 1.0) > norm_tol)
            throw integrator_error("double-excitation norm drift " +
                                   fmt_sci(std::abs(total - 1.0)) + " at t = " +
                                   std::to_string(t) + "; reduce dt");
        Matrix4c rho = Matrix4c::Zero();
        rho(kEE, kEE) = std::norm(y[0]);
        rho(kEG, kEG) = nb_a;
        rho(kGE, kGE) = nb_b;
        rho(kGG, kGG) = na2;
        rho(kEG, kGE) = coh * std::exp(Complex{0.0, -(omega_a - omega_b) * t});
        rho(kGE, kEG) = std::conj(rho(kEG, kGE));
        out.reduced.times[static_cast<size_t>(i)] = t;
        out.reduced.rho[static_cast<size_t>(i)] = rho;
    };
    record(0, 0.0);

    for (int i = 0; i < n - 1; ++i) {
        const double t = i * dt;
        rhs(y, t, k1);
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
        rhs(tmp, t + 0.5 * dt, k2);
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
        rhs(tmp, t + 0.5 * dt, k3);
        for (size_t j = 0; j < dim; ++j) tmp[j] = y[j] + dt * k3[j];
        rhs(tmp, t + dt, k4);
        for (size_t j = 0; j < dim; ++j)
            y[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        record(i + 1, t + dt);
    }
    out.pair_final.assign(y.begin() + static_cast<long>(1 + nb), y.end());
    return out;
}

} // namespace wqed
