// osolver.hpp — two-time solver for the effective operators O_mu(t,s) and their
// kernel convolutions Obar_mu(t)
//
// Noise-free evolution: for fixed s, d/dt O_mu(t,s) = [K(t), O_mu(t,s)] with
// K(t) = -i H_A - sum_nu sigma_nu^+ Obar_nu(t) and diagonal data O_mu(t,t) = sigma_mu^-.
// Obar_mu(t) = sum_nu integral_0^t ds alpha_{mu nu}(t-s) O_nu(t,s), evaluated by
// trapezoidal quadrature over the current row; a Heun predictor-corrector pass
// resolves the implicit Obar <-> O coupling at second order.
//
// Memory: the march keeps only the current row {O(t_i, s_j)}_j, optionally truncated
// to the kernel's effective support, so long horizons stay O(N_t) in memory.
#pragma once

#include "wqed/correlation.hpp"
#include "wqed/errors.hpp"
#include "wqed/hilbert.hpp"
#include "wqed/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace wqed {

struct OFieldOptions {
    bool keep_rows = false;           // retain the full lower-triangular field (tests)
    double support_threshold = 1e-6;  // row window: drop lags with |alpha| below this * alpha(0)
    double instability_norm = 1e6;    // abort when any row entry grows beyond this
};

struct OField {
    double dt = 0.0;
    double t_max = 0.0;
    std::vector<double> times;
    std::array<std::vector<Matrix4c>, 2> obar;  // per atom, per time index
    Matrix4c h_atoms = Matrix4c::Zero();

    // populated when keep_rows: rows[atom][i][j] = O_atom(t_i, s_j), j = 0..i
    bool has_rows = false;
    std::array<std::vector<std::vector<Matrix4c>>, 2> rows;

    int steps() const { return static_cast<int>(times.size()); }
};

// Obar_a(t), Obar_b(t) with the documented linear interpolation between grid points.
inline std::array<Matrix4c, 2> obar_at(const OField& field, double t) {
    if (t < -1e-12 || t > field.t_max + field.dt)
        throw config_error("obar_at: t outside the tabulated range");
    const double x = std::max(0.0, t) / field.dt;
    int i = static_cast<int>(x);
    if (i >= field.steps() - 1) {
        return {field.obar[0].back(), field.obar[1].back()};
    }
    const double f = x - i;
    std::array<Matrix4c, 2> out;
    for (int mu = 0; mu < 2; ++mu) {
        const auto m = static_cast<size_t>(mu);
        out[m] = (1.0 - f) * field.obar[m][static_cast<size_t>(i)] +
                 f * field.obar[m][static_cast<size_t>(i + 1)];
    }
    return out;
}

namespace detail {

// Longest lag (in steps of dt) at which any pair kernel still exceeds
// threshold * max(|alpha_aa(0)|, |alpha_bb(0)|). Delta kernels need no history.
inline int kernel_support_steps(const CorrelationKernel& ker, double dt, int n_steps,
                                double threshold) {
    if (ker.is_delta) return 0;
    double ref = 0.0;
    ref = std::max(std::abs(ker.at(Pair::aa, 0.0)), std::abs(ker.at(Pair::bb, 0.0)));
    if (ref <= 0.0) return 0;
    int support = 0;
    for (int i = 0; i < n_steps; ++i) {
        const double tau = i * dt;
        double m = 0.0;
        for (int p = 0; p < 4; ++p)
            m = std::max(m, std::abs(ker.at(static_cast<Pair>(p), tau)));
        if (m >= threshold * ref) support = i;
    }
    return support;
}

// Trapezoidal convolution of the current row against the kernel.
// row[mu][j] holds O_mu(t_i, s_j) for j in [j0, i]; returns Obar_a, Obar_b at t_i.
inline std::array<Matrix4c, 2> convolve_row(const CorrelationKernel& ker, double dt, int i,
                                            int j0,
                                            const std::array<std::vector<Matrix4c>, 2>& row) {
    std::array<Matrix4c, 2> obar{Matrix4c::Zero(), Matrix4c::Zero()};
    if (ker.is_delta) {
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu)
                obar[static_cast<size_t>(mu)] +=
                    0.5 * ker.delta_strength[static_cast<size_t>(2 * mu + nu)] *
                    row[static_cast<size_t>(nu)][static_cast<size_t>(i)];
        return obar;
    }
    if (i == j0) return obar;  // empty integral
    for (int j = j0; j <= i; ++j) {
        const double w = (j == j0 || j == i) ? 0.5 : 1.0;
        const double tau = (i - j) * dt;
        for (int mu = 0; mu < 2; ++mu)
            for (int nu = 0; nu < 2; ++nu)
                obar[static_cast<size_t>(mu)] +=
                    (w * dt) * ker.at(make_pair(static_cast<Atom>(mu), static_cast<Atom>(nu)), tau) *
                    row[static_cast<size_t>(nu)][static_cast<size_t>(j)];
    }
    return obar;
}

inline Matrix4c commutator(const Matrix4c& x, const Matrix4c& y) { return x * y - y * x; }

} // namespace detail

// March the matrix-form field over [0, t_max] and tabulate Obar_mu(t).
inline OField evolve_matrix_field(const CorrelationKernel& kernel, const Matrix4c& h_atoms,
                                  double dt, double t_max, OFieldOptions opts = {}) {
    OField field;
    field.dt = dt;
    field.t_max = t_max;
    field.h_atoms = h_atoms;
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    field.times.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) field.times[static_cast<size_t>(i)] = i * dt;

    const std::array<Matrix4c, 2> sm{sigma_minus(Atom::a), sigma_minus(Atom::b)};
    const std::array<Matrix4c, 2> sp{sigma_plus(Atom::a), sigma_plus(Atom::b)};

    const int support =
        opts.keep_rows ? n : detail::kernel_support_steps(kernel, dt, n, opts.support_threshold);

    std::array<std::vector<Matrix4c>, 2> row;       // O(t_i, s_j), j = j0..i
    std::array<std::vector<Matrix4c>, 2> pred;      // predictor row at t_{i+1}
    for (int mu = 0; mu < 2; ++mu) {
        row[static_cast<size_t>(mu)].assign(static_cast<size_t>(n), Matrix4c::Zero());
        pred[static_cast<size_t>(mu)].assign(static_cast<size_t>(n), Matrix4c::Zero());
        row[static_cast<size_t>(mu)][0] = sm[static_cast<size_t>(mu)];
        field.obar[static_cast<size_t>(mu)].assign(static_cast<size_t>(n), Matrix4c::Zero());
        if (opts.keep_rows) {
            field.rows[static_cast<size_t>(mu)].resize(static_cast<size_t>(n));
            field.rows[static_cast<size_t>(mu)][0] = {sm[static_cast<size_t>(mu)]};
        }
    }
    field.has_rows = opts.keep_rows;

    int j0 = 0;
    auto obar_i = detail::convolve_row(kernel, dt, 0, j0, row);
    field.obar[0][0] = obar_i[0];
    field.obar[1][0] = obar_i[1];

    const auto generator = [&](const std::array<Matrix4c, 2>& ob) {
        Matrix4c k = -kI * h_atoms;
        k -= sp[0] * ob[0];
        k -= sp[1] * ob[1];
        return k;
    };

    for (int i = 0; i < n - 1; ++i) {
        const Matrix4c k_now = generator(obar_i);

        // predictor (Euler) for every retained lag, plus the new diagonal
        for (int mu = 0; mu < 2; ++mu) {
            auto& r = row[static_cast<size_t>(mu)];
            auto& p = pred[static_cast<size_t>(mu)];
            for (int j = j0; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                p[js] = r[js] + dt * detail::commutator(k_now, r[js]);
            }
            p[static_cast<size_t>(i + 1)] = sm[static_cast<size_t>(mu)];
        }
        const auto obar_pred = detail::convolve_row(kernel, dt, i + 1, j0, pred);
        const Matrix4c k_pred = generator(obar_pred);

        // corrector (Heun)
        double max_norm = 0.0;
        for (int mu = 0; mu < 2; ++mu) {
            auto& r = row[static_cast<size_t>(mu)];
            auto& p = pred[static_cast<size_t>(mu)];
            for (int j = j0; j <= i; ++j) {
                const auto js = static_cast<size_t>(j);
                r[js] += 0.5 * dt *
                         (detail::commutator(k_now, r[js]) + detail::commutator(k_pred, p[js]));
                max_norm = std::max(max_norm, r[js].cwiseAbs().maxCoeff());
            }
            r[static_cast<size_t>(i + 1)] = sm[static_cast<size_t>(mu)];
        }
        if (max_norm > opts.instability_norm)
            throw integrator_error(
                "O-field norm grew beyond " + std::to_string(opts.instability_norm) +
                " at t = " + std::to_string((i + 1) * dt) + "; reduce dt");

        // advance the window
        j0 = std::max(j0, (i + 1) - support);

        obar_i = detail::convolve_row(kernel, dt, i + 1, j0, row);
        field.obar[0][static_cast<size_t>(i + 1)] = obar_i[0];
        field.obar[1][static_cast<size_t>(i + 1)] = obar_i[1];

        if (opts.keep_rows) {
            for (int mu = 0; mu < 2; ++mu) {
                auto& dst = field.rows[static_cast<size_t>(mu)][static_cast<size_t>(i + 1)];
                dst.assign(row[static_cast<size_t>(mu)].begin(),
                           row[static_cast<size_t>(mu)].begin() + i + 2);
            }
        }
    }
    return field;
}

// ------------------------------ coefficient form ------------------------------

// O_mu(t,s) = sum_j p_{mu j}(t,s) O_{mu j} over the basis
//   O_{mu 1} = sigma_mu^-,            O_{mu 2} = sigma_mu^z sigma_nu^-,
//   O_{mu 3} = sigma_nu^-,            O_{mu 4} = sigma_nu^z sigma_mu^-,
// with P_{mu j}(t) = int_0^t alpha_{mu mu}(t-s) p_{mu j}(t,s) ds and
//      Q_{mu j}(t) = int_0^t alpha_{nu mu}(t-s) p_{mu j}(t,s) ds.
struct CoefficientField {
    double dt = 0.0;
    double t_max = 0.0;
    std::vector<double> times;
    // P[atom][j][time], Q[atom][j][time]
    std::array<std::array<std::vector<Complex>, 4>, 2> P, Q;
    std::array<std::vector<Matrix4c>, 2> obar;  // reconstructed from P, Q
    double omega_a = 0.0, omega_b = 0.0;

    int steps() const { return static_cast<int>(times.size()); }
};

// Basis operators O_{mu j} for atom mu.
inline std::array<Matrix4c, 4> o_basis(Atom mu) {
    const Atom nu = other(mu);
    return {sigma_minus(mu), sigma_z(mu) * sigma_minus(nu), sigma_minus(nu),
            sigma_z(nu) * sigma_minus(mu)};
}

namespace detail {

using Coef4 = std::array<Complex, 4>;

// P_{mu j}, Q_{mu j} at row time t_i by trapezoid over the coefficient row.
// prow[mu][j][lag index j'] with lags j' = j0..i.
struct PQ {
    std::array<Coef4, 2> P;
    std::array<Coef4, 2> Q;
};

inline PQ convolve_coeff_row(const CorrelationKernel& ker, double dt, int i, int j0,
                             const std::array<std::array<std::vector<Complex>, 4>, 2>& prow) {
    PQ out{};
    for (int mu = 0; mu < 2; ++mu)
        for (int j = 0; j < 4; ++j) {
            out.P[static_cast<size_t>(mu)][static_cast<size_t>(j)] = Complex{0.0, 0.0};
            out.Q[static_cast<size_t>(mu)][static_cast<size_t>(j)] = Complex{0.0, 0.0};
        }
    if (ker.is_delta) {
        for (int mu = 0; mu < 2; ++mu) {
            const Atom amu = static_cast<Atom>(mu);
            const Atom anu = other(amu);
            for (int j = 0; j < 4; ++j) {
                const Complex diag =
                    prow[static_cast<size_t>(mu)][static_cast<size_t>(j)][static_cast<size_t>(i)];
                out.P[static_cast<size_t>(mu)][static_cast<size_t>(j)] =
                    0.5 * ker.delta_strength[static_cast<size_t>(idx(make_pair(amu, amu)))] * diag;
                out.Q[static_cast<size_t>(mu)][static_cast<size_t>(j)] =
                    0.5 * ker.delta_strength[static_cast<size_t>(idx(make_pair(anu, amu)))] * diag;
            }
        }
        return out;
    }
    if (i == j0) return out;
    for (int jj = j0; jj <= i; ++jj) {
        const double w = ((jj == j0 || jj == i) ? 0.5 : 1.0) * dt;
        const double tau = (i - jj) * dt;
        for (int mu = 0; mu < 2; ++mu) {
            const Atom amu = static_cast<Atom>(mu);
            const Atom anu = other(amu);
            const Complex a_mm = ker.at(make_pair(amu, amu), tau);
            const Complex a_nm = ker.at(make_pair(anu, amu), tau);
            for (int j = 0; j < 4; ++j) {
                const Complex pv =
                    prow[static_cast<size_t>(mu)][static_cast<size_t>(j)][static_cast<size_t>(jj)];
                out.P[static_cast<size_t>(mu)][static_cast<size_t>(j)] += w * a_mm * pv;
                out.Q[static_cast<size_t>(mu)][static_cast<size_t>(j)] += w * a_nm * pv;
            }
        }
    }
    return out;
}

// Right-hand side of the coupled coefficient system for atom mu at one lag.
// X are the Obar_mu components in mu's basis, Y the Obar_nu components in the
// same basis:
//   X_{mu 1} = P_{mu 1} + Q_{nu 3},  X_{mu 2} = P_{mu 2} + Q_{nu 4},
//   X_{mu 3} = P_{mu 3} + Q_{nu 1},  X_{mu 4} = P_{mu 4} + Q_{nu 2},
//   Y_{nu 1} = P_{nu 3} + Q_{mu 1},  Y_{nu 2} = P_{nu 4} + Q_{mu 2},
//   Y_{nu 3} = P_{nu 1} + Q_{mu 3},  Y_{nu 4} = P_{nu 2} + Q_{mu 4}.
inline Coef4 coeff_rhs(const Coef4& p, double omega_mu, double omega_nu, const Coef4& x,
                       const Coef4& y) {
    const Complex iwm{0.0, omega_mu};
    const Complex iwn{0.0, omega_nu};
    const Complex c11 = x[0] + y[1];  // X1 + Y2
    const Complex c42 = x[3] + y[1];  // X4 + Y2
    const Complex c43 = x[3] + y[2];  // X4 + Y3
    const Complex c23 = x[1] - x[2];  // X2 - X3
    const Complex c41 = y[3] - y[0];  // Y4 - Y1
    Coef4 d;
    d[0] = iwm * p[0] + p[0] * c11 + p[1] * c41 + p[3] * c42;
    d[1] = iwn * p[1] + p[0] * c23 + p[1] * c43 + p[2] * c42;
    d[2] = iwn * p[2] + p[1] * c42 + p[2] * c43 + p[3] * c23;
    d[3] = iwm * p[3] + p[0] * c42 + p[2] * c41 + p[3] * c11;
    return d;
}

} // namespace detail

inline CoefficientField evolve_coefficient_field(const CorrelationKernel& kernel,
                                                 double omega_a, double omega_b, double dt,
                                                 double t_max, OFieldOptions opts = {}) {
    CoefficientField field;
    field.dt = dt;
    field.t_max = t_max;
    field.omega_a = omega_a;
    field.omega_b = omega_b;
    const int n = static_cast<int>(std::round(t_max / dt)) + 1;
    field.times.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) field.times[static_cast<size_t>(i)] = i * dt;

    for (int mu = 0; mu < 2; ++mu) {
        for (int j = 0; j < 4; ++j) {
            field.P[static_cast<size_t>(mu)][static_cast<size_t>(j)].assign(
                static_cast<size_t>(n), Complex{0.0, 0.0});
            field.Q[static_cast<size_t>(mu)][static_cast<size_t>(j)].assign(
                static_cast<size_t>(n), Complex{0.0, 0.0});
        }
        field.obar[static_cast<size_t>(mu)].assign(static_cast<size_t>(n), Matrix4c::Zero());
    }

    const int support =
        opts.keep_rows ? n : detail::kernel_support_steps(kernel, dt, n, opts.support_threshold);

    // prow[mu][j][lag]: coefficient rows; initial condition p_{mu 1}(t,t) = 1.
    std::array<std::array<std::vector<Complex>, 4>, 2> prow, ppred;
    for (int mu = 0; mu < 2; ++mu)
        for (int j = 0; j < 4; ++j) {
            prow[static_cast<size_t>(mu)][static_cast<size_t>(j)].assign(static_cast<size_t>(n),
                                                                         Complex{0.0, 0.0});
            ppred[static_cast<size_t>(mu)][static_cast<size_t>(j)].assign(static_cast<size_t>(n),
                                                                          Complex{0.0, 0.0});
        }
    prow[0][0][0] = 1.0;
    prow[1][0][0] = 1.0;

    const std::array<std::array<Matrix4c, 4>, 2> basis{o_basis(Atom::a), o_basis(Atom::b)};
    const std::array<double, 2> omega{omega_a, omega_b};

    int j0 = 0;
    auto pq = detail::convolve_coeff_row(kernel, dt, 0, j0, prow);

    const auto record = [&](int i, const detail::PQ& v) {
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            Matrix4c ob = Matrix4c::Zero();
            const int nu = 1 - mu;
            const auto nn = static_cast<size_t>(nu);
            // Obar_mu = sum_j (P_{mu j} + Q_{nu-side pairing}) O_{mu j} + cross-atom basis:
            // assembled as X in mu's basis plus Y contributions already in mu's basis.
            const std::array<Complex, 4> x{
                v.P[m][0] + v.Q[nn][2], v.P[m][1] + v.Q[nn][3], v.P[m][2] + v.Q[nn][0],
                v.P[m][3] + v.Q[nn][1]};
            for (int j = 0; j < 4; ++j) {
                field.P[m][static_cast<size_t>(j)][static_cast<size_t>(i)] =
                    v.P[m][static_cast<size_t>(j)];
                field.Q[m][static_cast<size_t>(j)][static_cast<size_t>(i)] =
                    v.Q[m][static_cast<size_t>(j)];
                ob += x[static_cast<size_t>(j)] * basis[m][static_cast<size_t>(j)];
            }
            field.obar[m][static_cast<size_t>(i)] = ob;
        }
    };
    record(0, pq);

    const auto xy = [&](const detail::PQ& v, int mu) {
        const auto m = static_cast<size_t>(mu);
        const auto nn = static_cast<size_t>(1 - mu);
        const detail::Coef4 x{v.P[m][0] + v.Q[nn][2], v.P[m][1] + v.Q[nn][3],
                              v.P[m][2] + v.Q[nn][0], v.P[m][3] + v.Q[nn][1]};
        const detail::Coef4 y{v.P[nn][2] + v.Q[m][0], v.P[nn][3] + v.Q[m][1],
                              v.P[nn][0] + v.Q[m][2], v.P[nn][1] + v.Q[m][3]};
        return std::pair<detail::Coef4, detail::Coef4>{x, y};
    };

    for (int i = 0; i < n - 1; ++i) {
        // predictor
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            const auto [x, y] = xy(pq, mu);
            for (int jj = j0; jj <= i; ++jj) {
                const auto js = static_cast<size_t>(jj);
                const detail::Coef4 p{prow[m][0][js], prow[m][1][js], prow[m][2][js],
                                      prow[m][3][js]};
                const auto d = detail::coeff_rhs(p, omega[m], omega[static_cast<size_t>(1 - mu)],
                                                 x, y);
                for (int j = 0; j < 4; ++j)
                    ppred[m][static_cast<size_t>(j)][js] =
                        p[static_cast<size_t>(j)] + dt * d[static_cast<size_t>(j)];
            }
            ppred[m][0][static_cast<size_t>(i + 1)] = 1.0;
            for (int j = 1; j < 4; ++j) ppred[m][static_cast<size_t>(j)][static_cast<size_t>(i + 1)] = 0.0;
        }
        const auto pq_pred = detail::convolve_coeff_row(kernel, dt, i + 1, j0, ppred);

        // corrector
        double max_abs = 0.0;
        for (int mu = 0; mu < 2; ++mu) {
            const auto m = static_cast<size_t>(mu);
            const auto [x0, y0] = xy(pq, mu);
            const auto [x1, y1] = xy(pq_pred, mu);
            for (int jj = j0; jj <= i; ++jj) {
                const auto js = static_cast<size_t>(jj);
                const detail::Coef4 p{prow[m][0][js], prow[m][1][js], prow[m][2][js],
                                      prow[m][3][js]};
                const detail::Coef4 pp{ppred[m][0][js], ppred[m][1][js], ppred[m][2][js],
                                       ppred[m][3][js]};
                const auto d0 = detail::coeff_rhs(p, omega[m], omega[static_cast<size_t>(1 - mu)],
                                                  x0, y0);
                const auto d1 = detail::coeff_rhs(pp, omega[m], omega[static_cast<size_t>(1 - mu)],
                                                  x1, y1);
                for (int j = 0; j < 4; ++j) {
                    const auto jsz = static_cast<size_t>(j);
                    prow[m][jsz][js] = p[jsz] + 0.5 * dt * (d0[jsz] + d1[jsz]);
                    max_abs = std::max(max_abs, std::abs(prow[m][jsz][js]));
                }
            }
            prow[m][0][static_cast<size_t>(i + 1)] = 1.0;
            for (int j = 1; j < 4; ++j) prow[m][static_cast<size_t>(j)][static_cast<size_t>(i + 1)] = 0.0;
        }
        if (max_abs > opts.instability_norm)
            throw integrator_error("coefficient field grew beyond " +
                                   std::to_string(opts.instability_norm) + " at t = " +
                                   std::to_string((i + 1) * dt) + "; reduce dt");

        j0 = std::max(j0, (i + 1) - support);
        pq = detail::convolve_coeff_row(kernel, dt, i + 1, j0, prow);
        record(i + 1, pq);
    }
    return field;
}

// Projection residual of a two-time entry outside span{O_{mu 1..4}}.
inline double span_residual(const Matrix4c& o, Atom mu) {
    const auto basis = o_basis(mu);
    // Gram matrix of the (non-orthogonal) basis under the Frobenius inner product.
    Eigen::Matrix4cd gram;
    Eigen::Vector4cd rhs;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
            gram(i, j) = (basis[static_cast<size_t>(i)].adjoint() * basis[static_cast<size_t>(j)])
                             .trace();
        rhs(i) = (basis[static_cast<size_t>(i)].adjoint() * o).trace();
    }
    const Eigen::Vector4cd c = gram.fullPivLu().solve(rhs);
    Matrix4c fit = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) fit += c(i) * basis[static_cast<size_t>(i)];
    return (o - fit).norm();
}

} // namespace wqed
