// hilbert.hpp — two-qubit operator algebra, density-matrix utilities, and observables
//
// Basis ordering is fixed as {|ee>, |eg>, |ge>, |gg>}: the first letter is atom a,
// the second atom b. sigma_a^± act on the first tensor factor, sigma_b^± on the second.
#pragma once

#include "wqed/errors.hpp"
#include "wqed/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

namespace wqed {

// ------------------------------ operator constants ---------------------------

namespace detail {

using Matrix2c = Eigen::Matrix2cd;

inline Matrix2c sp2() {  // |e><g|
    Matrix2c m = Matrix2c::Zero();
    m(0, 1) = 1.0;
    return m;
}
inline Matrix2c sm2() {  // |g><e|
    Matrix2c m = Matrix2c::Zero();
    m(1, 0) = 1.0;
    return m;
}
inline Matrix2c sz2() {  // |e><e| - |g><g|
    Matrix2c m = Matrix2c::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline Matrix4c kron(const Matrix2c& x, const Matrix2c& y) {
    Matrix4c out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = x(i, j) * y;
    return out;
}

} // namespace detail

inline Matrix4c sigma_minus(Atom mu) {
    const auto id = detail::Matrix2c::Identity();
    return mu == Atom::a ? detail::kron(detail::sm2(), id)
                         : detail::kron(id, detail::sm2());
}

inline Matrix4c sigma_plus(Atom mu) {
    const auto id = detail::Matrix2c::Identity();
    return mu == Atom::a ? detail::kron(detail::sp2(), id)
                         : detail::kron(id, detail::sp2());
}

inline Matrix4c sigma_z(Atom mu) {
    const auto id = detail::Matrix2c::Identity();
    return mu == Atom::a ? detail::kron(detail::sz2(), id)
                         : detail::kron(id, detail::sz2());
}

// H_A = sum_mu omega_mu sigma_mu^+ sigma_mu^-
inline Matrix4c atom_hamiltonian(double omega_a, double omega_b) {
    return omega_a * (sigma_plus(Atom::a) * sigma_minus(Atom::a)) +
           omega_b * (sigma_plus(Atom::b) * sigma_minus(Atom::b));
}

// ------------------------------ states ---------------------------------------

inline Vector4c basis_ket(BasisState s) {
    Vector4c v = Vector4c::Zero();
    v(static_cast<int>(s)) = 1.0;
    return v;
}

// (|eg> ± |ge>)/sqrt(2)
inline Vector4c bell_ket(int sign) {
    Vector4c v = Vector4c::Zero();
    v(kEG) = 1.0 / std::sqrt(2.0);
    v(kGE) = (sign >= 0 ? 1.0 : -1.0) / std::sqrt(2.0);
    return v;
}

inline Matrix4c pure_density(const Vector4c& psi) { return psi * psi.adjoint(); }

// ------------------------------ validity checks ------------------------------

inline bool has_nan(const Matrix4c& m) {
    return !m.allFinite();
}

inline double hermiticity_defect(const Matrix4c& rho) {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_valid_state(const Matrix4c& rho, double herm_tol = 1e-6) {
    if (has_nan(rho)) throw invalid_state_error("density matrix contains NaN/Inf entries");
    if (hermiticity_defect(rho) > herm_tol)
        throw invalid_state_error("density matrix non-Hermitian beyond tolerance " +
                                  std::to_string(herm_tol));
}

// ------------------------------ observables ----------------------------------

struct Populations {
    double ee = 0.0, eg = 0.0, ge = 0.0, gg = 0.0;
    double sum() const { return ee + eg + ge + gg; }
};

inline Populations populations(const Matrix4c& rho) {
    require_valid_state(rho);
    return {rho(kEE, kEE).real(), rho(kEG, kEG).real(),
            rho(kGE, kGE).real(), rho(kGG, kGG).real()};
}

// Wootters concurrence. Slightly negative eigenvalues of statistical estimates are
// clipped at zero before the spin-flip construction so Monte Carlo noise cannot
// produce NaN from negative square roots.
inline double concurrence(const Matrix4c& rho_in, double herm_tol = 1e-6) {
    require_valid_state(rho_in, herm_tol);
    Matrix4c rho = 0.5 * (rho_in + rho_in.adjoint());

    // Project onto the PSD cone.
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

    // sigma_y (x) sigma_y in the fixed product basis: antidiagonal (-1, 1, 1, -1).
    Matrix4c yy = Matrix4c::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;

    const Matrix4c r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4c> ces(r, /*computeEigenvectors=*/false);

    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i)
        lam[static_cast<size_t>(i)] = std::sqrt(std::max(0.0, ces.eigenvalues()(i).real()));
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

// Trace distance (1/2) sum of singular values of (x - y).
inline double trace_distance(const Matrix4c& x, const Matrix4c& y) {
    Eigen::JacobiSVD<Matrix4c> svd(x - y);
    return 0.5 * svd.singularValues().sum();
}

// Smallest eigenvalue of the Hermitian part; deterministic evolutions keep this
// above -eps_psd (default 1e-8), statistical estimates above their error bars.
inline double min_eigenvalue(const Matrix4c& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (rho + rho.adjoint()),
                                               Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool is_positive_semidefinite(const Matrix4c& rho, double eps_psd = 1e-8) {
    return min_eigenvalue(rho) >= -eps_psd;
}

// Atom exchange a <-> b: permutes |eg> and |ge>.
inline Matrix4c swap_atoms(const Matrix4c& rho) {
    Matrix4c out;
    const std::array<int, 4> perm{kEE, kGE, kEG, kGG};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            out(i, j) = rho(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    return out;
}

} // namespace wqed
