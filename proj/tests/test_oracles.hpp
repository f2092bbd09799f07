// test_oracles.hpp — independent numerical oracles for the test suite
//
// Deliberately separate from the library's solution paths: eigenvalues come from
// the characteristic polynomial (Faddeev-LeVerrier) rooted by Durand-Kerner, and
// integrals from composite Simpson quadrature.
#pragma once

#include "wqed/types.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace testo {

using wqed::Complex;
using wqed::Matrix4c;

// Characteristic polynomial coefficients of a 4x4 matrix:
// p(x) = x^4 + c3 x^3 + c2 x^2 + c1 x + c0 (Faddeev-LeVerrier recursion).
inline std::array<Complex, 4> char_poly(const Matrix4c& a) {
    std::array<Complex, 5> cs{};
    cs[0] = 1.0;  // cs[k] multiplies x^{4-k}
    Matrix4c prev = Matrix4c::Zero();
    for (int k = 1; k <= 4; ++k) {
        const Matrix4c mk = a * prev + cs[static_cast<size_t>(k - 1)] * Matrix4c::Identity();
        cs[static_cast<size_t>(k)] = -(a * mk).trace() / static_cast<double>(k);
        prev = mk;
    }
    return {cs[4], cs[3], cs[2], cs[1]};  // constant .. x^3 coefficient
}

// All four roots of x^4 + c3 x^3 + c2 x^2 + c1 x + c0 by Durand-Kerner iteration.
inline std::array<Complex, 4> quartic_roots(const std::array<Complex, 4>& c) {
    const auto p = [&](Complex x) {
        return ((x + c[3]) * x + c[2]) * x * x + c[1] * x + c[0];
    };
    std::array<Complex, 4> r{Complex{0.4, 0.9}, Complex{-0.91, 0.52}, Complex{0.12, -1.1},
                             Complex{0.81, -0.37}};
    for (int it = 0; it < 400; ++it) {
        double move = 0.0;
        for (int i = 0; i < 4; ++i) {
            Complex den{1.0, 0.0};
            for (int j = 0; j < 4; ++j)
                if (j != i) den *= r[static_cast<size_t>(i)] - r[static_cast<size_t>(j)];
            const Complex step = p(r[static_cast<size_t>(i)]) / den;
            r[static_cast<size_t>(i)] -= step;
            move = std::max(move, std::abs(step));
        }
        if (move < 1e-14) break;
    }
    return r;
}

inline std::array<Complex, 4> eigenvalues_oracle(const Matrix4c& a) {
    return quartic_roots(char_poly(a));
}

// Composite Simpson over [a, b] with n subintervals (n rounded up to even).
inline Complex simpson(const std::function<Complex(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    Complex acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

// Random density matrix rho = X X^dag / tr with Gaussian X.
inline Matrix4c random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix4c x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = Complex{g(rng), g(rng)};
    Matrix4c rho = x * x.adjoint();
    return rho / rho.trace().real();
}

inline Complex random_unit(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * wqed::kPi);
    const double th = u(rng);
    return {std::cos(th), std::sin(th)};
}

// Least-squares exponential rate: fit log(y) = a - lambda t.
inline double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y) {
    double st = 0, sl = 0, stt = 0, stl = 0;
    const auto n = static_cast<double>(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        const double l = std::log(y[i]);
        st += t[i];
        sl += l;
        stt += t[i] * t[i];
        stl += t[i] * l;
    }
    return -(n * stl - st * sl) / (n * stt - st * st);
}

} // namespace testo
