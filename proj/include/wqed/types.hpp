// types.hpp — shared aliases and small helpers for the two-qubit waveguide simulator
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace wqed {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// The two emitters. Used as an index everywhere a per-atom quantity appears.
enum class Atom : int { a = 0, b = 1 };

inline constexpr Atom other(Atom mu) noexcept {
    return mu == Atom::a ? Atom::b : Atom::a;
}

inline constexpr int idx(Atom mu) noexcept { return static_cast<int>(mu); }

// Ordered kernel/coupling pair (mu, nu); layout matches the storage order aa, ab, ba, bb.
enum class Pair : int { aa = 0, ab = 1, ba = 2, bb = 3 };

inline constexpr Pair make_pair(Atom mu, Atom nu) noexcept {
    return static_cast<Pair>(2 * idx(mu) + idx(nu));
}

inline constexpr int idx(Pair p) noexcept { return static_cast<int>(p); }

// Product-basis ordering {|ee>, |eg>, |ge>, |gg>} shared by every module.
// The first letter is atom a, the second atom b.
enum BasisState : int { kEE = 0, kEG = 1, kGE = 2, kGG = 3 };

inline double frobenius_norm(const Matrix4c& m) { return m.norm(); }

// scientific-notation formatting for diagnostics (std::to_string truncates small values)
inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

// Largest absolute entry difference; the workhorse comparison in tests.
inline double max_abs_diff(const Matrix4c& x, const Matrix4c& y) {
    return (x - y).cwiseAbs().maxCoeff();
}

} // namespace wqed
