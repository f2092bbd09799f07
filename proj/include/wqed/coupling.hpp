// coupling.hpp — spatial coupling distributions, waveguide mode grid, Fourier couplings
//
// Units: positions in units of the wavelength lambda = c/omega with c = 1 and
// omega_a = omega_b = 1 by default; time is the dimensionless omega*t.
#pragma once

#include "wqed/errors.hpp"
#include "wqed/types.hpp"

#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace wqed {

// ------------------------------ distributions --------------------------------

// g(x) = (g0/Ntilde) sum_i delta(x - x_i); Ntilde defaults to the point count so
// the point weights sum to g0.
struct CombDistribution {
    std::vector<double> points;
    double normalization = 0.0;  // 0 means "use points.size()"

    double ntilde() const {
        return normalization > 0.0 ? normalization : static_cast<double>(points.size());
    }
};

// g(x) = g0/(s sqrt(2 pi)) exp(-(x - center)^2 / (2 s^2)) — unit-normalized shape.
struct GaussianDistribution {
    double center = 0.0;
    double width = 0.0;
};

// Two Gaussian peaks of shared width. Each peak carries the same unit-normalized
// 1/(s sqrt(2 pi)) prefactor, so the total integrated weight is 2 g0.
struct DoubleGaussianDistribution {
    double center1 = 0.0;
    double center2 = 0.0;
    double width = 0.0;
};

struct CouplingDistribution {
    std::variant<CombDistribution, GaussianDistribution, DoubleGaussianDistribution> shape;
    double strength = 1.0;  // global prefactor g0

    void validate() const {
        if (!(strength >= 0.0) || !std::isfinite(strength))
            throw config_error("coupling strength must be finite and >= 0");
        if (const auto* c = std::get_if<CombDistribution>(&shape)) {
            if (c->points.empty()) throw config_error("comb distribution needs m >= 1 points");
            if (c->normalization < 0.0) throw config_error("comb normalization must be > 0");
        } else if (const auto* g = std::get_if<GaussianDistribution>(&shape)) {
            if (!(g->width > 0.0)) throw config_error("gaussian width must be > 0");
        } else if (const auto* d = std::get_if<DoubleGaussianDistribution>(&shape)) {
            if (!(d->width > 0.0)) throw config_error("double-gaussian width must be > 0");
        }
    }
};

inline CouplingDistribution make_comb(std::vector<double> points, double g0) {
    return {CombDistribution{std::move(points), 0.0}, g0};
}

// m equally spaced points centered on `center`.
inline CouplingDistribution make_comb_grid(double center, int m, double spacing, double g0) {
    if (m < 1) throw config_error("comb point count must be >= 1");
    std::vector<double> pts;
    pts.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        pts.push_back(center + (i - 0.5 * (m - 1)) * spacing);
    return make_comb(std::move(pts), g0);
}

inline CouplingDistribution make_gaussian(double center, double width, double g0) {
    return {GaussianDistribution{center, width}, g0};
}

inline CouplingDistribution make_double_gaussian(double c1, double c2, double width, double g0) {
    return {DoubleGaussianDistribution{c1, c2, width}, g0};
}

// Translate every position by dx (combs: all points; Gaussians: the centers).
inline CouplingDistribution translated(const CouplingDistribution& dist, double dx) {
    CouplingDistribution out = dist;
    if (auto* c = std::get_if<CombDistribution>(&out.shape)) {
        for (double& x : c->points) x += dx;
    } else if (auto* g = std::get_if<GaussianDistribution>(&out.shape)) {
        g->center += dx;
    } else if (auto* d = std::get_if<DoubleGaussianDistribution>(&out.shape)) {
        d->center1 += dx;
        d->center2 += dx;
    }
    return out;
}

// Leading center position; used to report the separation Delta x_ab.
inline double first_center(const CouplingDistribution& dist) {
    if (const auto* c = std::get_if<CombDistribution>(&dist.shape))
        return c->points.front();
    if (const auto* g = std::get_if<GaussianDistribution>(&dist.shape))
        return g->center;
    return std::get<DoubleGaussianDistribution>(dist.shape).center1;
}

// Separation between congruent coupling profiles, Delta x_ab = x_b1 - x_a1.
// For double-peak pairs both center differences must agree.
struct SeparationSpec {
    double delta_x_ab = 0.0;
};

inline SeparationSpec separation(const CouplingDistribution& a, const CouplingDistribution& b,
                                 double tol = 1e-9) {
    const auto* da = std::get_if<DoubleGaussianDistribution>(&a.shape);
    const auto* db = std::get_if<DoubleGaussianDistribution>(&b.shape);
    if (da && db) {
        const double d1 = db->center1 - da->center1;
        const double d2 = db->center2 - da->center2;
        if (std::abs(d1 - d2) > tol)
            throw config_error("double-peak pair is not a rigid translation: " +
                               std::to_string(d1) + " vs " + std::to_string(d2));
        return {d1};
    }
    return {first_center(b) - first_center(a)};
}

// ------------------------------ mode grid ------------------------------------

// Uniform symmetric wavevector grid with linear dispersion omega = |k| (c = 1).
// The quadrature weight sqrt(dk / 2 pi) is folded into the Fourier couplings so
// mode sums approximate continuum integrals.
struct ModeGrid {
    std::vector<double> k;       // wavevectors, size n
    std::vector<double> omega;   // |k|
    double dk = 0.0;
    double k_max = 0.0;
    double recurrence_time = 0.0;  // 2 pi / dk, artificial revival time

    int size() const { return static_cast<int>(k.size()); }
    double min_omega() const { return 0.5 * dk; }  // closest approach to omega = 0 (even n)
};

inline ModeGrid build_mode_grid(double k_max, int n, double t_max) {
    if (!(k_max > 0.0)) throw config_error("k_max must be > 0");
    if (n < 2 || n % 2 != 0) throw config_error("mode count must be even and >= 2");
    ModeGrid grid;
    grid.k_max = k_max;
    grid.dk = 2.0 * k_max / static_cast<double>(n - 1);
    grid.recurrence_time = 2.0 * kPi / grid.dk;
    if (!(t_max < 0.5 * grid.recurrence_time))
        throw config_error("simulation horizon too long: t_max must be < " +
                           std::to_string(0.5 * grid.recurrence_time) +
                           " for this grid (recurrence time " +
                           std::to_string(grid.recurrence_time) + "); refine dk");
    grid.k.resize(static_cast<size_t>(n));
    grid.omega.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        grid.k[static_cast<size_t>(j)] = -k_max + grid.dk * j;
        grid.omega[static_cast<size_t>(j)] = std::abs(grid.k[static_cast<size_t>(j)]);
    }
    return grid;
}

// ------------------------------ Fourier couplings -----------------------------

// G_k = integral dx g(x) exp(-i k x), scaled by sqrt(dk / 2 pi).
// Comb: (g0/Ntilde) sum_i exp(-i k x_i). Gaussians integrate in closed form.
inline std::vector<Complex> fourier_coupling(const CouplingDistribution& dist,
                                             const ModeGrid& grid) {
    dist.validate();
    const double w = std::sqrt(grid.dk / (2.0 * kPi));
    std::vector<Complex> g(static_cast<size_t>(grid.size()));

    for (int j = 0; j < grid.size(); ++j) {
        const double k = grid.k[static_cast<size_t>(j)];
        Complex val{0.0, 0.0};
        if (const auto* c = std::get_if<CombDistribution>(&dist.shape)) {
            for (double x : c->points) val += std::exp(-kI * k * x);
            val /= c->ntilde();
        } else if (const auto* ga = std::get_if<GaussianDistribution>(&dist.shape)) {
            val = std::exp(-kI * k * ga->center) * std::exp(-0.5 * k * k * ga->width * ga->width);
        } else {
            const auto& d = std::get<DoubleGaussianDistribution>(dist.shape);
            val = (std::exp(-kI * k * d.center1) + std::exp(-kI * k * d.center2)) *
                  std::exp(-0.5 * k * k * d.width * d.width);
        }
        g[static_cast<size_t>(j)] = dist.strength * w * val;
    }
    return g;
}

// Flat-spectrum Markovian decay rate of a single point coupling of strength g0:
// Gamma = 2 g0^2 (two dispersion branches, spectral density g0^2/pi each side).
inline double markov_rate(double g0) { return 2.0 * g0 * g0; }

// Strength giving decay rate gamma in the flat-spectrum limit.
inline double strength_for_rate(double gamma) { return std::sqrt(0.5 * gamma); }

} // namespace wqed
