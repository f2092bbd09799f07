// csv.hpp — deterministic CSV writers for time series and noise diagnostics
//
// All floating-point values are printed with %.17g so re-running an identical
// configuration reproduces byte-identical files.
#pragma once

#include "wqed/dynamics.hpp"
#include "wqed/errors.hpp"
#include "wqed/hilbert.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace wqed {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// upper-triangle coherence order: (ee,eg) (ee,ge) (ee,gg) (eg,ge) (eg,gg) (ge,gg)
inline const std::array<std::pair<int, int>, 6>& coherence_pairs() {
    static const std::array<std::pair<int, int>, 6> p{{{kEE, kEG},
                                                       {kEE, kGE},
                                                       {kEE, kGG},
                                                       {kEG, kGE},
                                                       {kEG, kGG},
                                                       {kGE, kGG}}};
    return p;
}

} // namespace detail

inline std::string series_csv_header(bool with_errors) {
    std::string h = "t,p_ee,p_eg,p_ge,p_gg";
    static const char* names[6] = {"ee_eg", "ee_ge", "ee_gg", "eg_ge", "eg_gg", "ge_gg"};
    for (const char* n : names) {
        h += ",re_";
        h += n;
        h += ",im_";
        h += n;
    }
    h += ",concurrence,trace";
    if (with_errors) h += ",se_p_ee,se_p_eg,se_p_ge,se_p_gg,se_max";
    return h;
}

inline std::string series_csv_row(double t, const Matrix4c& rho, const double* se4 = nullptr,
                                  double se_max = 0.0) {
    std::string row = detail::fmt(t);
    for (int i = 0; i < 4; ++i) row += "," + detail::fmt(rho(i, i).real());
    for (const auto& [i, j] : detail::coherence_pairs()) {
        row += "," + detail::fmt(rho(i, j).real());
        row += "," + detail::fmt(rho(i, j).imag());
    }
    row += "," + detail::fmt(concurrence(rho));
    row += "," + detail::fmt(rho.trace().real());
    if (se4) {
        for (int i = 0; i < 4; ++i) row += "," + detail::fmt(se4[i]);
        row += "," + detail::fmt(se_max);
    }
    return row;
}

inline void write_series_csv(const DensitySeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    out << series_csv_header(false) << "\n";
    for (size_t i = 0; i < s.times.size(); ++i)
        out << series_csv_row(s.times[i], s.rho[i]) << "\n";
}

inline void write_series_csv(const EnsembleSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    out << series_csv_header(true) << "\n";
    for (size_t i = 0; i < s.times.size(); ++i) {
        double se4[4];
        for (int d = 0; d < 4; ++d) se4[d] = s.se_re[i](d, d);
        out << series_csv_row(s.times[i], s.mean[i], se4, s.max_se(static_cast<int>(i)))
            << "\n";
    }
}

} // namespace wqed
