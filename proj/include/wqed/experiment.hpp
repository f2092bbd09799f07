// experiment.hpp — batch experiment runner: structured configs in, CSV + manifest out
//
// The configuration is a single JSON document (schema in the README). Outputs are
// deterministic for a fixed seed: files are written atomically and doubles with
// %.17g, so re-running an identical manifest reproduces byte-identical CSVs.
#pragma once

#include "wqed/correlation.hpp"
#include "wqed/coupling.hpp"
#include "wqed/csv.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/errors.hpp"
#include "wqed/noise.hpp"
#include "wqed/oracle.hpp"
#include "wqed/osolver.hpp"
#include "wqed/thermal_squeezed.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace wqed {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// ------------------------------ configuration --------------------------------

enum class Method { sse, master, lindblad, dressed1, dressed2 };

inline Method parse_method(const std::string& s) {
    if (s == "sse") return Method::sse;
    if (s == "master") return Method::master;
    if (s == "lindblad") return Method::lindblad;
    if (s == "dressed1") return Method::dressed1;
    if (s == "dressed2") return Method::dressed2;
    throw config_error("method: unknown value '" + s + "'");
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::sse: return "sse";
        case Method::master: return "master";
        case Method::lindblad: return "lindblad";
        case Method::dressed1: return "dressed1";
        case Method::dressed2: return "dressed2";
    }
    return "?";
}

// How an atom's comb was specified; center/spacing combs support m sweeps.
struct AtomSpec {
    CouplingDistribution dist;
    bool comb_from_center = false;
    double comb_center = 0.0;
    double comb_spacing = 0.0;
    int comb_m = 1;
};

struct SweepAxes {
    std::vector<int> m;
    std::vector<double> width;
    std::vector<double> delta_x_ab;

    bool empty() const { return m.empty() && width.empty() && delta_x_ab.empty(); }
};

struct ExperimentConfig {
    std::string scenario = "run";
    Method method = Method::master;
    std::string initial = "eg";
    Vector4c initial_vector = Vector4c::Zero();

    AtomSpec atom_a, atom_b;
    double k_max = 20.0;
    int n_modes = 512;
    double dt = 0.005;
    double t_max = 10.0;
    double omega_a = 1.0, omega_b = 1.0;

    int n_traj = 2000;
    uint64_t seed = 1;
    int threads = 0;

    std::optional<double> lindblad_gamma;
    std::optional<double> beta;
    double omega_floor = -1.0;  // < 0: grid default dk/2
    std::optional<SqueezeProfile> squeeze;

    double t_probe = 1.8;
    SweepAxes sweep;

    std::string out_dir = "out";
    std::string prefix = "";

    // noise-test parameters
    int noise_samples = 100000;
    int noise_probes = 20;
};

namespace detail {

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw config_error(path + "." + key + ": missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(path + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

inline AtomSpec parse_atom(const json& j, const std::string& path, double default_strength) {
    AtomSpec spec;
    const auto type = get_field<std::string>(j, path, "type");
    const double g0 = get_or<double>(j, "strength", default_strength);
    if (type == "comb") {
        if (j.contains("points")) {
            spec.dist = make_comb(j.at("points").get<std::vector<double>>(), g0);
        } else {
            spec.comb_from_center = true;
            spec.comb_center = get_or<double>(j, "center", 0.0);
            spec.comb_m = get_or<int>(j, "m", 1);
            spec.comb_spacing = get_or<double>(j, "spacing", 0.5);
            if (spec.comb_m < 1) throw config_error(path + ".m: must be >= 1");
            spec.dist = make_comb_grid(spec.comb_center, spec.comb_m, spec.comb_spacing, g0);
        }
        if (j.contains("normalization"))
            std::get<CombDistribution>(spec.dist.shape).normalization =
                j.at("normalization").get<double>();
    } else if (type == "gaussian") {
        spec.dist = make_gaussian(get_field<double>(j, path, "center"),
                                  get_field<double>(j, path, "width"), g0);
    } else if (type == "double_gaussian") {
        const auto centers = get_field<std::vector<double>>(j, path, "centers");
        if (centers.size() != 2) throw config_error(path + ".centers: need exactly 2 values");
        spec.dist =
            make_double_gaussian(centers[0], centers[1], get_field<double>(j, path, "width"), g0);
    } else {
        throw config_error(path + ".type: unknown distribution '" + type + "'");
    }
    spec.dist.validate();
    return spec;
}

inline std::vector<double> parse_axis(const json& j, const std::string& path) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object()) {
        const double from = get_field<double>(j, path, "from");
        const double to = get_field<double>(j, path, "to");
        const int count = get_field<int>(j, path, "count");
        if (count < 1) throw config_error(path + ".count: must be >= 1");
        std::vector<double> v(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i)
            v[static_cast<size_t>(i)] =
                count == 1 ? from : from + (to - from) * i / (count - 1);
        return v;
    }
    throw config_error(path + ": expected array or {from,to,count}");
}

} // namespace detail

inline Vector4c parse_initial_state(const std::string& name, const json* custom) {
    if (name == "eg") return basis_ket(kEG);
    if (name == "ge") return basis_ket(kGE);
    if (name == "ee") return basis_ket(kEE);
    if (name == "gg") return basis_ket(kGG);
    if (name == "bell+") return bell_ket(+1);
    if (name == "bell-") return bell_ket(-1);
    if (name == "custom") {
        if (!custom) throw config_error("initial_vector: required for initial = custom");
        const auto rows = custom->get<std::vector<std::vector<double>>>();
        if (rows.size() != 4) throw config_error("initial_vector: need 4 [re, im] entries");
        Vector4c v;
        for (int i = 0; i < 4; ++i) {
            const auto& r = rows[static_cast<size_t>(i)];
            if (r.size() != 2) throw config_error("initial_vector: entries are [re, im]");
            v(i) = Complex{r[0], r[1]};
        }
        const double n = v.norm();
        if (n < 1e-12) throw config_error("initial_vector: zero vector");
        return v / n;
    }
    throw config_error("initial: unknown state '" + name + "'");
}

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    cfg.scenario = detail::get_or<std::string>(j, "scenario", "run");
    cfg.method = parse_method(detail::get_or<std::string>(j, "method", "master"));
    cfg.initial = detail::get_or<std::string>(j, "initial", "eg");
    cfg.initial_vector = parse_initial_state(
        cfg.initial, j.contains("initial_vector") ? &j.at("initial_vector") : nullptr);

    const double default_g0 = strength_for_rate(1.0);
    if (!j.contains("atoms")) throw config_error("atoms: missing required field");
    const auto& atoms = j.at("atoms");
    if (!atoms.contains("a")) throw config_error("atoms.a: missing required field");
    cfg.atom_a = detail::parse_atom(atoms.at("a"), "atoms.a", default_g0);
    if (atoms.contains("b")) {
        cfg.atom_b = detail::parse_atom(atoms.at("b"), "atoms.b", default_g0);
    } else {
        cfg.atom_b = cfg.atom_a;
    }

    if (j.contains("grid")) {
        cfg.k_max = detail::get_or<double>(j.at("grid"), "k_max", cfg.k_max);
        cfg.n_modes = detail::get_or<int>(j.at("grid"), "n_modes", cfg.n_modes);
    }
    if (j.contains("time")) {
        cfg.dt = detail::get_field<double>(j.at("time"), "time", "dt");
        cfg.t_max = detail::get_field<double>(j.at("time"), "time", "t_max");
    }
    if (j.contains("omega")) {
        cfg.omega_a = detail::get_or<double>(j.at("omega"), "a", 1.0);
        cfg.omega_b = detail::get_or<double>(j.at("omega"), "b", 1.0);
    }
    if (j.contains("ensemble")) {
        cfg.n_traj = detail::get_or<int>(j.at("ensemble"), "n_traj", cfg.n_traj);
        cfg.seed = detail::get_or<uint64_t>(j.at("ensemble"), "seed", cfg.seed);
        cfg.threads = detail::get_or<int>(j.at("ensemble"), "threads", 0);
    }
    if (j.contains("lindblad_gamma")) cfg.lindblad_gamma = j.at("lindblad_gamma").get<double>();
    if (j.contains("temperature")) {
        cfg.beta = detail::get_field<double>(j.at("temperature"), "temperature", "beta");
        if (*cfg.beta <= 0.0) throw config_error("temperature.beta: must be > 0");
        cfg.omega_floor = detail::get_or<double>(j.at("temperature"), "omega_floor", -1.0);
    }
    if (j.contains("squeeze")) {
        SqueezeProfile p;
        p.r = detail::get_field<double>(j.at("squeeze"), "squeeze", "r");
        if (j.at("squeeze").contains("k_center")) {
            p.banded = true;
            p.k_center = j.at("squeeze").at("k_center").get<double>();
            p.band_width = detail::get_or<double>(j.at("squeeze"), "band_width", 1.0);
        }
        cfg.squeeze = p;
    }
    if (cfg.beta && cfg.squeeze)
        throw config_error("temperature and squeeze are mutually exclusive");
    if (j.contains("observe")) cfg.t_probe = detail::get_or<double>(j.at("observe"), "t_probe", 1.8);
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        if (sw.contains("m")) {
            for (double v : detail::parse_axis(sw.at("m"), "sweep.m"))
                cfg.sweep.m.push_back(static_cast<int>(std::lround(v)));
            if (!cfg.atom_a.comb_from_center)
                throw config_error(
                    "sweep.m: requires comb atoms specified by center/spacing, not points");
        }
        if (sw.contains("width")) cfg.sweep.width = detail::parse_axis(sw.at("width"), "sweep.width");
        if (sw.contains("delta_x_ab"))
            cfg.sweep.delta_x_ab = detail::parse_axis(sw.at("delta_x_ab"), "sweep.delta_x_ab");
        if (cfg.sweep.empty()) throw config_error("sweep: no axes given");
    }
    if (j.contains("output")) {
        cfg.out_dir = detail::get_or<std::string>(j.at("output"), "dir", cfg.out_dir);
        cfg.prefix = detail::get_or<std::string>(j.at("output"), "prefix", "");
    }
    if (j.contains("noise_test")) {
        cfg.noise_samples = detail::get_or<int>(j.at("noise_test"), "samples", cfg.noise_samples);
        cfg.noise_probes = detail::get_or<int>(j.at("noise_test"), "probes", cfg.noise_probes);
    }

    // method/initial compatibility
    if (cfg.method == Method::dressed1) {
        if (std::abs(cfg.initial_vector(kEE)) > 1e-12)
            throw config_error("initial: dressed1 needs a single-excitation initial state");
    }
    if (cfg.method == Method::dressed2 && cfg.initial != "ee")
        throw config_error("initial: dressed2 requires |ee>");
    if ((cfg.beta || cfg.squeeze) &&
        (cfg.method == Method::dressed1 || cfg.method == Method::dressed2 ||
         cfg.method == Method::lindblad))
        throw config_error("temperature/squeeze: only sse and master methods support them");
    if (cfg.squeeze && cfg.method != Method::sse)
        throw config_error("squeeze: only the sse method is supported (experimental)");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// Fully resolved config as JSON (defaults filled), used for the manifest and hash.
inline json resolved_config(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["method"] = method_name(cfg.method);
    j["initial"] = cfg.initial;
    {
        json iv = json::array();
        for (int i = 0; i < 4; ++i)
            iv.push_back({cfg.initial_vector(i).real(), cfg.initial_vector(i).imag()});
        j["initial_vector"] = iv;
    }
    const auto atom_json = [](const AtomSpec& s) {
        json a;
        a["strength"] = s.dist.strength;
        if (const auto* c = std::get_if<CombDistribution>(&s.dist.shape)) {
            a["type"] = "comb";
            a["points"] = c->points;
            a["normalization"] = c->ntilde();
        } else if (const auto* g = std::get_if<GaussianDistribution>(&s.dist.shape)) {
            a["type"] = "gaussian";
            a["center"] = g->center;
            a["width"] = g->width;
        } else {
            const auto& d = std::get<DoubleGaussianDistribution>(s.dist.shape);
            a["type"] = "double_gaussian";
            a["centers"] = {d.center1, d.center2};
            a["width"] = d.width;
        }
        return a;
    };
    j["atoms"]["a"] = atom_json(cfg.atom_a);
    j["atoms"]["b"] = atom_json(cfg.atom_b);
    j["grid"] = {{"k_max", cfg.k_max}, {"n_modes", cfg.n_modes}};
    j["time"] = {{"dt", cfg.dt}, {"t_max", cfg.t_max}};
    j["omega"] = {{"a", cfg.omega_a}, {"b", cfg.omega_b}};
    if (cfg.method == Method::sse)
        j["ensemble"] = {{"n_traj", cfg.n_traj}, {"seed", cfg.seed}};
    if (cfg.lindblad_gamma) j["lindblad_gamma"] = *cfg.lindblad_gamma;
    if (cfg.beta) {
        j["temperature"] = {{"beta", *cfg.beta}, {"omega_floor", cfg.omega_floor}};
    }
    if (cfg.squeeze) {
        json s = {{"r", cfg.squeeze->r}};
        if (cfg.squeeze->banded) {
            s["k_center"] = cfg.squeeze->k_center;
            s["band_width"] = cfg.squeeze->band_width;
        }
        j["squeeze"] = s;
    }
    j["observe"] = {{"t_probe", cfg.t_probe}};
    if (!cfg.sweep.empty()) {
        json sw;
        if (!cfg.sweep.m.empty()) sw["m"] = cfg.sweep.m;
        if (!cfg.sweep.width.empty()) sw["width"] = cfg.sweep.width;
        if (!cfg.sweep.delta_x_ab.empty()) sw["delta_x_ab"] = cfg.sweep.delta_x_ab;
        j["sweep"] = sw;
    }
    j["output"] = {{"dir", cfg.out_dir}, {"prefix", cfg.prefix}};
    return j;
}

inline std::string config_hash(const json& resolved) {
    const std::string dump = resolved.dump();
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------ scenario assembly -----------------------------

struct Scenario {
    ModeGrid grid;
    std::vector<Complex> ga, gb;
    Matrix4c h_atoms;
    CorrelationKernel kernel;
    std::optional<ThermalKernelPair> thermal;
    std::optional<SqueezedKernelPair> squeezed;
};

inline Scenario build_scenario(const ExperimentConfig& cfg) {
    Scenario s;
    s.grid = build_mode_grid(cfg.k_max, cfg.n_modes, cfg.t_max);
    s.ga = fourier_coupling(cfg.atom_a.dist, s.grid);
    s.gb = fourier_coupling(cfg.atom_b.dist, s.grid);
    s.h_atoms = atom_hamiltonian(cfg.omega_a, cfg.omega_b);
    if (cfg.beta) {
        s.thermal = build_thermal_pair(cfg.atom_a.dist, cfg.atom_b.dist, s.grid, *cfg.beta,
                                       cfg.dt, cfg.t_max, cfg.omega_floor);
        s.kernel = s.thermal->alpha;
    } else if (cfg.squeeze) {
        s.squeezed =
            build_squeezed_pair(cfg.atom_a.dist, cfg.atom_b.dist, s.grid, *cfg.squeeze, cfg.dt,
                                cfg.t_max);
        s.kernel = s.squeezed->alpha;
    } else {
        s.kernel = build_kernel(cfg.atom_a.dist, cfg.atom_b.dist, s.grid, cfg.dt, cfg.t_max);
    }
    return s;
}

// ------------------------------ run -------------------------------------------

struct RunResult {
    std::vector<double> times;
    std::vector<Matrix4c> rho;       // mean state for ensembles
    std::vector<double> concurrence_series;
    double c_max = 0.0;
    double c_at_probe = 0.0;
    int n_excluded = 0;
    json manifest;
    std::vector<std::string> files;
};

namespace detail {

inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw config_error("cannot open " + tmp + " for writing");
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline double interp_series(const std::vector<double>& t, const std::vector<double>& v,
                            double tp) {
    if (tp <= t.front()) return v.front();
    if (tp >= t.back()) return v.back();
    const double dt = t[1] - t[0];
    const size_t i = static_cast<size_t>((tp - t.front()) / dt);
    const double f = (tp - t[i]) / dt;
    return (1.0 - f) * v[i] + f * v[std::min(i + 1, v.size() - 1)];
}

} // namespace detail

inline RunResult run(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem =
        cfg.out_dir + "/" + (cfg.prefix.empty() ? cfg.scenario : cfg.prefix);

    Scenario sc = build_scenario(cfg);
    RunResult res;

    const Matrix4c rho0 = pure_density(cfg.initial_vector);
    OFieldOptions oopts;

    switch (cfg.method) {
        case Method::master: {
            if (cfg.beta) {
                const auto dual =
                    evolve_dual_field_thermal(*sc.thermal, sc.h_atoms, cfg.dt, cfg.t_max, oopts);
                const auto series =
                    thermal_master_solve(rho0, dual, sc.h_atoms, cfg.dt, cfg.t_max);
                res.times = series.times;
                res.rho = series.rho;
            } else {
                const auto of =
                    evolve_matrix_field(sc.kernel, sc.h_atoms, cfg.dt, cfg.t_max, oopts);
                const auto series = master_equation_solve(rho0, of, sc.h_atoms, cfg.dt, cfg.t_max);
                res.times = series.times;
                res.rho = series.rho;
            }
            DensitySeries ds{res.times, res.rho};
            write_series_csv(ds, stem + "_series.csv");
            res.files.push_back(stem + "_series.csv");
            break;
        }
        case Method::lindblad: {
            const double gamma =
                cfg.lindblad_gamma ? *cfg.lindblad_gamma : markov_rate(cfg.atom_a.dist.strength);
            const auto series = lindblad_solve(gamma, rho0, sc.h_atoms, cfg.dt, cfg.t_max);
            res.times = series.times;
            res.rho = series.rho;
            write_series_csv(series, stem + "_series.csv");
            res.files.push_back(stem + "_series.csv");
            break;
        }
        case Method::sse: {
            EnsembleSeries ens;
            if (cfg.beta) {
                const auto dual =
                    evolve_dual_field_thermal(*sc.thermal, sc.h_atoms, cfg.dt, cfg.t_max, oopts);
                ens = ensemble_average_thermal(*sc.thermal, sc.grid, dual, sc.h_atoms,
                                               cfg.initial_vector, cfg.dt, cfg.t_max, cfg.n_traj,
                                               cfg.seed, cfg.threads);
            } else if (cfg.squeeze) {
                const auto dual =
                    evolve_dual_field_squeezed(*sc.squeezed, sc.h_atoms, cfg.dt, cfg.t_max, oopts);
                ens = ensemble_average_squeezed(*sc.squeezed, sc.grid, dual, sc.h_atoms,
                                                cfg.initial_vector, cfg.dt, cfg.t_max, cfg.n_traj,
                                                cfg.seed, cfg.threads);
            } else {
                const auto of =
                    evolve_matrix_field(sc.kernel, sc.h_atoms, cfg.dt, cfg.t_max, oopts);
                SseRun runspec{sc.ga, sc.gb, sc.grid, &of, sc.h_atoms, cfg.initial_vector,
                               cfg.dt, cfg.t_max};
                ens = ensemble_average(runspec, cfg.n_traj, cfg.seed, cfg.threads);
            }
            res.times = ens.times;
            res.rho = ens.mean;
            res.n_excluded = ens.n_excluded;
            write_series_csv(ens, stem + "_series.csv");
            res.files.push_back(stem + "_series.csv");
            break;
        }
        case Method::dressed1: {
            const auto sx = solve_single_excitation(
                sc.ga, sc.gb, sc.grid, cfg.omega_a, cfg.omega_b, cfg.initial_vector(kEG),
                cfg.initial_vector(kGE), cfg.dt, cfg.t_max, cfg.initial_vector(kGG));
            res.times = sx.reduced.times;
            res.rho = sx.reduced.rho;
            write_series_csv(sx.reduced, stem + "_series.csv");
            res.files.push_back(stem + "_series.csv");
            break;
        }
        case Method::dressed2: {
            const auto dx = solve_double_excitation(sc.ga, sc.gb, sc.grid, cfg.omega_a,
                                                    cfg.omega_b, cfg.dt, cfg.t_max);
            res.times = dx.reduced.times;
            res.rho = dx.reduced.rho;
            write_series_csv(dx.reduced, stem + "_series.csv");
            res.files.push_back(stem + "_series.csv");
            break;
        }
    }

    res.concurrence_series.resize(res.times.size());
    for (size_t i = 0; i < res.times.size(); ++i) {
        res.concurrence_series[i] = concurrence(res.rho[i]);
        res.c_max = std::max(res.c_max, res.concurrence_series[i]);
    }
    res.c_at_probe = detail::interp_series(res.times, res.concurrence_series, cfg.t_probe);

    const auto t1 = std::chrono::steady_clock::now();
    json manifest;
    manifest["config"] = resolved_config(cfg);
    manifest["config_hash"] = config_hash(manifest["config"]);
    manifest["version"] = kVersion;
    manifest["timing_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    manifest["excluded_trajectories"] = res.n_excluded;
    manifest["summary"] = {{"c_max", res.c_max}, {"c_at_probe", res.c_at_probe}};
    manifest["files"] = res.files;
    res.manifest = manifest;
    detail::write_text_atomic(stem + "_manifest.json", manifest.dump(2) + "\n");
    res.files.push_back(stem + "_manifest.json");
    return res;
}

// Kernel tables only (the data behind the correlation-function figures).
inline std::vector<std::string> correlate(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem =
        cfg.out_dir + "/" + (cfg.prefix.empty() ? cfg.scenario : cfg.prefix);
    Scenario sc = build_scenario(cfg);
    std::vector<std::string> files;
    write_kernel_csv(sc.kernel, stem + "_kernel.csv");
    files.push_back(stem + "_kernel.csv");
    if (sc.thermal) {
        write_kernel_csv(sc.thermal->alpha_prime, stem + "_kernel_prime.csv");
        files.push_back(stem + "_kernel_prime.csv");
    }
    if (sc.squeezed) {
        write_kernel_csv(sc.squeezed->beta, stem + "_kernel_beta.csv");
        files.push_back(stem + "_kernel_beta.csv");
    }
    json manifest;
    manifest["config"] = resolved_config(cfg);
    manifest["config_hash"] = config_hash(manifest["config"]);
    manifest["version"] = kVersion;
    manifest["files"] = files;
    detail::write_text_atomic(stem + "_manifest.json", manifest.dump(2) + "\n");
    files.push_back(stem + "_manifest.json");
    return files;
}

// ------------------------------ sweep ------------------------------------------

struct SweepCell {
    int index = 0;
    int m = 0;
    double width = 0.0;
    double delta_x_ab = 0.0;
    double c_max = 0.0;
    double c_at_probe = 0.0;
    std::string dir;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::string surface_csv;
    json manifest;
};

// Apply one sweep cell to the base config: m regenerates center/spacing combs,
// width overrides Gaussian widths, delta_x_ab makes atom b a rigid translation
// of atom a.
inline ExperimentConfig cell_config(const ExperimentConfig& base, const SweepAxes& axes,
                                    int im, int iw, int id) {
    ExperimentConfig cfg = base;
    cfg.sweep = SweepAxes{};
    if (!axes.m.empty()) {
        const int m = axes.m[static_cast<size_t>(im)];
        for (AtomSpec* atom : {&cfg.atom_a, &cfg.atom_b}) {
            if (!atom->comb_from_center)
                throw config_error("sweep.m: atoms must be center/spacing combs");
            atom->comb_m = m;
            atom->dist = make_comb_grid(atom->comb_center, m, atom->comb_spacing,
                                        atom->dist.strength);
        }
    }
    if (!axes.width.empty()) {
        const double w = axes.width[static_cast<size_t>(iw)];
        for (AtomSpec* atom : {&cfg.atom_a, &cfg.atom_b}) {
            if (auto* g = std::get_if<GaussianDistribution>(&atom->dist.shape))
                g->width = w;
            else if (auto* d = std::get_if<DoubleGaussianDistribution>(&atom->dist.shape))
                d->width = w;
            else
                throw config_error("sweep.width: atoms must be gaussian/double_gaussian");
        }
    }
    if (!axes.delta_x_ab.empty()) {
        const double d = axes.delta_x_ab[static_cast<size_t>(id)];
        cfg.atom_b = cfg.atom_a;
        cfg.atom_b.dist = translated(cfg.atom_a.dist, d);
        if (cfg.atom_b.comb_from_center) cfg.atom_b.comb_center += d;
    }
    return cfg;
}

inline SweepResult sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep.empty()) throw config_error("sweep: no axes configured");
    std::filesystem::create_directories(cfg.out_dir);
    const auto& axes = cfg.sweep;
    const int nm = axes.m.empty() ? 1 : static_cast<int>(axes.m.size());
    const int nw = axes.width.empty() ? 1 : static_cast<int>(axes.width.size());
    const int nd = axes.delta_x_ab.empty() ? 1 : static_cast<int>(axes.delta_x_ab.size());
    const int total = nm * nw * nd;

    std::vector<SweepCell> cells(static_cast<size_t>(total));
    std::atomic<int> next{0};
    std::vector<std::string> errors(static_cast<size_t>(total));

    const auto run_cell = [&](int ci) {
        const int im = ci / (nw * nd);
        const int iw = (ci / nd) % nw;
        const int id = ci % nd;
        try {
            ExperimentConfig c = cell_config(cfg, axes, im, iw, id);
            char sub[32];
            std::snprintf(sub, sizeof(sub), "cell_%04d", ci);
            c.out_dir = cfg.out_dir + "/" + sub;
            c.prefix = cfg.prefix.empty() ? cfg.scenario : cfg.prefix;
            c.threads = 1;  // cells are the parallel unit
            const RunResult r = run(c);
            SweepCell& cell = cells[static_cast<size_t>(ci)];
            cell.index = ci;
            cell.m = axes.m.empty() ? 0 : axes.m[static_cast<size_t>(im)];
            cell.width = axes.width.empty() ? 0.0 : axes.width[static_cast<size_t>(iw)];
            cell.delta_x_ab =
                axes.delta_x_ab.empty() ? 0.0 : axes.delta_x_ab[static_cast<size_t>(id)];
            cell.c_max = r.c_max;
            cell.c_at_probe = r.c_at_probe;
            cell.dir = c.out_dir;
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(ci)] = e.what();
        }
    };

    int workers = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, total);
    if (workers > 1) {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (int ci = next.fetch_add(1); ci < total; ci = next.fetch_add(1))
                    run_cell(ci);
            });
        for (auto& th : pool) th.join();
    } else {
        for (int ci = 0; ci < total; ++ci) run_cell(ci);
    }
    for (const auto& e : errors)
        if (!e.empty()) throw config_error("sweep cell failed: " + e);

    SweepResult result;
    result.cells = cells;
    const std::string stem =
        cfg.out_dir + "/" + (cfg.prefix.empty() ? cfg.scenario : cfg.prefix);
    std::string csv = "cell,m,width,delta_x_ab,c_max,c_at_probe\n";
    for (const auto& c : cells) {
        csv += std::to_string(c.index) + "," + std::to_string(c.m) + "," +
               detail::fmt(c.width) + "," + detail::fmt(c.delta_x_ab) + "," +
               detail::fmt(c.c_max) + "," + detail::fmt(c.c_at_probe) + "\n";
    }
    result.surface_csv = stem + "_surface.csv";
    detail::write_text_atomic(result.surface_csv, csv);

    json manifest;
    manifest["config"] = resolved_config(cfg);
    manifest["config_hash"] = config_hash(manifest["config"]);
    manifest["version"] = kVersion;
    manifest["cells"] = total;
    manifest["surface"] = result.surface_csv;
    result.manifest = manifest;
    detail::write_text_atomic(stem + "_sweep_manifest.json", manifest.dump(2) + "\n");
    return result;
}

// Interference visibility of a concurrence cross-section over a positional sweep.
inline double fringe_contrast(const std::vector<double>& values) {
    if (values.empty()) throw config_error("fringe_contrast: empty sweep");
    double lo = values.front(), hi = values.front();
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return (hi + lo) == 0.0 ? 0.0 : (hi - lo) / (hi + lo);
}

// ------------------------------ noise-test ------------------------------------

// Empirical vs tabulated covariances at probe pairs; columns carry the standard
// error of each empirical mean.
inline std::string noise_test(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem =
        cfg.out_dir + "/" + (cfg.prefix.empty() ? cfg.scenario : cfg.prefix);
    Scenario sc = build_scenario(cfg);

    const int n_probe = cfg.noise_probes;
    std::vector<std::pair<double, double>> probes;
    for (int p = 0; p < n_probe; ++p) {
        const double t = cfg.t_max * (0.1 + 0.9 * p / std::max(1, n_probe - 1));
        const double s = t * (0.3 + 0.4 * ((p * 7) % 11) / 10.0);
        probes.emplace_back(t, s);
    }
    std::vector<double> times;
    for (auto& [t, s] : probes) {
        times.push_back(t);
        times.push_back(s);
    }

    struct Acc {
        Complex mean_z{0, 0}, zz{0, 0}, zzc{0, 0};
        double zzc_sq = 0.0;
    };
    std::vector<Acc> acc(probes.size());
    const int n = cfg.noise_samples;
    for (int i = 0; i < n; ++i) {
        const auto nr = sample_vacuum_noise(sc.ga, sc.gb, sc.grid, times, cfg.seed,
                                            static_cast<uint64_t>(i));
        for (size_t p = 0; p < probes.size(); ++p) {
            const Complex zt = std::conj(nr.z_star[0][2 * p]);      // z_{a t}
            const Complex zs = std::conj(nr.z_star[1][2 * p + 1]);  // z_{b s}
            const Complex zsc = nr.z_star[1][2 * p + 1];            // z*_{b s}
            acc[p].mean_z += zt;
            acc[p].zz += zt * zs;
            const Complex prod = zt * zsc;
            acc[p].zzc += prod;
            acc[p].zzc_sq += std::norm(prod);
        }
    }
    std::string csv =
        "t,s,re_emp_zzstar,im_emp_zzstar,re_alpha_ab,im_alpha_ab,se,abs_mean_z,abs_zz\n";
    for (size_t p = 0; p < probes.size(); ++p) {
        const auto [t, s] = probes[p];
        const Complex emp = acc[p].zzc / static_cast<double>(n);
        const double var = std::max(0.0, acc[p].zzc_sq / n - std::norm(emp));
        const double se = std::sqrt(var / n);
        const Complex tab = sc.kernel.at(Pair::ab, t - s);
        csv += detail::fmt(t) + "," + detail::fmt(s) + "," + detail::fmt(emp.real()) + "," +
               detail::fmt(emp.imag()) + "," + detail::fmt(tab.real()) + "," +
               detail::fmt(tab.imag()) + "," + detail::fmt(se) + "," +
               detail::fmt(std::abs(acc[p].mean_z) / n) + "," +
               detail::fmt(std::abs(acc[p].zz) / n) + "\n";
    }
    const std::string path = stem + "_noise_test.csv";
    detail::write_text_atomic(path, csv);
    return path;
}

} // namespace wqed
