#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "effham/hj.hpp"
#include "effham/io.hpp"
#include "effham/presets.hpp"
#include "effham/svg.hpp"

namespace effham {

/// Parallel map over [0, n): workers share immutable inputs and write to
/// disjoint slots, so the result is independent of scheduling.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

/// Declarative experiment description; fully serializable, hashed into
/// every output payload.
struct ExperimentConfig {
    json raw;

    static ExperimentConfig parse(const json& j) {
        ExperimentConfig c{j};
        if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
        if (!j.contains("experiment") || !j["experiment"].is_string())
            throw ConfigInvalid("missing string field: experiment");
        std::string exp = j["experiment"];
        for (const char* known : {"backends", "hk", "cpm", "properties", "hj", "longtime"})
            if (exp == known) return c;
        throw ConfigInvalid("unknown experiment: " + exp);
    }

    static ExperimentConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigInvalid("cannot open config " + path.string());
        json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigInvalid(std::string("config parse error: ") + e.what());
        }
        return parse(j);
    }

    std::string experiment() const { return raw["experiment"]; }
    uint64_t seed() const { return raw.value("seed", 7ull); }
    std::string hash() const { return hash_hex(raw); }

    presets::GridChoice grid() const {
        presets::GridChoice g;
        if (raw.contains("grid")) {
            const auto& gr = raw["grid"];
            g.nq = gr.value("nq", g.nq);
            g.np = gr.value("np", g.np);
            g.p_min = gr.value("p_min", g.p_min);
            g.p_max = gr.value("p_max", g.p_max);
        }
        return g;
    }

    HamiltonianField field() const {
        std::map<std::string, double> params;
        std::string name = "pendulum";
        if (raw.contains("preset")) {
            const auto& pr = raw["preset"];
            name = pr.value("name", name);
            for (auto it = pr.begin(); it != pr.end(); ++it)
                if (it.value().is_number()) params[it.key()] = it.value().get<double>();
        }
        auto H = presets::make(name, params, grid());
        if (raw.contains("truncate")) return truncate_coercive(H, raw["truncate"].get<double>());
        return H;
    }

    MomentumGrid probe_grid() const {
        double lo = -2, hi = 2;
        int n = 33;
        if (raw.contains("pgrid")) {
            const auto& pg = raw["pgrid"];
            lo = pg.value("min", lo);
            hi = pg.value("max", hi);
            n = pg.value("n", n);
        }
        return MomentumGrid(lo, hi, n);
    }

    HomogenizeParams homog_params() const {
        HomogenizeParams prm;
        prm.pgrid = probe_grid();
        if (raw.contains("weakkam")) {
            prm.T = raw["weakkam"].value("T", prm.T);
            prm.lo_tau = raw["weakkam"].value("tau", prm.lo_tau);
        }
        if (raw.contains("minmax")) {
            const auto& mm = raw["minmax"];
            prm.k = mm.value("k", prm.k);
            prm.gf_tau = mm.value("tau", prm.gf_tau);
            prm.slice.x_nodes = mm.value("x_nodes", prm.slice.x_nodes);
            prm.slice.fiber_nodes = mm.value("fiber_nodes", prm.slice.fiber_nodes);
            prm.slice.allow_reduction = mm.value("allow_reduction", true);
        }
        return prm;
    }
};

struct RunResult {
    int exit_code = 0;
    std::filesystem::path out_dir;
    json manifest;
};

/// Execute a config, writing CSV/JSON payloads and SVG plots under out_dir.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::filesystem::path out_dir,
                                int threads = 1, double tolerance_scale = 1.0,
                                std::optional<uint64_t> seed_override = {}) {
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();
    std::string hash = cfg.hash();
    fs::create_directories(out_dir);

    RunResult res;
    res.out_dir = out_dir;
    json manifest{{"config", cfg.raw},
                  {"config_hash", hash},
                  {"version", kVersion},
                  {"experiment", cfg.experiment()}};
    int exit_code = 0;

    std::string exp = cfg.experiment();
    if (exp == "backends") {
        auto H = cfg.field();
        auto prm = cfg.homog_params();
        std::vector<std::string> names = cfg.raw.value(
            "backends", std::vector<std::string>{"levelset", "weakkam", "minmax"});
        std::vector<EffectiveHamiltonian> curves(names.size());
        parallel_for(static_cast<int>(names.size()), threads, [&](int i) {
            Backend b = names[i] == "levelset"    ? Backend::Levelset
                        : names[i] == "weakkam"   ? Backend::WeakKAM
                        : names[i] == "minmax"    ? Backend::MinMax
                                                  : Backend::ExactPOnly;
            curves[i] = homogenize(H, b, prm);
        });
        SvgPlot plot("homogenized Hamiltonian", "p", "h(p)");
        json diffs = json::array();
        for (size_t i = 0; i < names.size(); ++i) {
            write_effective(out_dir / ("hbar_" + names[i] + ".csv"), curves[i], hash);
            plot.add_curve(names[i], curves[i].p, curves[i].values);
            for (size_t j = 0; j < i; ++j)
                diffs.push_back({{"a", names[j]},
                                 {"b", names[i]},
                                 {"sup", curves[i].sup_distance(curves[j])},
                                 {"budget", 1.5 * (curves[i].error_estimate +
                                                   curves[j].error_estimate)}});
        }
        plot.save(out_dir / "hbar.svg");
        manifest["diffs"] = diffs;
    } else if (exp == "hk") {
        auto H = cfg.field();
        auto prm = cfg.homog_params();
        std::vector<int> ks = cfg.raw.value("k_list", std::vector<int>{1, 2, 3, 4});
        auto S = one_step_gf(H, prm.gf_tau);
        std::optional<LagrangianTable> L;
        if (H.is_convex_in_p() && !H.is_p_only()) L = legendre(H);
        MomentumGrid pg = cfg.probe_grid();
        std::vector<HkCurve> curves(ks.size());
        parallel_for(static_cast<int>(ks.size()), threads, [&](int i) {
            curves[i] = hk_curve(build_Fk(S, ks[i]), pg, prm.slice, false);
        });
        SvgPlot plot("h_k curves", "p", "h_k(p)");
        json rows = json::array();
        for (size_t i = 0; i < ks.size(); ++i) {
            EffectiveHamiltonian eh;
            eh.p = curves[i].p;
            eh.values = curves[i].h;
            eh.backend = Backend::MinMax;
            eh.k = ks[i];
            eh.tau = prm.gf_tau;
            write_effective(out_dir / ("hk_" + std::to_string(ks[i]) + ".csv"), eh, hash);
            plot.add_curve("k=" + std::to_string(ks[i]), curves[i].p, curves[i].h);
            rows.push_back({{"k", ks[i]}, {"lipschitz", curves[i].lipschitz()}});
        }
        if (H.is_mechanical()) {
            LevelsetOracle oracle(H);
            std::vector<double> ls;
            for (double p : pg.nodes()) ls.push_back(oracle.value(p));
            plot.add_curve("levelset", pg.nodes(), ls);
            for (size_t i = 0; i < ks.size(); ++i)
                rows[i]["sup_distance_to_levelset"] = curves[i].sup_distance(ls);
        }
        plot.save(out_dir / "hk.svg");
        manifest["hk"] = rows;
    } else if (exp == "cpm") {
        auto H = cfg.field();
        auto prm = cfg.homog_params();
        int k_max = cfg.raw.value("k_max", 4);
        auto seq = c_pm_iterates(H, k_max, prm.gf_tau, cfg.probe_grid(), prm.slice);
        std::ostringstream csv;
        csv << stamp_line(hash);
        csv << "k,c_plus_per_time,c_minus_per_time\n";
        for (size_t i = 0; i < seq.ks.size(); ++i)
            csv << seq.ks[i] << ',' << fmt(seq.c_plus[i]) << ',' << fmt(seq.c_minus[i]) << "\n";
        write_text(out_dir / "cpm.csv", csv.str());
        std::vector<double> kd(seq.ks.begin(), seq.ks.end());
        SvgPlot plot("normalized iterate invariants", "k", "c/(k tau)");
        plot.add_curve("c+", kd, seq.c_plus);
        plot.add_curve("c-", kd, seq.c_minus);
        plot.save(out_dir / "cpm.svg");
        manifest["cpm"] = {{"extrapolated_c_plus", seq.extrapolated_c_plus},
                           {"extrapolated_c_minus", seq.extrapolated_c_minus}};
    } else if (exp == "properties") {
        PropertySuiteConfig pcfg;
        pcfg.seed = seed_override.value_or(cfg.seed());
        pcfg.tolerance_scale = tolerance_scale;
        auto report = check_properties(pcfg);
        write_text(out_dir / "properties.json",
                   property_report_json(report, hash).dump(2) + "\n");
        manifest["properties_pass"] = report.all_pass();
        if (!report.all_pass()) exit_code = 2;
    } else if (exp == "hj") {
        auto H = cfg.field();
        double amp = 0.1, t_max = 2.0, tau = 0.02;
        int n_base = 64, n_times = 8;
        std::vector<int> ks{1, 2, 4, 8};
        if (cfg.raw.contains("hj")) {
            const auto& hj = cfg.raw["hj"];
            amp = hj.value("f_amplitude", amp);
            t_max = hj.value("t_max", t_max);
            tau = hj.value("tau", tau);
            n_base = hj.value("n_base", n_base);
            n_times = hj.value("n_times", n_times);
            if (hj.contains("k_list")) ks = hj["k_list"].get<std::vector<int>>();
        }
        auto f = [amp](double q) { return amp * std::cos(2 * presets::pi * q); };
        auto ex = homogenization_experiment(H, f, ks, t_max, n_base, tau, n_times);
        std::ostringstream csv;
        csv << stamp_line(hash);
        csv << "k,t,e_k,fitted_epsilon_k\n";
        for (size_t i = 0; i < ex.ks.size(); ++i)
            for (size_t j = 0; j < ex.times.size(); ++j)
                csv << ex.ks[i] << ',' << fmt(ex.times[j]) << ',' << fmt(ex.e[i][j]) << ','
                    << fmt(ex.epsilon[i]) << "\n";
        write_text(out_dir / "hj_errors.csv", csv.str());
        SvgPlot plot("oscillatory HJ error fans", "t", "e_k(t)");
        for (size_t i = 0; i < ex.ks.size(); ++i)
            plot.add_curve("k=" + std::to_string(ex.ks[i]), ex.times, ex.e[i]);
        plot.save(out_dir / "hj.svg");
        json eps = json::array();
        for (size_t i = 0; i < ex.ks.size(); ++i)
            eps.push_back({{"k", ex.ks[i]},
                           {"epsilon", ex.epsilon[i]},
                           {"fit_residual", ex.fit_residual[i]}});
        manifest["hj"] = eps;
    } else if (exp == "longtime") {
        auto H = cfg.field();
        double T = cfg.raw.value("T", 50.0);
        double amp = cfg.raw.value("f_amplitude", 0.0);
        auto f = [amp](double q) { return amp * std::cos(2 * presets::pi * q); };
        double slope = longtime_slope(H, f, T);
        manifest["longtime_slope"] = slope;
        write_text(out_dir / "longtime.csv",
                   stamp_line(hash) + "T,slope\n" + fmt(T) + "," + fmt(slope) + "\n");
    }

    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    res.exit_code = exit_code;
    res.manifest = manifest;
    return res;
}

struct DiffResult {
    double sup = 0;
    double l1 = 0;
    bool within(double tol) const { return sup <= tol; }
};

/// Compare two effective-Hamiltonian CSV files of matching schema.
inline DiffResult diff_curves(const std::filesystem::path& a, const std::filesystem::path& b) {
    auto fa = read_effective(a);
    auto fb = read_effective(b);
    if (fa.p.size() != fb.p.size()) throw SchemaMismatch("curves have different lengths");
    DiffResult d;
    for (size_t i = 0; i < fa.p.size(); ++i) {
        if (std::abs(fa.p[i] - fb.p[i]) > 1e-12) throw SchemaMismatch("momentum grids differ");
        double dv = std::abs(fa.h[i] - fb.h[i]);
        d.sup = std::max(d.sup, dv);
        d.l1 += dv;
    }
    d.l1 *= fa.p.size() > 1 ? (fa.p[1] - fa.p[0]) : 1.0;
    return d;
}

} // namespace effham
