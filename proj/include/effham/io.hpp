#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "effham/field.hpp"
#include "effham/flow.hpp"
#include "effham/homog.hpp"
#include "effham/version.hpp"

namespace effham {

using nlohmann::json;

/// FNV-1a over a string; configs are hashed via their canonical JSON dump.
inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string());
    out << text;
}

/// Self-describing field file: a one-line JSON header followed by CSV rows
/// (iq, ip, q, p, value).
inline void write_field(const std::filesystem::path& path, const HamiltonianField& H,
                        const json& extra = {}) {
    json header{{"type", "hamiltonian_field"},
                {"version", kVersion},
                {"nq", H.qgrid().n_nodes()},
                {"np", H.pgrid().n_nodes()},
                {"p_min", H.pgrid().p_min()},
                {"p_max", H.pgrid().p_max()},
                {"is_p_only", H.is_p_only()},
                {"is_convex_in_p", H.is_convex_in_p()},
                {"is_compactly_supported", H.is_compactly_supported()}};
    if (!extra.empty()) header["meta"] = extra;
    std::ostringstream out;
    out << header.dump() << "\n";
    out << "iq,ip,q,p,value\n";
    for (int iq = 0; iq < H.qgrid().n_nodes(); ++iq)
        for (int ip = 0; ip < H.pgrid().n_nodes(); ++ip)
            out << iq << ',' << ip << ',' << fmt(H.qgrid().node(iq)) << ','
                << fmt(H.pgrid().node(ip)) << ',' << fmt(H.at(iq, ip)) << "\n";
    write_text(path, out.str());
}

inline HamiltonianField read_field(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    json header = json::parse(line);
    if (header.value("type", "") != "hamiltonian_field")
        throw SchemaMismatch("not a field file: " + path.string());
    TorusGrid qg(header["nq"].get<int>());
    MomentumGrid pg(header["p_min"].get<double>(), header["p_max"].get<double>(),
                    header["np"].get<int>());
    std::getline(in, line);  // column header
    std::vector<double> vals(static_cast<size_t>(qg.n_nodes()) * pg.n_nodes());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int iq, ip;
        double q, p, v;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &iq, &ip, &q, &p, &v) == 5)
            vals[iq * pg.n_nodes() + ip] = v;
    }
    return HamiltonianField(qg, pg, std::move(vals));
}

inline std::string stamp_line(const std::string& config_hash) {
    return "# config=" + config_hash + " version=" + kVersion + "\n";
}

/// Effective Hamiltonian: CSV (p, h, c_minus, c_plus) plus a JSON sidecar
/// with backend, k, tau, grids, normalization constant and error estimate.
inline void write_effective(const std::filesystem::path& csv_path,
                            const EffectiveHamiltonian& h, const std::string& config_hash) {
    std::ostringstream out;
    out << stamp_line(config_hash);
    out << "p,h,c_minus,c_plus\n";
    for (size_t i = 0; i < h.p.size(); ++i) {
        double cm = h.c_minus.empty() ? h.values[i] : h.c_minus[i];
        out << fmt(h.p[i]) << ',' << fmt(h.values[i]) << ',' << fmt(cm) << ','
            << fmt(h.values[i]) << "\n";
    }
    write_text(csv_path, out.str());
    json meta{{"backend", backend_name(h.backend)},
              {"k", h.k},
              {"tau", h.tau},
              {"resolutions", h.resolutions},
              {"error_estimate", h.error_estimate},
              {"normalization_constant", h.normalization_constant},
              {"config_hash", config_hash},
              {"version", kVersion}};
    std::filesystem::path meta_path = csv_path;
    meta_path.replace_extension(".json");
    write_text(meta_path, meta.dump(2) + "\n");
}

struct EffectiveCurveFile {
    std::vector<double> p, h, c_minus, c_plus;
};

inline EffectiveCurveFile read_effective(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("cannot open " + csv_path.string());
    std::string line;
    do {
        std::getline(in, line);
    } while (in && !line.empty() && line[0] == '#');
    if (line != "p,h,c_minus,c_plus") throw SchemaMismatch("unexpected curve header: " + line);
    EffectiveCurveFile f;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double p, h, cm, cp;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p, &h, &cm, &cp) == 4) {
            f.p.push_back(p);
            f.h.push_back(h);
            f.c_minus.push_back(cm);
            f.c_plus.push_back(cp);
        }
    }
    return f;
}

/// Trajectory dump: t, q, lift_q, p, H.
inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                             const std::string& config_hash = "none") {
    std::ostringstream out;
    out << stamp_line(config_hash);
    out << "t,q,lift_q,p,H\n";
    for (size_t i = 0; i < traj.size(); ++i)
        out << fmt(traj.t[i]) << ',' << fmt(traj.z[i].q) << ',' << fmt(traj.z[i].lift_q) << ','
            << fmt(traj.z[i].p) << ',' << fmt(traj.energy[i]) << "\n";
    write_text(path, out.str());
}

/// Debug dump of a two-axis plane through a slice complex: the remaining
/// axes are pinned to their center nodes.
inline void write_slice_plane(const std::filesystem::path& path, const SublevelComplex& cx,
                              size_t axis_a = 0, size_t axis_b = 1,
                              const std::string& config_hash = "none") {
    const auto& axes = cx.axes();
    if (axis_a >= axes.size() || axis_b >= axes.size() || axis_a == axis_b)
        throw InvalidField("bad plane axes");
    std::ostringstream out;
    out << stamp_line(config_hash);
    out << "a,b,value\n";
    std::vector<int> pos(axes.size());
    for (size_t i = 0; i < axes.size(); ++i) pos[i] = 2 * ((axes[i].n - 1) / 2);
    for (int ia = 0; ia < axes[axis_a].n; ++ia)
        for (int ib = 0; ib < axes[axis_b].n; ++ib) {
            pos[axis_a] = 2 * ia;
            pos[axis_b] = 2 * ib;
            auto cell = cx.make_cell(pos);
            out << fmt(axes[axis_a].node(ia)) << ',' << fmt(axes[axis_b].node(ib)) << ','
                << fmt(cx.cell_value(cell)) << "\n";
        }
    write_text(path, out.str());
}

inline json property_report_json(const PropertyReport& report, const std::string& inputs_hash) {
    json arr = json::array();
    for (const auto& r : report.results)
        arr.push_back({{"property", r.property},
                       {"inputs_hash", inputs_hash},
                       {"slack", r.slack},
                       {"budget", r.budget},
                       {"pass", r.pass}});
    return arr;
}

} // namespace effham
