#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "effham/field.hpp"

namespace effham {
namespace presets {

inline constexpr double pi = std::numbers::pi;

/// Smooth bump supported on |u| < 1 with value 1 at u = 0.
inline double bump(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

struct GridChoice {
    int nq = 64;
    int np = 129;
    double p_min = -3.0;
    double p_max = 3.0;
};

/// H = p^2/2 (free motion).
inline HamiltonianField free_motion(GridChoice g = {}) {
    return sample_hamiltonian([](double, double p) { return 0.5 * p * p; },
                              TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// H = p^2/2 + c.
inline HamiltonianField shifted_free(double c, GridChoice g = {}) {
    return sample_hamiltonian([c](double, double p) { return 0.5 * p * p + c; },
                              TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// Mechanical pendulum-type preset H = p^2/2 - a sin^2(pi q).
inline HamiltonianField pendulum(double amplitude = 1.0, GridChoice g = {}) {
    return sample_hamiltonian(
        [amplitude](double q, double p) {
            double s = std::sin(pi * q);
            return 0.5 * p * p - amplitude * s * s;
        },
        TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// p-only bump with sup = 1, inf = 0, compactly supported in p.
inline HamiltonianField bump_in_p(double center = 0.0, double width = 1.0, GridChoice g = {}) {
    return sample_hamiltonian(
        [center, width](double, double p) { return bump((p - center) / width); },
        TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// Nonconvex p-only preset cos(2 pi p) * bump(p/w).
inline HamiltonianField cosine_bump_in_p(double width = 2.0, GridChoice g = {}) {
    return sample_hamiltonian(
        [width](double, double p) { return std::cos(2 * pi * p) * bump(p / width); },
        TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// Generic p-only preset from a closure h(p).
inline HamiltonianField p_only(std::function<double(double)> h, GridChoice g = {}) {
    return sample_hamiltonian([h](double, double p) { return h(p); },
                              TorusGrid(g.nq), MomentumGrid(g.p_min, g.p_max, g.np));
}

/// The standard small shear f(q) = eps sin(2 pi q)/(2 pi), with f'(q) = eps cos(2 pi q).
inline PeriodicFunction small_shear(double eps) {
    return {[eps](double q) { return eps * std::sin(2 * pi * q) / (2 * pi); },
            [eps](double q) { return eps * std::cos(2 * pi * q); }};
}

/// Pendulum conjugated by the small vertical shear.
inline HamiltonianField pendulum_sheared(double eps = 0.05, double amplitude = 1.0,
                                         GridChoice g = {}) {
    return shear_conjugate(pendulum(amplitude, g), small_shear(eps));
}

struct PresetInfo {
    std::string name;
    std::string description;
};

inline std::vector<PresetInfo> catalog() {
    return {
        {"free", "H = p^2/2"},
        {"shifted_free", "H = p^2/2 + c   (parameter: shift)"},
        {"pendulum", "H = p^2/2 - a sin^2(pi q)   (parameter: amplitude)"},
        {"bump_p", "p-only bump, sup 1, inf 0   (parameters: center, width)"},
        {"cos_bump_p", "cos(2 pi p) bump(p/w), nonconvex   (parameter: width)"},
        {"pendulum_sheared", "pendulum composed with a small vertical shear (parameter: eps)"},
    };
}

/// Instantiate a preset by name with a generic parameter map.
inline HamiltonianField make(const std::string& name,
                             const std::map<std::string, double>& params = {},
                             GridChoice g = {}) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "free") return free_motion(g);
    if (name == "shifted_free") return shifted_free(get("shift", 0.3), g);
    if (name == "pendulum") return pendulum(get("amplitude", 1.0), g);
    if (name == "bump_p") return bump_in_p(get("center", 0.0), get("width", 1.0), g);
    if (name == "cos_bump_p") return cosine_bump_in_p(get("width", 2.0), g);
    if (name == "pendulum_sheared")
        return pendulum_sheared(get("eps", 0.05), get("amplitude", 1.0), g);
    throw ConfigInvalid("unknown preset: " + name);
}

} // namespace presets
} // namespace effham
