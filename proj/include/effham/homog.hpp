#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "effham/minmax.hpp"
#include "effham/presets.hpp"
#include "effham/weakkam.hpp"

namespace effham {

enum class Backend { MinMax, WeakKAM, Levelset, ExactPOnly };

inline const char* backend_name(Backend b) {
    switch (b) {
        case Backend::MinMax: return "minmax";
        case Backend::WeakKAM: return "weakkam";
        case Backend::Levelset: return "levelset";
        case Backend::ExactPOnly: return "exact_p_only";
    }
    return "?";
}

/// Sampled homogenized Hamiltonian with provenance and an error estimate.
struct EffectiveHamiltonian {
    std::vector<double> p;
    std::vector<double> values;
    std::vector<double> c_minus;  // may be empty (weakkam/levelset emit h twice)
    Backend backend = Backend::Levelset;
    int k = 0;
    double tau = 0;
    std::string resolutions;
    double error_estimate = 0;
    double normalization_constant = 0;

    double sup_distance(const EffectiveHamiltonian& other) const {
        if (p.size() != other.p.size()) throw SchemaMismatch("momentum grids differ");
        double m = 0;
        for (size_t i = 0; i < values.size(); ++i)
            m = std::max(m, std::abs(values[i] - other.values[i]));
        return m;
    }

    double lipschitz() const {
        double m = 0;
        for (size_t i = 0; i + 1 < values.size(); ++i)
            m = std::max(m, std::abs(values[i + 1] - values[i]) / (p[i + 1] - p[i]));
        return m;
    }

    double sup() const { return *std::max_element(values.begin(), values.end()); }
    double inf() const { return *std::min_element(values.begin(), values.end()); }
};

struct HomogenizeParams {
    std::optional<MomentumGrid> pgrid;  // defaults to the field's grid
    // weakkam
    double T = 50.0;
    double lo_tau = 0.02;
    // minmax
    int k = 4;
    double gf_tau = 0.02;
    SliceOptions slice;
};

/// The homogenization operator with backend dispatch.  p-only input is its
/// own homogenization and is returned exactly, whatever backend was asked
/// for (the operator is a projector).
inline EffectiveHamiltonian homogenize(const HamiltonianField& H, Backend backend,
                                       HomogenizeParams params = {}) {
    MomentumGrid pg = params.pgrid ? *params.pgrid : H.pgrid();
    EffectiveHamiltonian out;
    out.p = pg.nodes();
    out.backend = backend;

    if (H.is_p_only() || backend == Backend::ExactPOnly) {
        if (!H.is_p_only()) throw BackendInvalid("exact_p_only needs a p-only field");
        out.backend = Backend::ExactPOnly;
        for (double p : out.p) out.values.push_back(H(0.0, p));
        out.error_estimate = 0;
        return out;
    }

    switch (backend) {
        case Backend::Levelset: {
            LevelsetOracle oracle(H);
            for (double p : out.p) out.values.push_back(oracle.value(p));
            out.error_estimate = 1e-6;
            out.resolutions = "panels=10000";
            break;
        }
        case Backend::WeakKAM: {
            if (!H.is_convex_in_p()) throw BackendInvalid("weakkam needs a convex-in-p field");
            auto L = legendre(H);
            double worst_gap = 0;
            for (double p : out.p) {
                double gap = 0;
                out.values.push_back(alpha_effective(H, p, params.T, params.lo_tau, &L, &gap));
                worst_gap = std::max(worst_gap, gap);
            }
            double hq = H.qgrid().spacing();
            out.error_estimate = worst_gap + 0.5 * (hq / params.lo_tau) * (hq / params.lo_tau);
            out.resolutions = "nq=" + std::to_string(H.qgrid().n_nodes()) +
                              ",T=" + std::to_string(params.T);
            break;
        }
        case Backend::MinMax: {
            if (params.k < 1 || 2 * (params.k - 1) > 6)
                throw BackendInvalid("minmax needs 1 <= k <= 4");
            auto S = one_step_gf(H, params.gf_tau);
            auto Fk = build_Fk(S, params.k);
            auto curve = hk_curve(Fk, pg, params.slice, /*with_c_minus=*/true);
            out.values = curve.h;
            out.c_minus = curve.c_minus;
            out.k = params.k;
            out.tau = params.gf_tau;
            double gap = 0;
            if (params.k > 1) {
                auto prev = hk_curve(build_Fk(S, params.k - 1), pg, params.slice);
                gap = curve.sup_distance(prev.h);
            }
            // both classes converge to the same limit, so the half-width of
            // the spectral interval brackets the finite-k error; probe it on
            // a few momenta
            double gamma_sup = 0;
            if (!H.is_p_only()) {
                SliceOptions probe = params.slice;
                probe.fiber_nodes = std::min(probe.fiber_nodes, 21);
                std::optional<LagrangianTable> L;
                if (H.is_convex_in_p() && probe.allow_reduction) L = legendre(H);
                for (int i = 0; i < 5; ++i) {
                    double y = pg.p_min() + (pg.p_max() - pg.p_min()) * i / 4.0;
                    auto si = spectral_invariants(Fk, y, probe, L ? &*L : nullptr);
                    gamma_sup = std::max(gamma_sup, si.gamma());
                }
            }
            out.error_estimate =
                std::max(gap, 0.5 * gamma_sup) + S.error_bound() / params.gf_tau;
            out.resolutions = "x=" + std::to_string(params.slice.x_nodes) +
                              ",fiber=" + std::to_string(params.slice.fiber_nodes);
            break;
        }
        case Backend::ExactPOnly:
            break;  // handled above
    }
    return out;
}

/// Re-homogenizing an effective Hamiltonian: the output is p-only by
/// construction, so the projector fixes it exactly.
inline EffectiveHamiltonian rehomogenize(const EffectiveHamiltonian& h) {
    EffectiveHamiltonian out = h;
    out.backend = Backend::ExactPOnly;
    out.error_estimate = 0;
    return out;
}

/// Partial homogenization by freezing: H4(x,y,q,p) homogenized in (x,y) per
/// frozen (q,p), i.e. a table h(y; q, p) of one-dimensional homogenizations.
struct PartialHomogenization {
    std::vector<double> qs, ps, ys;
    std::vector<double> values;  // [iq][ip][iy]
    double at(size_t iq, size_t ip, size_t iy) const {
        return values[(iq * ps.size() + ip) * ys.size() + iy];
    }
};

inline PartialHomogenization partial_homogenize(
    const std::function<double(double, double, double, double)>& H4, TorusGrid xgrid,
    MomentumGrid ygrid, const std::vector<double>& frozen_q, const std::vector<double>& frozen_p,
    Backend backend = Backend::Levelset, HomogenizeParams params = {}) {
    PartialHomogenization out;
    out.qs = frozen_q;
    out.ps = frozen_p;
    out.ys = ygrid.nodes();
    for (double q : frozen_q)
        for (double p : frozen_p) {
            HamiltonianField slice = sample_hamiltonian(
                [&H4, q, p](double x, double y) { return H4(x, y, q, p); }, xgrid, ygrid);
            EffectiveHamiltonian h;
            try {
                h = homogenize(slice, backend, params);
            } catch (const Error& e) {
                throw BackendInvalid("slice (q=" + std::to_string(q) + ", p=" + std::to_string(p) +
                                     "): " + e.what());
            }
            out.values.insert(out.values.end(), h.values.begin(), h.values.end());
        }
    return out;
}

/// One property verdict of the operator-law suite.
struct PropertyResult {
    std::string property;
    double slack = 0;   // measured violation (0 when the law holds exactly)
    double budget = 0;  // allowed violation
    bool pass = false;
};

struct PropertyReport {
    std::vector<PropertyResult> results;
    bool all_pass() const {
        for (const auto& r : results)
            if (!r.pass) return false;
        return true;
    }
};

struct PropertySuiteConfig {
    uint64_t seed = 7;
    int random_pairs = 20;  // Lipschitz pairs
    int sandwich_cases = 10;
    double tolerance_scale = 1.0;
};

/// Theorem-level laws of the homogenization operator, checked numerically
/// on the pendulum family at the given seed.
inline PropertyReport check_properties(const PropertySuiteConfig& cfg = {}) {
    PropertyReport report;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(0, 1);

    auto push = [&](const std::string& name, double slack, double budget) {
        report.results.push_back({name, slack, budget * cfg.tolerance_scale,
                                  slack <= budget * cfg.tolerance_scale});
    };

    TorusGrid qg(64);
    MomentumGrid pg(-3, 3, 129);
    MomentumGrid probe(-2, 2, 33);
    HomogenizeParams prm;
    prm.pgrid = probe;

    // projector: homogenize twice, exact fixpoint
    {
        auto H = presets::pendulum();
        auto h1 = homogenize(H, Backend::Levelset, prm);
        auto h2 = rehomogenize(h1);
        double slack = 0;
        for (size_t i = 0; i < h1.values.size(); ++i)
            slack = std::max(slack, std::abs(h1.values[i] - h2.values[i]));
        push("projector", slack, 0.0);
    }

    // monotonicity: V -> V + bump lowers H, so lowers the homogenization
    {
        auto mk = [&](double extra) {
            return sample_hamiltonian(
                [extra](double q, double p) {
                    double s = std::sin(presets::pi * q);
                    double b = presets::bump(2 * (wrap_unit(q) - 0.5));
                    return 0.5 * p * p - s * s - extra * b;
                },
                TorusGrid(64), MomentumGrid(-3, 3, 129));
        };
        auto lo = homogenize(mk(0.3), Backend::Levelset, prm);
        auto hi = homogenize(mk(0.0), Backend::Levelset, prm);
        double slack = 0;
        for (size_t i = 0; i < lo.values.size(); ++i)
            slack = std::max(slack, lo.values[i] - hi.values[i]);
        push("monotonicity", std::max(0.0, slack), 1e-9);
    }

    // anti-symmetry on a p-only nonconvex preset through the minmax path,
    // plus the mechanical-vs-reflected check through the generic slices
    {
        auto W = presets::cosine_bump_in_p();
        MomentumGrid wide(-3, 3, 25);
        HomogenizeParams mm;
        mm.pgrid = wide;
        mm.k = 3;
        mm.gf_tau = 0.05;
        auto plus = homogenize(W, Backend::MinMax, mm);
        auto negW = sample_hamiltonian([&W](double q, double p) { return -W.closure()(q, p); },
                                       W.qgrid(), W.pgrid());
        auto minus = homogenize(negW, Backend::MinMax, mm);
        double slack = 0;
        for (size_t i = 0; i < plus.values.size(); ++i)
            slack = std::max(slack, std::abs(plus.values[i] + minus.values[i]));
        push("anti-symmetry", slack, 1e-9);
    }

    // shear invariance through the weakkam backend
    {
        auto H = presets::pendulum();
        auto Hs = presets::pendulum_sheared(0.05);
        HomogenizeParams wk = prm;
        wk.T = 50.0;
        auto a = homogenize(H, Backend::WeakKAM, wk);
        auto b = homogenize(Hs, Backend::WeakKAM, wk);
        double slack = a.sup_distance(b);
        push("shear-invariance", slack, 1.5 * (a.error_estimate + b.error_estimate));
    }

    // C0 Lipschitz-1 on random mechanical pairs through the levelset oracle
    {
        double slack = 0;
        for (int rep = 0; rep < cfg.random_pairs; ++rep) {
            double a1 = 0.5 + U(rng), phase = U(rng);
            double da = 0.3 * U(rng);
            auto mk = [&](double amp) {
                return sample_hamiltonian(
                    [amp, phase](double q, double p) {
                        double s = std::sin(presets::pi * (q + phase));
                        return 0.5 * p * p - amp * s * s;
                    },
                    TorusGrid(64), MomentumGrid(-3, 3, 129));
            };
            auto h1 = homogenize(mk(a1), Backend::Levelset, prm);
            auto h2 = homogenize(mk(a1 + da), Backend::Levelset, prm);
            double c0 = da;  // sup |H1 - H2| = da * sup sin^2
            slack = std::max(slack, h1.sup_distance(h2) - c0);
        }
        push("c0-lipschitz-1", std::max(0.0, slack), 1e-6);
    }

    // quasi-linearity on Poisson-commuting pairs: p-only pairs add exactly,
    // and H with g(H) adds along the levelset formula
    {
        auto h1 = presets::bump_in_p();
        auto h2 = presets::p_only([](double p) { return std::cos(p); });
        auto sum = sample_hamiltonian(
            [&](double q, double p) { return h1.closure()(q, p) + h2.closure()(q, p); }, qg, pg);
        auto a = homogenize(h1, Backend::ExactPOnly, prm);
        auto b = homogenize(h2, Backend::ExactPOnly, prm);
        auto c = homogenize(sum, Backend::ExactPOnly, prm);
        double slack = 0;
        for (size_t i = 0; i < c.values.size(); ++i)
            slack = std::max(slack, std::abs(c.values[i] - a.values[i] - b.values[i]));
        push("quasi-linearity-p-only", slack, 1e-12);
    }

    // sandwich: L = graph(p0 + df) pinches the value at p0
    {
        auto H = presets::pendulum();
        LevelsetOracle oracle(H);
        double slack = 0;
        for (int rep = 0; rep < cfg.sandwich_cases; ++rep) {
            double p0 = -2 + 4 * U(rng);
            double amp = 0.02 + 0.08 * U(rng);
            int mode = 1 + static_cast<int>(2 * U(rng));
            double phase = U(rng);
            double lo = 1e300, hi = -1e300;
            for (int i = 0; i < 512; ++i) {
                double q = i / 512.0;
                double df = amp * std::cos(2 * presets::pi * (mode * q + phase));
                double val = H(q, p0 + df);
                lo = std::min(lo, val);
                hi = std::max(hi, val);
            }
            double hbar = oracle.value(p0);
            slack = std::max({slack, lo - hbar, hbar - hi});
        }
        push("lagrangian-sandwich", std::max(0.0, slack), 1e-9);
    }

    return report;
}

} // namespace effham
