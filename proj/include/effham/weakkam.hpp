#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "effham/field.hpp"

namespace effham {

/// L(q,xi) on TorusGrid x velocity grid, discretely convex in xi.
class LagrangianTable {
public:
    LagrangianTable(TorusGrid qgrid, UniformGrid xigrid, std::vector<double> values)
        : qgrid_(qgrid), xigrid_(xigrid), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != qgrid_.n_nodes() * xigrid_.n_nodes())
            throw InvalidField("Lagrangian table size mismatch");
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq)
            for (int i = 1; i + 1 < xigrid_.n_nodes(); ++i)
                if (at(iq, i + 1) - 2 * at(iq, i) + at(iq, i - 1) < -1e-9)
                    throw NotConvex("Lagrangian not convex in xi");
    }

    const TorusGrid& qgrid() const { return qgrid_; }
    const UniformGrid& xigrid() const { return xigrid_; }
    double at(int iq, int ixi) const { return values_[iq * xigrid_.n_nodes() + ixi]; }
    double xi_max() const { return xigrid_.hi(); }

    /// Value at a q-node and arbitrary xi; linear interpolation inside the
    /// grid, linear extension with the boundary slope outside it.
    double row_value(int iq, double xi) const {
        int n = xigrid_.n_nodes();
        if (xi < xigrid_.lo()) {
            double s = (at(iq, 1) - at(iq, 0)) / xigrid_.spacing();
            return at(iq, 0) + s * (xi - xigrid_.lo());
        }
        if (xi > xigrid_.hi()) {
            double s = (at(iq, n - 1) - at(iq, n - 2)) / xigrid_.spacing();
            return at(iq, n - 1) + s * (xi - xigrid_.hi());
        }
        auto [i, f] = xigrid_.locate(xi);
        return (1 - f) * at(iq, i) + f * at(iq, i + 1);
    }

    /// Bilinear value at arbitrary (q, xi).
    double value(double q, double xi) const {
        auto [jq, fq] = qgrid_.locate(q);
        int jq1 = qgrid_.wrap(jq + 1);
        return (1 - fq) * row_value(jq, xi) + fq * row_value(jq1, xi);
    }

    /// L - p * xi, the tilted Lagrangian (still convex in xi).
    LagrangianTable tilted(double p) const {
        std::vector<double> vals(values_.size());
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq)
            for (int i = 0; i < xigrid_.n_nodes(); ++i)
                vals[iq * xigrid_.n_nodes() + i] = at(iq, i) - p * xigrid_.node(i);
        return LagrangianTable(qgrid_, xigrid_, std::move(vals));
    }

private:
    TorusGrid qgrid_;
    UniformGrid xigrid_;
    std::vector<double> values_;
};

namespace detail {

/// max over the p-grid of (p*xi - H(q,p)) with 3-point parabolic refinement.
inline double legendre_row_max(const HamiltonianField& H, int iq, double xi, int& argmax_hint) {
    const auto& pg = H.pgrid();
    int np = pg.n_nodes();
    double q = H.qgrid().node(iq);
    int best = std::clamp(argmax_hint, 0, np - 1);
    auto score = [&](int ip) { return pg.node(ip) * xi - H.at(iq, ip); };
    // the argmax is nondecreasing in xi; walk from the hint
    while (best + 1 < np && score(best + 1) >= score(best)) ++best;
    while (best > 0 && score(best - 1) > score(best)) --best;
    argmax_hint = best;
    double v = score(best);
    if (best > 0 && best + 1 < np) {
        double vm = score(best - 1), vp = score(best + 1);
        double denom = vm - 2 * v + vp;
        if (denom < -1e-300) {
            double delta = 0.5 * (vm - vp) / denom;
            if (std::abs(delta) <= 1.0) {
                double h = pg.spacing();
                double p_star = pg.node(best) + delta * h;
                v = std::max(v, p_star * xi - H(q, p_star));
            }
        }
    }
    return v;
}

} // namespace detail

/// Discrete Legendre transform of a convex-in-p field:
/// L(q,xi) = max_p (p xi - H(q,p)), computed by a monotone argmax scan.
inline LagrangianTable legendre(const HamiltonianField& H, int n_xi = 0, double xi_max = 0) {
    if (!H.is_convex_in_p()) throw NotConvex("legendre requires a convex-in-p field");
    if (xi_max <= 0) xi_max = 1.5 * std::max(H.sup_dp(), 0.5);
    if (n_xi <= 0) n_xi = 2 * H.pgrid().n_nodes() + 1;
    if (n_xi % 2 == 0) ++n_xi;
    UniformGrid xg(-xi_max, xi_max, n_xi);
    std::vector<double> vals(static_cast<size_t>(H.qgrid().n_nodes()) * n_xi);
    for (int iq = 0; iq < H.qgrid().n_nodes(); ++iq) {
        int hint = 0;
        for (int i = 0; i < n_xi; ++i)
            vals[iq * n_xi + i] = detail::legendre_row_max(H, iq, xg.node(i), hint);
    }
    return LagrangianTable(H.qgrid(), xg, std::move(vals));
}

/// u(q) on the torus grid with accumulated time and momentum tilt.
struct ValueFunction {
    TorusGrid qgrid;
    std::vector<double> u;
    double t = 0;
    double tilt = 0;

    static ValueFunction zero(TorusGrid g) {
        return {g, std::vector<double>(g.n_nodes(), 0.0), 0.0, 0.0};
    }

    static ValueFunction from(TorusGrid g, const std::function<double(double)>& f) {
        ValueFunction v{g, std::vector<double>(g.n_nodes()), 0.0, 0.0};
        for (int i = 0; i < g.n_nodes(); ++i) v.u[i] = f(g.node(i));
        return v;
    }

    double min() const { return *std::min_element(u.begin(), u.end()); }
    double max() const { return *std::max_element(u.begin(), u.end()); }
};

/// One inf-convolution step of the Lax-Oleinik semigroup:
/// u'(x) = min over lifted y with |x-y| <= xi_max*tau of u(y) + tau L(y,(x-y)/tau).
/// Monotone in u and commutes exactly with adding constants.
inline ValueFunction lax_oleinik_step(const ValueFunction& u, const LagrangianTable& L, double tau) {
    if (tau <= 0) throw InvalidField("tau must be positive");
    if (u.qgrid.n_nodes() != L.qgrid().n_nodes())
        throw GridMismatch("value function and Lagrangian grids differ");
    const TorusGrid& g = u.qgrid;
    int n = g.n_nodes();
    double h = g.spacing();
    int w0 = static_cast<int>(std::ceil(L.xi_max() * tau / h)) + 1;
    double u_min = *std::min_element(u.u.begin(), u.u.end());

    // tail(o): lower bound for L(q, xi) over all q and |xi| >= o h / tau,
    // valid beyond the mandatory window where every row is increasing.
    std::vector<double> tail;
    auto tail_at = [&](int o) {
        while (static_cast<int>(tail.size()) <= o) {
            int oo = static_cast<int>(tail.size());
            double xi = oo * h / tau;
            double m = std::numeric_limits<double>::infinity();
            for (int iq = 0; iq < L.qgrid().n_nodes(); ++iq)
                m = std::min({m, L.row_value(iq, xi), L.row_value(iq, -xi)});
            tail.push_back(m);
        }
        return tail[o];
    };

    ValueFunction out{g, std::vector<double>(n), u.t + tau, u.tilt};
    for (int ix = 0; ix < n; ++ix) {
        double best = std::numeric_limits<double>::infinity();
        for (int off = 0;; ++off) {
            if (off > 64 * n) throw WindowTooSmall("Lax-Oleinik window exhausted");
            if (off > w0 && u_min + tau * tail_at(off) >= best) break;
            double xi = off * h / tau;
            for (int sgn : {1, -1}) {
                int iy = g.wrap(ix - sgn * off);
                double cand = u.u[iy] + tau * L.row_value(iy, sgn * xi);
                best = std::min(best, cand);
                if (off == 0) break;
            }
        }
        out.u[ix] = best;
    }
    return out;
}

/// Iterate the semigroup n times.
inline ValueFunction lax_oleinik_iterate(ValueFunction u, const LagrangianTable& L, double tau,
                                         int n) {
    for (int i = 0; i < n; ++i) u = lax_oleinik_step(u, L, tau);
    return u;
}

/// Effective Hamiltonian at momentum p via the long-time average of the
/// tilted minimal action, Richardson-extrapolated over T and T/2.
inline double alpha_effective(const HamiltonianField& H, double p, double T = 50.0,
                              double tau = 0.02, const LagrangianTable* Lbase = nullptr,
                              double* richardson_gap = nullptr) {
    LagrangianTable L = Lbase ? Lbase->tilted(p) : legendre(H).tilted(p);
    long n = std::lround(T / tau);
    if (std::abs(n * tau - T) > 1e-9) throw InvalidField("T must be a multiple of tau");
    ValueFunction u = ValueFunction::zero(H.qgrid());
    u.tilt = p;
    double a_half = 0;
    for (long i = 1; i <= n; ++i) {
        u = lax_oleinik_step(u, L, tau);
        if (i == n / 2) a_half = -u.min() / (0.5 * T);
    }
    double a_full = -u.min() / T;
    if (richardson_gap) *richardson_gap = std::abs(a_full - a_half);
    return 2 * a_full - a_half;
}

/// Exact effective Hamiltonian of a 1-D mechanical field H = p^2/2 - V(q):
/// zero on the flat piece |p| <= I(0), else the level lambda solving
/// I(lambda) = |p| with I(l) = integral of sqrt(2(V+l)) over one period.
class LevelsetOracle {
public:
    explicit LevelsetOracle(const HamiltonianField& H, int panels = 10000) {
        if (!H.is_mechanical()) throw NotMechanical("levelset oracle needs H = p^2/2 - V(q)");
        std::vector<double> Vtab;
        if (!H.has_closure()) Vtab = H.mechanical_potential();
        auto sampleV = [&](double q) -> double {
            if (H.has_closure()) return 0.5 - H.closure()(wrap_unit(q), 1.0);  // V = p^2/2 - H
            const auto& qg = H.qgrid();
            auto [j, f] = qg.locate(q);
            return (1 - f) * Vtab[j] + f * Vtab[qg.wrap(j + 1)];
        };
        Vmid_.resize(panels);
        for (int i = 0; i < panels; ++i) Vmid_[i] = sampleV((i + 0.5) / panels);
        // min over a scan including the nodes, so grid minima are hit exactly
        vmin_ = Vmid_[0];
        for (int i = 0; i <= 2 * panels; ++i) vmin_ = std::min(vmin_, sampleV(0.5 * i / panels));
        vmax_ = *std::max_element(Vmid_.begin(), Vmid_.end());
    }

    /// I(lambda) for the min-shifted potential.
    double momentum_of_level(double lambda) const {
        double s = 0;
        for (double v : Vmid_) s += std::sqrt(std::max(0.0, 2 * ((v - vmin_) + lambda)));
        return s / Vmid_.size();
    }

    double flat_piece_radius() const { return momentum_of_level(0.0); }

    double value(double p) const {
        double target = std::abs(p);
        if (target <= flat_piece_radius()) return -vmin_;
        double lo = 0.0, hi = 0.5 * target * target + (vmax_ - vmin_) + 1.0;
        while (momentum_of_level(hi) < target) hi *= 2;
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
            double mid = 0.5 * (lo + hi);
            (momentum_of_level(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi) - vmin_;
    }

private:
    std::vector<double> Vmid_;
    double vmin_ = 0, vmax_ = 0;
};

inline double levelset_oracle(const HamiltonianField& H, double p) {
    return LevelsetOracle(H).value(p);
}

} // namespace effham
