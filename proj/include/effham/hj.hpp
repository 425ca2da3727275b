#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "effham/genfun.hpp"
#include "effham/homog.hpp"
#include "effham/minmax.hpp"
#include "effham/weakkam.hpp"

namespace effham {

/// Time-sliced solution u(t_i, q) of an evolution Hamilton-Jacobi problem.
struct HJSolution {
    TorusGrid qgrid;
    std::vector<double> times;
    std::vector<std::vector<double>> slices;  // aligned with times
    std::string solver;

    const std::vector<double>& at_time(size_t i) const { return slices[i]; }
    double sup_abs(size_t i) const {
        double m = 0;
        for (double v : slices[i]) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Viscosity-style solution for convex H by iterating the inf-convolution
/// semigroup from f.
inline HJSolution solve_laxoleinik(const HamiltonianField& H,
                                   const std::function<double(double)>& f, double t, double tau,
                                   int store_every = 0) {
    if (!H.is_convex_in_p()) throw NotConvex("Lax-Oleinik needs a convex-in-p field");
    auto L = legendre(H);
    auto u = ValueFunction::from(H.qgrid(), f);
    long n = std::lround(t / tau);
    if (store_every <= 0) store_every = static_cast<int>(n);
    HJSolution out{H.qgrid(), {0.0}, {u.u}, "laxoleinik"};
    for (long i = 1; i <= n; ++i) {
        u = lax_oleinik_step(u, L, tau);
        if (i % store_every == 0 || i == n) {
            out.times.push_back(i * tau);
            out.slices.push_back(u.u);
        }
    }
    return out;
}

namespace detail {

/// Jacobi eigensolver for small symmetric matrices (row-major n x n).
inline void jacobi_eigen(std::vector<double>& A, std::vector<double>& V, int n) {
    V.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i) V[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A[i * n + j] * A[i * n + j];
        if (off < 1e-24) break;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double apq = A[i * n + j];
                if (std::abs(apq) < 1e-15) continue;
                double theta = 0.5 * (A[j * n + j] - A[i * n + i]) / apq;
                double sign = theta >= 0 ? 1.0 : -1.0;
                double tt = sign / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(tt * tt + 1), s = tt * c;
                for (int r = 0; r < n; ++r) {
                    double ari = A[r * n + i], arj = A[r * n + j];
                    A[r * n + i] = c * ari - s * arj;
                    A[r * n + j] = s * ari + c * arj;
                }
                for (int r = 0; r < n; ++r) {
                    double air = A[i * n + r], ajr = A[j * n + r];
                    A[i * n + r] = c * air - s * ajr;
                    A[j * n + r] = s * air + c * ajr;
                }
                for (int r = 0; r < n; ++r) {
                    double vri = V[r * n + i], vrj = V[r * n + j];
                    V[r * n + i] = c * vri - s * vrj;
                    V[r * n + j] = s * vri + c * vrj;
                }
            }
    }
}

} // namespace detail

/// Variational (min-max) solution: u(t,q) is the unit-class value of a
/// generating function of the evolved initial graph, built from `steps`
/// one-step functions.  Convex fields reduce to broken Hopf-Lax descent;
/// otherwise the momenta stay as fiber variables of a small complex.
/// Restricted to few steps; it exists to exercise the nonconvex route.
inline HJSolution solve_variational(const HamiltonianField& H,
                                    const std::function<double(double)>& f, double t, int steps,
                                    int fiber_nodes = 13, double box_radius = 0.0) {
    if (steps < 1 || steps > 4) throw ResolutionBudget("variational solver takes 1..4 steps");
    double tau = t / steps;
    OneStepGF S = one_step_gf(H, tau);
    const TorusGrid& qg = H.qgrid();
    HJSolution out{qg, {}, {}, "variational"};

    std::vector<double> u0(qg.n_nodes());
    for (int i = 0; i < qg.n_nodes(); ++i) u0[i] = f(qg.node(i));
    out.times.push_back(0.0);
    out.slices.push_back(u0);

    bool convex = H.is_convex_in_p();
    std::optional<LagrangianTable> L;
    if (convex) L = legendre(H);
    double vel = std::max(H.sup_dp(), 0.5);
    if (box_radius <= 0) box_radius = 2.5 * tau * vel;

    for (int s = 1; s <= steps; ++s) {
        std::vector<double> us(qg.n_nodes());
        if (convex) {
            // W(Q; q_0..q_{s-1}) = f(q_0) + tau sum L(q_i, (q_i - q_{i-1})/tau),
            // all fiber directions positive: the unit value is the minimum.
            // Positions are lifted around Q in nested displacement boxes.
            int m = s;
            std::vector<int> idx(m, 0);
            int nn = fiber_nodes | 1;
            for (int iq = 0; iq < qg.n_nodes(); ++iq) {
                double Q = qg.node(iq);
                double best = std::numeric_limits<double>::infinity();
                std::fill(idx.begin(), idx.end(), 0);
                uint64_t total = 1;
                for (int i = 0; i < m; ++i) total *= nn;
                for (uint64_t c = 0; c < total; ++c) {
                    // idx encodes displacements d_i in [-R, R]; q_i = Q - sum_{j>i} d_j
                    double val = 0;
                    double qnext = Q;
                    bool ok = true;
                    for (int i = m - 1; i >= 0; --i) {
                        double d = -box_radius + 2.0 * box_radius * idx[i] / (nn - 1);
                        double qi = qnext - d;
                        val += tau * L->value(wrap_unit(qnext), d / tau);
                        qnext = qi;
                        if (!std::isfinite(val)) ok = false;
                    }
                    if (ok) val += f(wrap_unit(qnext));
                    if (ok) best = std::min(best, val);
                    for (int i = 0; i < m; ++i) {
                        if (++idx[i] < nn) break;
                        idx[i] = 0;
                    }
                }
                us[iq] = best;
            }
        } else {
            // fiber (q_0..q_{s-1}, p_1..p_s) with coupling sum p_i (q_i - q_{i-1});
            // rotate its quadratic form to principal axes and take the
            // unit-class birth of the relative pair per base point Q.
            int m = 2 * s;
            std::vector<double> A(m * m, 0.0), V;
            // variables v = (d_0..d_{s-1}, p_1..p_s), d_i = q_i - Q lifted
            for (int i = 1; i <= s; ++i) {
                int qi = i - 1 < s - 1 ? i : -1;  // q_i of coupling p_i q_i (i < s)
                if (i <= s - 1 && qi >= 0) {
                    A[(s + i - 1) * m + i] += 0.5;
                    A[i * m + (s + i - 1)] += 0.5;
                }
                int qprev = i - 1;
                A[(s + i - 1) * m + qprev] -= 0.5;
                A[qprev * m + (s + i - 1)] -= 0.5;
            }
            detail::jacobi_eigen(A, V, m);
            std::vector<double> eig(m);
            for (int i = 0; i < m; ++i) eig[i] = A[i * m + i];

            double Rp = 2.5 * tau * std::max(H.sup_dq(), 0.5) * s + 0.3;
            double R = std::max(box_radius * s, 0.1) + Rp;
            for (int iq = 0; iq < qg.n_nodes(); ++iq) {
                double Q = qg.node(iq);
                auto value = [&](std::span<const double> w) {
                    // back to (d, p) coordinates
                    std::array<double, 8> v{};
                    for (int r = 0; r < m; ++r) {
                        double acc = 0;
                        for (int c = 0; c < m; ++c) acc += V[r * m + c] * w[c];
                        v[r] = acc;
                    }
                    double val = f(wrap_unit(Q + v[0]));
                    double qprev = Q + v[0];
                    for (int i = 1; i <= s; ++i) {
                        double qi = i < s ? Q + v[i] : Q;
                        double pi = v[s + i - 1];
                        val += S.S(qi, pi) + pi * (qi - qprev);
                        qprev = qi;
                    }
                    return val;
                };
                std::vector<Axis> axes;
                for (int i = 0; i < m; ++i) axes.push_back({fiber_nodes | 1, false, eig[i] < 0, -R, R});
                SublevelComplex cx = SublevelComplex::from_function(
                    axes, [&](std::span<const double> w) { return value(w); });
                us[iq] = c_value(cx, ClassKind::Unit);
            }
        }
        out.times.push_back(s * tau);
        out.slices.push_back(us);
    }
    return out;
}

/// Long-time slope of the variational/viscosity solution: u(T,q0)/T
/// Richardson-extrapolated over T and T/2; the limit is -Hbar(0).
inline double longtime_slope(const HamiltonianField& H, const std::function<double(double)>& f,
                             double T = 50.0, double tau = 0.02) {
    if (!H.is_convex_in_p()) throw NotConvex("long-time slope needs a convex-in-p field");
    auto L = legendre(H);
    auto u = ValueFunction::from(H.qgrid(), f);
    long n = std::lround(T / tau);
    double half = 0;
    for (long i = 1; i <= n; ++i) {
        u = lax_oleinik_step(u, L, tau);
        if (i == n / 2) half = u.u[0] / (0.5 * T);
    }
    double full = u.u[0] / T;
    return 2 * full - half;
}

/// Error table of the oscillatory problem u_k vs the homogenized solution.
struct HomogenizationExperiment {
    std::vector<int> ks;
    std::vector<double> times;
    std::vector<std::vector<double>> e;  // e[k_index][time_index]
    std::vector<double> epsilon;         // fitted slope of e ~ eps * t
    std::vector<double> fit_residual;    // max |e - eps t| / e(t_max)
};

/// Solve the oscillatory problem with H(kx,p) by the rescaling identity:
/// iterate the unit-cell semigroup on a k-refined grid with the scaled
/// Lagrangian, then map back.  The homogenized reference is Hopf-Lax with
/// the levelset effective Hamiltonian.
inline HomogenizationExperiment homogenization_experiment(
    const HamiltonianField& H, const std::function<double(double)>& f,
    const std::vector<int>& k_list, double t_max, int n_base = 64, double tau = 0.02,
    int n_times = 8, int resolution_cap = 1024) {
    if (!H.is_convex_in_p()) throw NotConvex("oscillatory experiment needs convex H");

    // homogenized reference: Hopf-Lax with Lbar = Legendre of the levelset curve
    LevelsetOracle oracle(H);
    MomentumGrid pg = H.pgrid();
    int np = 4 * pg.n_nodes();
    std::vector<double> hbar(np);
    for (int i = 0; i < np; ++i)
        hbar[i] = oracle.value(pg.p_min() + (pg.p_max() - pg.p_min()) * i / (np - 1));
    auto hbar_at = [&](int i) { return hbar[i]; };
    auto pnode = [&](int i) { return pg.p_min() + (pg.p_max() - pg.p_min()) * i / (np - 1); };
    auto Lbar = [&](double xi) {
        double best = -1e300;
        for (int i = 0; i < np; ++i) best = std::max(best, pnode(i) * xi - hbar_at(i));
        return best;
    };
    auto ubar = [&](double t, double x, const std::function<double(double)>& f0) {
        double best = 1e300;
        int n = 2048;
        double reach = 1.2 * pg.p_max() * t + 0.01;
        for (int i = -n; i <= n; ++i) {
            double y = x + reach * i / n;
            best = std::min(best, f0(wrap_unit(y)) + t * Lbar((x - y) / t));
        }
        return best;
    };

    HomogenizationExperiment out;
    // sample times are snapped to the step grid so every k attains them
    for (int i = 1; i <= n_times; ++i) {
        double want = t_max * i / n_times;
        out.times.push_back(std::max(1.0, std::round(want / tau)) * tau);
    }

    auto L = legendre(H);
    for (int k : k_list) {
        int n = n_base * k;
        if (n > resolution_cap) throw ResolutionBudget("k-refined grid exceeds the cap");
        TorusGrid g(n);
        // scaled cell problem: Lagrangian Ltilde(X, Xi) = L(kX, k Xi),
        // initial datum k f(X), run to time k t, then divide by k
        int nxi = 2 * n + 1;
        double xim = L.xi_max() / k;
        UniformGrid xg(-xim, xim, nxi);
        std::vector<double> lvals(static_cast<size_t>(n) * nxi);
        for (int iq = 0; iq < n; ++iq)
            for (int ix = 0; ix < nxi; ++ix)
                lvals[iq * nxi + ix] = L.value(wrap_unit(static_cast<double>(k) * g.node(iq)),
                                               k * xg.node(ix));
        LagrangianTable Lt(g, xg, std::move(lvals));
        auto u = ValueFunction::from(g, [&](double X) { return k * f(X); });
        std::vector<double> errs;
        size_t ti = 0;
        long total_steps = std::lround(k * t_max / tau);
        for (long step = 1; step <= total_steps && ti < out.times.size(); ++step) {
            u = lax_oleinik_step(u, Lt, tau);
            double t_now = step * tau / k;
            if (t_now + 1e-9 >= out.times[ti]) {
                double e = 0;
                for (int iq = 0; iq < n; ++iq) {
                    double uk = u.u[iq] / k;
                    e = std::max(e, std::abs(uk - ubar(t_now, g.node(iq), f)));
                }
                errs.push_back(e);
                ++ti;
            }
        }
        out.ks.push_back(k);
        out.e.push_back(errs);
        // least-squares slope through the origin and its relative residual
        double num = 0, den = 0;
        for (size_t j = 0; j < errs.size(); ++j) {
            num += out.times[j] * errs[j];
            den += out.times[j] * out.times[j];
        }
        double eps = den > 0 ? num / den : 0;
        double resid = 0;
        for (size_t j = 0; j < errs.size(); ++j)
            resid = std::max(resid, std::abs(errs[j] - eps * out.times[j]));
        out.epsilon.push_back(eps);
        out.fit_residual.push_back(errs.back() > 0 ? resid / errs.back() : 0);
    }
    return out;
}

} // namespace effham
