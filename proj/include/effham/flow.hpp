#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "effham/field.hpp"

namespace effham {

/// Point on the cylinder with the continuous lift of q carried along.
struct PhasePoint {
    double q = 0;       // representative in [0,1)
    double p = 0;
    double lift_q = 0;  // lift_q == q (mod 1) along any trajectory

    static PhasePoint at(double q, double p) { return {wrap_unit(q), p, q}; }
};

struct Trajectory {
    std::vector<double> t;
    std::vector<PhasePoint> z;
    std::vector<double> energy;

    const PhasePoint& back() const { return z.back(); }
    size_t size() const { return z.size(); }
};

namespace detail {

inline bool separable(const HamiltonianField& H) {
    const auto& qg = H.qgrid();
    const auto& pg = H.pgrid();
    double scale = std::max(1.0, H.max_abs());
    double q0 = qg.node(0), p0 = pg.node(pg.n_nodes() / 2);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            double q = qg.node(i * qg.n_nodes() / 8);
            double p = pg.node(j * (pg.n_nodes() - 1) / 7);
            double mixed = H(q, p) - H(q, p0) - H(q0, p) + H(q0, p0);
            if (std::abs(mixed) > 1e-10 * scale) return false;
        }
    return true;
}

} // namespace detail

enum class FlowScheme { Auto, Verlet, Midpoint };

/// Integrate the flow of H from z0 for time t with fixed step dt.
/// Separable fields use Stormer-Verlet; otherwise the implicit midpoint
/// rule with Newton iteration (tol 1e-12, at most 50 iterations).
inline Trajectory integrate(const HamiltonianField& H, PhasePoint z0, double t, double dt,
                            FlowScheme scheme = FlowScheme::Auto) {
    if (dt <= 0) throw InvalidField("dt must be positive");
    long n = std::lround(t / dt);
    if (std::abs(n * dt - t) > 1e-9 * std::max(1.0, t))
        throw InvalidField("t must be a multiple of dt");

    const auto& pg = H.pgrid();
    auto check_domain = [&](double p) {
        if (p < pg.p_min() || p > pg.p_max()) throw OutOfDomain("p left the momentum grid");
    };

    bool sep = scheme == FlowScheme::Auto ? detail::separable(H) : scheme == FlowScheme::Verlet;
    Trajectory traj;
    traj.t.reserve(n + 1);
    traj.z.reserve(n + 1);
    traj.energy.reserve(n + 1);
    double lift = z0.lift_q, p = z0.p;
    check_domain(p);
    traj.t.push_back(0.0);
    traj.z.push_back({wrap_unit(lift), p, lift});
    traj.energy.push_back(H(lift, p));

    // Yoshida triple-jump weights: composing Verlet substeps with these
    // coefficients gives a fourth-order symplectic step.
    constexpr double w1 = 1.3512071919596578;   // 1/(2 - 2^(1/3))
    constexpr double w0 = -1.7024143839193155;  // -2^(1/3) w1
    auto verlet = [&H](double& lift, double& p, double h) {
        double ph = p - 0.5 * h * H.dq(lift, p);
        lift += h * H.dp(lift, ph);
        p = ph - 0.5 * h * H.dq(lift, ph);
    };

    for (long i = 1; i <= n; ++i) {
        if (sep) {
            verlet(lift, p, w1 * dt);
            verlet(lift, p, w0 * dt);
            verlet(lift, p, w1 * dt);
        } else {
            // implicit midpoint: z' = z + dt * J grad H((z+z')/2)
            double qn = lift, pn = p;
            bool converged = false;
            for (int it = 0; it < 50; ++it) {
                double qm = 0.5 * (lift + qn), pm = 0.5 * (p + pn);
                double fq = qn - lift - dt * H.dp(qm, pm);
                double fp = pn - p + dt * H.dq(qm, pm);
                // Jacobian of the residual by finite differences in (qn,pn)
                double e = 1e-7;
                double fq_q = 1 - dt * 0.5 * (H.dp(qm + 0.5 * e, pm) - H.dp(qm - 0.5 * e, pm)) / e;
                double fq_p = -dt * 0.5 * (H.dp(qm, pm + 0.5 * e) - H.dp(qm, pm - 0.5 * e)) / e;
                double fp_q = dt * 0.5 * (H.dq(qm + 0.5 * e, pm) - H.dq(qm - 0.5 * e, pm)) / e;
                double fp_p = 1 + dt * 0.5 * (H.dq(qm, pm + 0.5 * e) - H.dq(qm, pm - 0.5 * e)) / e;
                double det = fq_q * fp_p - fq_p * fp_q;
                if (std::abs(det) < 1e-14) throw NewtonDivergence("singular Newton system");
                double dq_step = (-fq * fp_p + fp * fq_p) / det;
                double dp_step = (-fp * fq_q + fq * fp_q) / det;
                qn += dq_step;
                pn += dp_step;
                if (std::abs(dq_step) + std::abs(dp_step) < 1e-12) {
                    converged = true;
                    break;
                }
            }
            if (!converged) throw NewtonDivergence("implicit midpoint did not converge");
            lift = qn;
            p = pn;
        }
        check_domain(p);
        traj.t.push_back(i * dt);
        traj.z.push_back({wrap_unit(lift), p, lift});
        traj.energy.push_back(H(lift, p));
    }
    return traj;
}

/// Default step policy: dt = t/ceil(t/1e-3), refined until halving the step
/// moves the endpoint by less than 1e-7.
inline Trajectory integrate_auto(const HamiltonianField& H, PhasePoint z0, double t,
                                 double target = 1e-7, int max_refine = 6) {
    double dt = t / std::ceil(t / 1e-3);
    Trajectory a = integrate(H, z0, t, dt);
    for (int r = 0; r < max_refine; ++r) {
        Trajectory b = integrate(H, z0, t, dt / 2);
        double move = std::abs(a.back().lift_q - b.back().lift_q) +
                      std::abs(a.back().p - b.back().p);
        a = std::move(b);
        dt /= 2;
        if (move < target) break;
    }
    return a;
}

/// phi_k = rho_k^{-1} phi^{kt} rho_k with rho_k(q,p) = (kq, p), evaluated via
/// the continuous lift (the division by k is only well defined on lifts).
inline PhasePoint rescale_conjugate(const HamiltonianField& H, int k, PhasePoint z0, double t,
                                    double dt = 1e-3) {
    if (k < 1) throw InvalidField("k must be >= 1");
    PhasePoint scaled{wrap_unit(k * z0.lift_q), z0.p, k * z0.lift_q};
    Trajectory traj = integrate(H, scaled, k * t, dt);
    double lift = traj.back().lift_q / k;
    return {wrap_unit(lift), traj.back().p, lift};
}

/// Time-t flow map sampled on a phase grid, with continuous q-lifts.
struct FlowMap {
    TorusGrid qgrid;
    MomentumGrid pgrid;
    double t;
    std::vector<double> Q;  // lifted output positions, row-major [iq][ip]
    std::vector<double> P;

    static FlowMap build(const HamiltonianField& H, double t, TorusGrid qg, MomentumGrid pg,
                         double dt = 1e-3) {
        FlowMap m{qg, pg, t, {}, {}};
        m.Q.resize(static_cast<size_t>(qg.n_nodes()) * pg.n_nodes());
        m.P.resize(m.Q.size());
        for (int iq = 0; iq < qg.n_nodes(); ++iq)
            for (int ip = 0; ip < pg.n_nodes(); ++ip) {
                auto traj = integrate(H, PhasePoint::at(qg.node(iq), pg.node(ip)), t, dt);
                m.Q[iq * pg.n_nodes() + ip] = traj.back().lift_q;
                m.P[iq * pg.n_nodes() + ip] = traj.back().p;
            }
        return m;
    }
};

/// Jacobian determinant of the time-t map at (q,p), from the variational
/// equations propagated alongside the trajectory (the exact tangent of each
/// kick/drift substep, so no finite differencing of trajectories).
inline double flow_jacobian_det(const HamiltonianField& H, double q, double p, double t,
                                double dt = 1e-3) {
    long n = std::lround(t / dt);
    bool sep = detail::separable(H);
    double M[4] = {1, 0, 0, 1};  // row-major tangent matrix
    auto lmul = [&M](double a, double b, double c, double d) {
        double m0 = a * M[0] + b * M[2], m1 = a * M[1] + b * M[3];
        double m2 = c * M[0] + d * M[2], m3 = c * M[1] + d * M[3];
        M[0] = m0;
        M[1] = m1;
        M[2] = m2;
        M[3] = m3;
    };
    double lift = q, pp = p;
    const double fd = 1e-5;
    auto Vqq = [&](double qq, double mom) { return (H.dq(qq + fd, mom) - H.dq(qq - fd, mom)) / (2 * fd); };
    auto Tpp = [&](double qq, double mom) { return (H.dp(qq, mom + fd) - H.dp(qq, mom - fd)) / (2 * fd); };
    if (sep) {
        constexpr double w1 = 1.3512071919596578;
        constexpr double w0 = -1.7024143839193155;
        auto verlet = [&](double h) {
            lmul(1, 0, -0.5 * h * Vqq(lift, pp), 1);
            double ph = pp - 0.5 * h * H.dq(lift, pp);
            lmul(1, h * Tpp(lift, ph), 0, 1);
            lift += h * H.dp(lift, ph);
            lmul(1, 0, -0.5 * h * Vqq(lift, ph), 1);
            pp = ph - 0.5 * h * H.dq(lift, ph);
        };
        for (long i = 0; i < n; ++i) {
            verlet(w1 * dt);
            verlet(w0 * dt);
            verlet(w1 * dt);
        }
    } else {
        for (long i = 0; i < n; ++i) {
            auto traj = integrate(H, PhasePoint{wrap_unit(lift), pp, lift}, dt, dt);
            double lift2 = traj.back().lift_q, p2 = traj.back().p;
            double qm = 0.5 * (lift + lift2), pm = 0.5 * (pp + p2);
            // Cayley tangent (I - dt/2 J A)^{-1} (I + dt/2 J A), A = Hess H(mid)
            double a = Vqq(qm, pm);
            double c = Tpp(qm, pm);
            double b = (H.dp(qm + fd, pm) - H.dp(qm - fd, pm)) / (2 * fd);
            double h2 = 0.5 * dt;
            // J A = [[b, c], [-a, -b]]
            double P[4] = {1 + h2 * b, h2 * c, -h2 * a, 1 - h2 * b};
            double Q[4] = {1 - h2 * b, -h2 * c, h2 * a, 1 + h2 * b};
            double det = Q[0] * Q[3] - Q[1] * Q[2];
            double Qi[4] = {Q[3] / det, -Q[1] / det, -Q[2] / det, Q[0] / det};
            double S[4] = {Qi[0] * P[0] + Qi[1] * P[2], Qi[0] * P[1] + Qi[1] * P[3],
                           Qi[2] * P[0] + Qi[3] * P[2], Qi[2] * P[1] + Qi[3] * P[3]};
            lmul(S[0], S[1], S[2], S[3]);
            lift = lift2;
            pp = p2;
        }
    }
    return M[0] * M[3] - M[1] * M[2];
}

/// Average a 1-periodic time-dependent Hamiltonian over one period
/// (trapezoid rule on the periodic slices), producing an autonomous field.
inline HamiltonianField time_average(const TimeDependentField& Ht) {
    const auto& slices = Ht.slices();
    const auto& qg = slices[0].qgrid();
    const auto& pg = slices[0].pgrid();
    for (const auto& s : slices)
        if (s.qgrid().n_nodes() != qg.n_nodes() || s.pgrid().n_nodes() != pg.n_nodes())
            throw GridMismatch("time slices live on different grids");
    std::vector<double> vals(static_cast<size_t>(qg.n_nodes()) * pg.n_nodes(), 0.0);
    for (const auto& s : slices)
        for (size_t i = 0; i < vals.size(); ++i) vals[i] += s.values()[i];
    for (double& v : vals) v /= slices.size();
    return HamiltonianField(qg, pg, std::move(vals));
}

} // namespace effham
