#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "effham/errors.hpp"
#include "effham/grid.hpp"

namespace effham {

enum class Interp { Bilinear, Bicubic };

/// Thresholds used when structural flags are inferred from samples.
struct FlagThresholds {
    double p_only_row_diff = 1e-12;
    double convexity_slack = -1e-10;
    double compact_support = 1e-12;
};

/// A Hamiltonian H(q,p) sampled on TorusGrid x MomentumGrid, with structural
/// flags and an optional analytic closure for exact evaluation.  Fields are
/// immutable after construction and safe to share across threads.
class HamiltonianField {
public:
    using Closure = std::function<double(double, double)>;

    HamiltonianField(TorusGrid qgrid, MomentumGrid pgrid, std::vector<double> values,
                     Closure closure = nullptr, Interp interp = Interp::Bilinear)
        : qgrid_(qgrid), pgrid_(pgrid), values_(std::move(values)),
          closure_(std::move(closure)), interp_(interp) {
        if (static_cast<int>(values_.size()) != qgrid_.n_nodes() * pgrid_.n_nodes())
            throw InvalidField("value table size does not match grids");
        for (double v : values_)
            if (!std::isfinite(v)) throw InvalidField("non-finite sample");
        infer_flags();
    }

    const TorusGrid& qgrid() const { return qgrid_; }
    const MomentumGrid& pgrid() const { return pgrid_; }
    const std::vector<double>& values() const { return values_; }
    double at(int iq, int ip) const { return values_[iq * pgrid_.n_nodes() + ip]; }

    bool is_p_only() const { return is_p_only_; }
    bool is_convex_in_p() const { return is_convex_in_p_; }
    bool is_compactly_supported() const { return is_compactly_supported_; }
    const FlagThresholds& thresholds() const { return thresholds_; }
    std::optional<double> truncation_radius() const { return truncation_radius_; }
    bool has_closure() const { return static_cast<bool>(closure_); }
    const Closure& closure() const { return closure_; }
    Interp interp() const { return interp_; }

    /// Table interpolation (bilinear or bicubic); exact at grid nodes.
    double value(double q, double p) const {
        if (!pgrid_.contains(p)) throw OutOfDomain("p outside momentum grid");
        return interp_ == Interp::Bilinear ? bilinear(q, p) : bicubic(q, p);
    }

    /// Preferred evaluation: analytic closure when present, table otherwise.
    double operator()(double q, double p) const {
        if (closure_) return closure_(wrap_unit(q), p);
        return value(q, p);
    }

    /// dH/dq by central differences on the closure (or table).
    double dq(double q, double p, double h = 1e-6) const {
        if (closure_) return (closure_(wrap_unit(q + h), p) - closure_(wrap_unit(q - h), p)) / (2 * h);
        return (value(q + h, p) - value(q - h, p)) / (2 * h);
    }

    /// dH/dp by central differences, one-sided near the grid boundary.
    double dp(double q, double p, double h = 1e-6) const {
        double lo = pgrid_.p_min(), hi = pgrid_.p_max();
        double a = std::max(lo, p - h), b = std::min(hi, p + h);
        if (closure_) return (closure_(wrap_unit(q), b) - closure_(wrap_unit(q), a)) / (b - a);
        return (value(q, b) - value(q, a)) / (b - a);
    }

    double max_abs() const {
        double m = 0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// sup |dH/dp| over the grid (closure-based central differences).
    double sup_dp() const {
        double m = 0;
        double h = 0.5 * pgrid_.spacing();
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq)
            for (int ip = 0; ip < pgrid_.n_nodes(); ++ip) {
                double p = pgrid_.node(ip);
                p = std::clamp(p, pgrid_.p_min() + h, pgrid_.p_max() - h);
                m = std::max(m, std::abs(dp(qgrid_.node(iq), p, h)));
            }
        return m;
    }

    /// sup |dH/dq| over the grid.
    double sup_dq() const {
        double m = 0;
        double h = 0.5 * qgrid_.spacing();
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq)
            for (int ip = 0; ip < pgrid_.n_nodes(); ++ip)
                m = std::max(m, std::abs(dq(qgrid_.node(iq), pgrid_.node(ip), h)));
        return m;
    }

    /// Crude sup of the Hessian entries, used for error estimates.
    double sup_hessian() const {
        double m = 0;
        hessian_scan([&](double dqq, double dpp, double dqp) {
            m = std::max({m, std::abs(dqq), std::abs(dpp), std::abs(dqp)});
        });
        return m;
    }

    /// sup of the q-row of the Hessian (|H_qq|, |H_qp|); this is what
    /// controls solvability of generating-function relations in Q.
    double sup_hessian_q() const {
        double m = 0;
        hessian_scan([&](double dqq, double, double dqp) {
            m = std::max({m, std::abs(dqq), std::abs(dqp)});
        });
        return m;
    }

    template <class F>
    void hessian_scan(F&& visit) const {
        double hq = qgrid_.spacing(), hp = pgrid_.spacing();
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq)
            for (int ip = 1; ip + 1 < pgrid_.n_nodes(); ++ip) {
                double q = qgrid_.node(iq), p = pgrid_.node(ip);
                double dqq =
                    ((*this)(q + hq, p) - 2 * (*this)(q, p) + (*this)(q - hq, p)) / (hq * hq);
                double dpp =
                    ((*this)(q, p + hp) - 2 * (*this)(q, p) + (*this)(q, p - hp)) / (hp * hp);
                double dqp = ((*this)(q + hq, p + hp) - (*this)(q + hq, p - hp) -
                              (*this)(q - hq, p + hp) + (*this)(q - hq, p - hp)) /
                             (4 * hq * hp);
                visit(dqq, dpp, dqp);
            }
    }

    /// True when H(q,p) - p^2/2 is independent of p (mechanical form).
    bool is_mechanical(double tol = 1e-9) const {
        double scale = std::max(1.0, max_abs());
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq) {
            double ref = at(iq, 0) - 0.5 * pgrid_.node(0) * pgrid_.node(0);
            for (int ip = 1; ip < pgrid_.n_nodes(); ++ip) {
                double p = pgrid_.node(ip);
                if (std::abs(at(iq, ip) - 0.5 * p * p - ref) > tol * scale) return false;
            }
        }
        return true;
    }

    /// Potential V(q) = p^2/2 - H(q,p) of a mechanical field.
    std::vector<double> mechanical_potential() const {
        if (!is_mechanical()) throw NotMechanical("field is not of mechanical form");
        std::vector<double> V(qgrid_.n_nodes());
        for (int iq = 0; iq < qgrid_.n_nodes(); ++iq) {
            double p0 = pgrid_.node(0);
            V[iq] = 0.5 * p0 * p0 - at(iq, 0);
        }
        return V;
    }

    void set_truncation_radius(double a) { truncation_radius_ = a; }

private:
    void infer_flags() {
        int nq = qgrid_.n_nodes(), np = pgrid_.n_nodes();
        is_p_only_ = true;
        for (int iq = 1; iq < nq && is_p_only_; ++iq)
            for (int ip = 0; ip < np; ++ip)
                if (std::abs(at(iq, ip) - at(0, ip)) > thresholds_.p_only_row_diff) {
                    is_p_only_ = false;
                    break;
                }
        is_convex_in_p_ = true;
        for (int iq = 0; iq < nq && is_convex_in_p_; ++iq)
            for (int ip = 1; ip + 1 < np; ++ip)
                if (at(iq, ip + 1) - 2 * at(iq, ip) + at(iq, ip - 1) < thresholds_.convexity_slack) {
                    is_convex_in_p_ = false;
                    break;
                }
        is_compactly_supported_ = true;
        for (int iq = 0; iq < nq; ++iq)
            if (std::abs(at(iq, 0)) > thresholds_.compact_support ||
                std::abs(at(iq, np - 1)) > thresholds_.compact_support) {
                is_compactly_supported_ = false;
                break;
            }
    }

    double bilinear(double q, double p) const {
        auto [jq, fq] = qgrid_.locate(q);
        auto [jp, fp] = pgrid_.locate(p);
        int jq1 = qgrid_.wrap(jq + 1);
        double v00 = at(jq, jp), v01 = at(jq, jp + 1);
        double v10 = at(jq1, jp), v11 = at(jq1, jp + 1);
        return (1 - fq) * ((1 - fp) * v00 + fp * v01) + fq * ((1 - fp) * v10 + fp * v11);
    }

    // Catmull-Rom in both axes; q wraps, p clamps its stencil at the ends.
    static double cr(double vm, double v0, double v1, double v2, double t) {
        double a = -0.5 * vm + 1.5 * v0 - 1.5 * v1 + 0.5 * v2;
        double b = vm - 2.5 * v0 + 2.0 * v1 - 0.5 * v2;
        double c = 0.5 * (v1 - vm);
        return ((a * t + b) * t + c) * t + v0;
    }

    double bicubic(double q, double p) const {
        auto [jq, fq] = qgrid_.locate(q);
        auto [jp, fp] = pgrid_.locate(p);
        int np = pgrid_.n_nodes();
        double col[4];
        for (int dqi = -1; dqi <= 2; ++dqi) {
            int iq = qgrid_.wrap(jq + dqi);
            int m = std::clamp(jp - 1, 0, np - 1), z = jp, o = std::min(jp + 1, np - 1),
                w = std::clamp(jp + 2, 0, np - 1);
            col[dqi + 1] = cr(at(iq, m), at(iq, z), at(iq, o), at(iq, w), fp);
        }
        return cr(col[0], col[1], col[2], col[3], fq);
    }

    TorusGrid qgrid_;
    MomentumGrid pgrid_;
    std::vector<double> values_;
    Closure closure_;
    Interp interp_;
    FlagThresholds thresholds_;
    bool is_p_only_ = false;
    bool is_convex_in_p_ = false;
    bool is_compactly_supported_ = false;
    std::optional<double> truncation_radius_;
};

/// Sample an analytic H(q,p) on the given grids.  The closure must be
/// 1-periodic in q (checked by sampling) and finite on the domain.
inline HamiltonianField sample_hamiltonian(const HamiltonianField::Closure& expr,
                                           TorusGrid qgrid, MomentumGrid pgrid,
                                           Interp interp = Interp::Bilinear) {
    double scale = 1.0;
    for (double q : {0.0, 0.3, 0.7})
        for (int ip : {0, pgrid.n_nodes() / 2, pgrid.n_nodes() - 1}) {
            double p = pgrid.node(ip);
            double a = expr(q, p), b = expr(q + 1.0, p);
            if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidField("non-finite sample");
            scale = std::max(scale, std::abs(a));
            if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a)))
                throw NonPeriodic("closure is not 1-periodic in q");
        }
    std::vector<double> vals(static_cast<size_t>(qgrid.n_nodes()) * pgrid.n_nodes());
    for (int iq = 0; iq < qgrid.n_nodes(); ++iq)
        for (int ip = 0; ip < pgrid.n_nodes(); ++ip) {
            double v = expr(qgrid.node(iq), pgrid.node(ip));
            if (!std::isfinite(v)) throw InvalidField("non-finite sample");
            vals[iq * pgrid.n_nodes() + ip] = v;
        }
    return HamiltonianField(qgrid, pgrid, std::move(vals), expr, interp);
}

/// C^2 plateau cutoff: 1 on [-A,A], 0 outside [-2A,2A], quintic in between.
inline double plateau_cutoff(double p, double A) {
    double s = (std::abs(p) - A) / A;
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    double u = s * s * s * (10 + s * (-15 + 6 * s));
    return 1.0 - u;
}

/// Multiply H by the plateau cutoff in |p|; the result is compactly
/// supported and equals H exactly for |p| <= A.  Applying the same radius
/// twice returns the input unchanged.
inline HamiltonianField truncate_coercive(const HamiltonianField& H, double A) {
    if (A <= 0) throw DomainTooSmall("cutoff radius must be positive");
    const auto& pg = H.pgrid();
    if (-2 * A < pg.p_min() || 2 * A > pg.p_max())
        throw DomainTooSmall("[-2A,2A] exceeds the momentum grid");
    if (H.truncation_radius() && std::abs(*H.truncation_radius() - A) < 1e-15) return H;

    if (!H.is_p_only()) {
        // coercivity probe on the outer rows: the q-minimum must not decay outward
        int np = pg.n_nodes();
        auto row_min = [&](int ip) {
            double m = std::numeric_limits<double>::infinity();
            for (int iq = 0; iq < H.qgrid().n_nodes(); ++iq) m = std::min(m, H.at(iq, ip));
            return m;
        };
        int band = std::max(2, np / 8);
        for (int ip = np - band; ip + 1 < np; ++ip)
            if (row_min(ip + 1) < row_min(ip) - 1e-9)
                throw InvalidField("field is not coercive in p");
        for (int ip = band; ip >= 1; --ip)
            if (row_min(ip - 1) < row_min(ip) - 1e-9)
                throw InvalidField("field is not coercive in p");
    }

    std::vector<double> vals(static_cast<size_t>(H.qgrid().n_nodes()) * pg.n_nodes());
    for (int iq = 0; iq < H.qgrid().n_nodes(); ++iq)
        for (int ip = 0; ip < pg.n_nodes(); ++ip)
            vals[iq * pg.n_nodes() + ip] = plateau_cutoff(pg.node(ip), A) * H.at(iq, ip);
    HamiltonianField::Closure cl;
    if (H.has_closure()) {
        auto inner = H.closure();
        cl = [inner, A](double q, double p) { return plateau_cutoff(p, A) * inner(q, p); };
    }
    HamiltonianField out(H.qgrid(), pg, std::move(vals), std::move(cl), H.interp());
    out.set_truncation_radius(A);
    return out;
}

/// A 1-periodic C^2 function together with its derivative.
struct PeriodicFunction {
    std::function<double(double)> f;
    std::function<double(double)> df;

    static PeriodicFunction from(std::function<double(double)> fn, double h = 1e-6) {
        auto d = [fn, h](double q) { return (fn(q + h) - fn(q - h)) / (2 * h); };
        return {std::move(fn), d};
    }
};

/// Resample H under the vertical shear (q,p) -> (q, p + f'(q)), which is the
/// time-one map of the Hamiltonian f(q).
inline HamiltonianField shear_conjugate(const HamiltonianField& H, const PeriodicFunction& f) {
    const auto& pg = H.pgrid();
    const auto& qg = H.qgrid();
    auto eval = [&](double q, double p) -> double {
        double ps = p + f.df(q);
        if (H.has_closure()) return H.closure()(wrap_unit(q), ps);
        if (!pg.contains(ps)) {
            if (H.is_compactly_supported()) return 0.0;
            throw RangeExceeded("sheared momentum leaves the grid");
        }
        return H.value(q, ps);
    };
    std::vector<double> vals(static_cast<size_t>(qg.n_nodes()) * pg.n_nodes());
    for (int iq = 0; iq < qg.n_nodes(); ++iq)
        for (int ip = 0; ip < pg.n_nodes(); ++ip)
            vals[iq * pg.n_nodes() + ip] = eval(qg.node(iq), pg.node(ip));
    HamiltonianField::Closure cl;
    if (H.has_closure()) {
        auto inner = H.closure();
        auto df = f.df;
        cl = [inner, df](double q, double p) { return inner(wrap_unit(q), p + df(q)); };
    }
    return HamiltonianField(qg, pg, std::move(vals), std::move(cl), H.interp());
}

/// H(t,q,p), 1-periodic in t, stored as equispaced time slices over [0,T).
class TimeDependentField {
public:
    TimeDependentField(std::vector<HamiltonianField> slices, double period)
        : slices_(std::move(slices)), period_(period) {
        if (slices_.size() < 8)
            throw InvalidField("time-dependent field needs at least 8 slices");
        if (period_ <= 0) throw InvalidField("period must be positive");
    }

    const std::vector<HamiltonianField>& slices() const { return slices_; }
    double period() const { return period_; }

    double value(double t, double q, double p) const {
        double s = wrap_unit(t / period_) * slices_.size();
        int j = static_cast<int>(std::floor(s));
        if (j >= static_cast<int>(slices_.size())) j = 0;
        int j1 = (j + 1) % slices_.size();
        double f = s - j;
        return (1 - f) * slices_[j](q, p) + f * slices_[j1](q, p);
    }

private:
    std::vector<HamiltonianField> slices_;
    double period_;
};

} // namespace effham
