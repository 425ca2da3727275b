#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "effham/genfun.hpp"
#include "effham/persistence.hpp"

namespace effham {

/// Min-max critical values of one momentum slice, in Hamiltonian units.
struct SpectralInvariants {
    double c_minus = 0;
    double c_plus = 0;
    double gamma() const { return c_plus - c_minus; }
};

/// Build the slice at momentum y and read off the two distinguished birth
/// values, scaled by the time the generating function represents.
inline SpectralInvariants spectral_invariants(const DiscreteAction& F, double y,
                                              const SliceOptions& opt = {},
                                              const LagrangianTable* L = nullptr) {
    SublevelComplex cx = F.slice(y, opt, L);
    double scale = F.invariant_time_scale();
    double cm = c_value(cx, ClassKind::Unit) / scale;
    double cp = c_value(cx, ClassKind::Fundamental) / scale;
    return {cm, cp};
}

/// h_k over a momentum grid: the fundamental-class birth per slice, all
/// slices sharing one normalization (none is ever added per slice).
struct HkCurve {
    int k = 1;
    double tau = 0;
    bool rescaled = true;
    std::vector<double> p;
    std::vector<double> h;        // fundamental-class values
    std::vector<double> c_minus;  // unit-class values (optional, may be empty)

    double sup_distance(const std::vector<double>& other) const {
        double m = 0;
        for (size_t i = 0; i < h.size(); ++i) m = std::max(m, std::abs(h[i] - other[i]));
        return m;
    }

    /// Largest discrete slope between adjacent momentum nodes.
    double lipschitz() const {
        double m = 0;
        for (size_t i = 0; i + 1 < h.size(); ++i)
            m = std::max(m, std::abs(h[i + 1] - h[i]) / (p[i + 1] - p[i]));
        return m;
    }
};

inline HkCurve hk_curve(const DiscreteAction& F, const MomentumGrid& pgrid,
                        const SliceOptions& opt = {}, bool with_c_minus = false) {
    HkCurve out;
    out.k = F.k();
    out.tau = F.step().tau();
    out.rescaled = F.rescaled();
    std::optional<LagrangianTable> L;
    if (F.convex_reducible() && opt.allow_reduction && !F.p_only())
        L = legendre(F.step().field());
    for (int i = 0; i < pgrid.n_nodes(); ++i) {
        double y = pgrid.node(i);
        SublevelComplex cx = F.slice(y, opt, L ? &*L : nullptr);
        double scale = F.invariant_time_scale();
        out.p.push_back(y);
        out.h.push_back(c_value(cx, ClassKind::Fundamental) / scale);
        if (with_c_minus) out.c_minus.push_back(c_value(cx, ClassKind::Unit) / scale);
    }
    return out;
}

/// The normalized invariants of the k-th iterates: entry k holds
/// c+-(phi^k) / (k tau), i.e. sup/inf over momenta of the slice values of
/// the unrescaled k-fold composition.
struct CpmSequence {
    std::vector<int> ks;
    std::vector<double> c_plus;   // per unit time
    std::vector<double> c_minus;  // per unit time
    double extrapolated_c_plus = 0;
    double extrapolated_c_minus = 0;
};

inline CpmSequence c_pm_iterates(const HamiltonianField& H, int k_max, double tau,
                                 const MomentumGrid& pgrid, const SliceOptions& opt = {}) {
    if (k_max < 1) throw InvalidField("k_max must be >= 1");
    OneStepGF step = one_step_gf(H, tau);
    std::optional<LagrangianTable> L;
    if (H.is_convex_in_p() && opt.allow_reduction && !H.is_p_only()) L = legendre(H);
    CpmSequence seq;
    for (int k = 1; k <= k_max; ++k) {
        if (2 * (k - 1) > 6) throw ResolutionBudget("fiber dimension exceeds the v1 envelope");
        DiscreteAction F = build_Fk(step, k, /*rescaled=*/false);
        double cp = -std::numeric_limits<double>::infinity();
        double cm = std::numeric_limits<double>::infinity();
        for (int i = 0; i < pgrid.n_nodes(); ++i) {
            double y = pgrid.node(i);
            SublevelComplex cx = F.slice(y, opt, L ? &*L : nullptr);
            cp = std::max(cp, c_value(cx, ClassKind::Fundamental));
            cm = std::min(cm, c_value(cx, ClassKind::Unit));
        }
        seq.ks.push_back(k);
        seq.c_plus.push_back(cp / (k * tau));
        seq.c_minus.push_back(cm / (k * tau));
    }
    int n = static_cast<int>(seq.ks.size());
    if (n >= 2) {
        int K = seq.ks[n - 1], Km = seq.ks[n - 2];
        seq.extrapolated_c_plus = (K * seq.c_plus[n - 1] - Km * seq.c_plus[n - 2]) / (K - Km);
        seq.extrapolated_c_minus = (K * seq.c_minus[n - 1] - Km * seq.c_minus[n - 2]) / (K - Km);
    } else {
        seq.extrapolated_c_plus = seq.c_plus.back();
        seq.extrapolated_c_minus = seq.c_minus.back();
    }
    return seq;
}

} // namespace effham
