#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "effham/cubical.hpp"
#include "effham/field.hpp"
#include "effham/weakkam.hpp"

namespace effham {

/// One-step generating function S(Q,p) = -tau H(Q,p) of the symplectic Euler
/// map: the generated map sends (Q + dS/dp, p) to (Q, p + dS/dQ) and agrees
/// with the time-tau flow up to O(tau^2) per step.  S vanishes wherever H
/// does, which pins the additive normalization.
class OneStepGF {
public:
    OneStepGF(std::shared_ptr<const HamiltonianField> H, double tau)
        : H_(std::move(H)), tau_(tau) {
        if (tau <= 0) throw StepTooLarge("tau must be positive");
        // solvability of Q + dS/dp(Q,p) = q needs tau |H_qp| < 1; the q-row
        // of the Hessian is the near-identity scale (p-only fields are exact
        // at any step)
        if (tau_ * H_->sup_hessian_q() >= 0.5)
            throw StepTooLarge("tau * sup Hessian must stay below 0.5");
        error_bound_ = tau_ * tau_ * H_->sup_hessian() * std::max(1.0, H_->sup_dp() + H_->sup_dq());
    }

    const HamiltonianField& field() const { return *H_; }
    std::shared_ptr<const HamiltonianField> field_ptr() const { return H_; }
    double tau() const { return tau_; }
    double error_bound() const { return error_bound_; }

    /// H evaluated with q wrapped and p clamped to the grid (fields used
    /// here are compactly supported or carry closures, so clamping is the
    /// constant extension).
    double Heval(double Q, double p) const {
        const auto& H = *H_;
        if (H.has_closure()) return H.closure()(wrap_unit(Q), p);
        double pc = std::clamp(p, H.pgrid().p_min(), H.pgrid().p_max());
        return H.value(Q, pc);
    }

    double S(double Q, double p) const { return -tau_ * Heval(Q, p); }
    double S_Q(double Q, double p, double h = 1e-6) const {
        return (S(Q + h, p) - S(Q - h, p)) / (2 * h);
    }
    double S_p(double Q, double p, double h = 1e-6) const {
        return (S(Q, p + h) - S(Q, p - h)) / (2 * h);
    }

    /// Evaluate the generated map at (q,p) by solving Q = q - dS/dp(Q,p).
    std::pair<double, double> generated_map(double q, double p) const {
        double Q = q;
        for (int it = 0; it < 100; ++it) {
            double next = q - S_p(Q, p);
            double move = std::abs(next - Q);
            Q = next;
            if (move < 1e-13) break;
        }
        return {Q, p + S_Q(Q, p)};
    }

private:
    std::shared_ptr<const HamiltonianField> H_;
    double tau_;
    double error_bound_;
};

inline OneStepGF one_step_gf(const HamiltonianField& H, double tau) {
    return OneStepGF(std::make_shared<HamiltonianField>(H), tau);
}

/// Chekanov composite of two generating functions:
/// S(q1,p2;q2,p1) = S1(q1,p1) + S2(q2,p2) + <p1-p2, q1-q2>.
struct ComposedGF {
    const OneStepGF* S1;
    const OneStepGF* S2;

    double eval(double q1, double p2, double q2, double p1) const {
        return S1->S(q1, p1) + S2->S(q2, p2) + (p1 - p2) * (q1 - q2);
    }

    /// Gradient in the order (q1, p2, q2, p1).
    std::array<double, 4> grad(double q1, double p2, double q2, double p1) const {
        return {S1->S_Q(q1, p1) + (p1 - p2),
                S2->S_p(q2, p2) - (q1 - q2),
                S2->S_Q(q2, p2) - (p1 - p2),
                S1->S_p(q1, p1) + (q1 - q2)};
    }
};

inline ComposedGF compose_gf(const OneStepGF& a, const OneStepGF& b) {
    if (a.field().qgrid().n_nodes() != b.field().qgrid().n_nodes() ||
        a.field().pgrid().n_nodes() != b.field().pgrid().n_nodes())
        throw GridMismatch("composed generating functions must share grids");
    return ComposedGF{&a, &b};
}

/// Options for turning a discrete-action slice into a cubical complex.
struct SliceOptions {
    int x_nodes = 24;
    int fiber_nodes = 11;         // per fiber axis, forced odd
    double box_safety = 1.0;      // multiplies the fiber box radius
    bool allow_reduction = true;  // exact concave elimination when convex in p
    int max_box_growth = 5;
};

/// The k-fold discrete action
///   F_k(x,y;xi) = s Sum_j S(c q_j, p_j) + Sum_j <p_j - p_{j+1}, q_j - q_{j+1}>
/// with x = q_1, y = p_k and fiber xi = (p_1, q_2, p_2, ..., q_{k-1}, p_{k-1}, q_k).
/// The rescaled form (s = 1/k, c = k) generates the rescaling-conjugated
/// k-th iterate whose per-momentum min-max values approach the homogenized
/// Hamiltonian; the unrescaled form (s = 1, c = 1) generates the iterate
/// itself.  Min-max values are computed on -F, whose fiber quadratic part
/// splits into explicit negative and positive axes.
class DiscreteAction {
public:
    DiscreteAction(OneStepGF step, int k, bool rescaled)
        : step_(std::move(step)), k_(k), rescaled_(rescaled) {
        if (k < 1) throw InvalidField("k must be >= 1");
    }

    int k() const { return k_; }
    bool rescaled() const { return rescaled_; }
    const OneStepGF& step() const { return step_; }
    int fiber_dim() const { return 2 * (k_ - 1); }
    double sum_scale() const { return rescaled_ ? 1.0 / k_ : 1.0; }
    double coord_scale() const { return rescaled_ ? static_cast<double>(k_) : 1.0; }

    /// Time scale dividing raw min-max values to land in Hamiltonian units.
    double invariant_time_scale() const { return rescaled_ ? step_.tau() : k_ * step_.tau(); }

    /// F_k(x, y; xi) with the fiber in the listed order.
    double eval(double x, double y, std::span<const double> xi) const {
        auto [q, p] = unpack(x, y, xi);
        double s = sum_scale(), c = coord_scale();
        double v = 0;
        for (int j = 0; j < k_; ++j) v += s * step_.S(c * q[j], p[j]);
        for (int j = 0; j + 1 < k_; ++j) v += (p[j] - p[j + 1]) * (q[j] - q[j + 1]);
        return v;
    }

    /// Analytic gradient: (dF/dx, dF/dy, dF/dxi...).
    std::vector<double> grad(double x, double y, std::span<const double> xi) const {
        auto [q, p] = unpack(x, y, xi);
        double s = sum_scale(), c = coord_scale();
        std::vector<double> dq(k_), dp(k_);
        for (int j = 0; j < k_; ++j) {
            dq[j] = s * c * step_.S_Q(c * q[j], p[j]);
            dp[j] = s * step_.S_p(c * q[j], p[j]);
        }
        for (int j = 0; j + 1 < k_; ++j) {
            double dq_diff = q[j] - q[j + 1], dp_diff = p[j] - p[j + 1];
            dq[j] += dp_diff;
            dq[j + 1] -= dp_diff;
            dp[j] += dq_diff;
            dp[j + 1] -= dq_diff;
        }
        std::vector<double> out;
        out.reserve(2 + fiber_dim());
        out.push_back(dq[0]);
        out.push_back(dp[k_ - 1]);
        if (k_ > 1) {
            out.push_back(dp[0]);
            for (int j = 1; j + 1 < k_; ++j) {
                out.push_back(dq[j]);
                out.push_back(dp[j]);
            }
            out.push_back(dq[k_ - 1]);
        }
        return out;
    }

    /// Fiber box radius containing all fiber critical points: momenta drift
    /// by at most k tau sup|H_q| and positions by k tau sup|H_p| along
    /// critical configurations, and the rotated axes mix the two; the box is
    /// padded so the negative end clears the central values.
    double fiber_box_radius(double safety = 1.0) const {
        const auto& H = step_.field();
        double tau = step_.tau();
        double w_bound = k_ * tau * H.sup_dq();
        double z_bound = k_ * tau * H.sup_dp();
        double grad = (w_bound + z_bound) / std::sqrt(2.0);
        double osc = 2.0 * tau * H.max_abs() * (rescaled_ ? 1.0 : k_);
        double r = std::max(1.4 * grad, std::sqrt(2.5 * osc + 1e-6));
        return safety * std::max(r, 0.05);
    }

    bool p_only() const { return step_.field().is_p_only(); }
    bool convex_reducible() const { return step_.field().is_convex_in_p(); }

    /// -F on the x-circle for p-only fields: the fiber pairs are hyperbolic
    /// and collapse exactly, leaving a slice constant in x.
    SublevelComplex slice_p_only(double y, const SliceOptions& opt) const {
        double v = -sum_scale() * k_ * step_.S(0.0, y);
        std::vector<Axis> axes{{std::max(4, opt.x_nodes), true, false, 0.0, 1.0}};
        return SublevelComplex::from_function(axes, [v](std::span<const double>) { return v; });
    }

    /// Generic slice: -F over (x, alpha, beta), where each successive-pair
    /// coupling <w_j, z_j> is rotated to (alpha_j^2 - beta_j^2)/2.  The
    /// alpha axes are the negative directions of -F.
    SublevelComplex slice_generic(double y, const SliceOptions& opt) const {
        int m = k_ - 1;
        double R = fiber_box_radius(opt.box_safety);
        double s = sum_scale(), c = coord_scale();
        auto value = [this, y, s, c, m](std::span<const double> u) {
            constexpr double inv_sqrt2 = 0.7071067811865476;
            double G = 0;
            double w[8], z[8], p[8];
            for (int j = 0; j < m; ++j) {
                double a = u[1 + j], b = u[1 + m + j];
                w[j] = (a + b) * inv_sqrt2;
                z[j] = (a - b) * inv_sqrt2;
                G -= w[j] * z[j];
            }
            p[k_ - 1] = y;
            for (int j = m - 1; j >= 0; --j) p[j] = p[j + 1] + w[j];
            double q = u[0];
            for (int j = 0; j < k_; ++j) {
                G -= s * step_.S(c * q, p[j]);
                if (j < m) q -= z[j];
            }
            return G;
        };
        std::vector<Axis> axes;
        axes.push_back({opt.x_nodes, true, false, 0.0, 1.0});
        int n = opt.fiber_nodes | 1;
        for (int j = 0; j < m; ++j) axes.push_back({n, false, true, -R, R});
        for (int j = 0; j < m; ++j) axes.push_back({n, false, false, -R, R});
        return build_with_growth(axes, value, opt);
    }

    /// Convex-in-p fields only: the momenta are eliminated exactly by the
    /// fiberwise concave maximization (a Legendre transform per step),
    /// leaving an action over (x, zeta_1..zeta_{k-1}) in the successive
    /// position differences zeta_j = q_j - q_{j+1}.  Every remaining fiber
    /// direction is negative for -F.
    SublevelComplex slice_reduced(double y, const SliceOptions& opt,
                                  const LagrangianTable& L) const {
        if (!convex_reducible()) throw NotConvex("reduced slice needs a convex-in-p field");
        int m = k_ - 1;
        double tau = step_.tau();
        double s = sum_scale(), c = coord_scale();
        double st = s * tau;
        double vel = std::max(step_.field().sup_dp(), 0.5);
        double R = opt.box_safety * 2.0 * tau * vel * (rescaled_ ? 1.0 : k_);
        auto value = [this, y, s, c, m, st, &L](std::span<const double> u) {
            double G = 0;
            double q = u[0];
            double prev = 0;
            for (int j = 0; j < m; ++j) {
                double zeta = u[1 + j];
                G -= st * L.value(wrap_unit(c * q), (zeta - prev) / st);
                q -= zeta;
                prev = zeta;
            }
            G += s * (-step_.S(c * q, y));  // s * tau * H(c q_k, y)
            G += y * prev;
            return G;
        };
        std::vector<Axis> axes;
        axes.push_back({opt.x_nodes, true, false, 0.0, 1.0});
        int n = opt.fiber_nodes | 1;
        for (int j = 0; j < m; ++j) axes.push_back({n, false, true, -R, R});
        return build_with_growth(axes, value, opt);
    }

    /// Dispatch on structure: p-only exact, convex reduced, generic.
    SublevelComplex slice(double y, const SliceOptions& opt,
                          const LagrangianTable* L = nullptr) const {
        if (k_ == 1) {
            double s = sum_scale(), c = coord_scale();
            auto value = [this, y, s, c](std::span<const double> u) {
                return -s * step_.S(c * u[0], y);
            };
            std::vector<Axis> axes{{opt.x_nodes, true, false, 0.0, 1.0}};
            return SublevelComplex::from_function(axes, value);
        }
        if (p_only()) return slice_p_only(y, opt);
        if (opt.allow_reduction && convex_reducible() && L) return slice_reduced(y, opt, *L);
        if (fiber_dim() > 6) throw ResolutionBudget("fiber dimension exceeds the v1 envelope");
        SliceOptions o = opt;
        if (k_ >= 4) o.fiber_nodes = std::min(o.fiber_nodes, 5);
        return slice_generic(y, o);
    }

private:
    template <class F>
    SublevelComplex build_with_growth(std::vector<Axis> axes, const F& value,
                                      const SliceOptions& opt) const {
        for (int attempt = 0;; ++attempt) {
            SublevelComplex cx = SublevelComplex::from_function(
                axes, [&](std::span<const double> u) { return value(u); });
            if (negative_end_clears(cx) || attempt >= opt.max_box_growth) return cx;
            for (auto& a : axes)
                if (a.negative) {
                    a.lo *= 1.5;
                    a.hi *= 1.5;
                }
        }
    }

    /// The negative-end faces must sit below the central plateau.
    static bool negative_end_clears(const SublevelComplex& cx) {
        const auto& axes = cx.axes();
        int d = cx.dim();
        std::vector<int> center(d);
        for (int i = 0; i < d; ++i) center[i] = 2 * ((axes[i].n - 1) / 2);
        double center_val = cx.cell_value(cx.make_cell(center));
        bool any = false;
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i) {
            if (!axes[i].negative) continue;
            any = true;
            for (int side : {0, axes[i].positions() - 1}) {
                std::vector<int> p = center;
                p[i] = side;
                worst = std::max(worst, cx.cell_value(cx.make_cell(p)));
            }
        }
        return !any || worst < center_val - 1e-12;
    }

    std::pair<std::vector<double>, std::vector<double>> unpack(double x, double y,
                                                               std::span<const double> xi) const {
        if (static_cast<int>(xi.size()) != fiber_dim())
            throw InvalidField("fiber coordinate dimension mismatch");
        std::vector<double> q(k_), p(k_);
        q[0] = x;
        p[k_ - 1] = y;
        if (k_ > 1) {
            p[0] = xi[0];
            for (int j = 1; j + 1 < k_; ++j) {
                q[j] = xi[1 + 2 * (j - 1)];
                p[j] = xi[2 + 2 * (j - 1)];
            }
            q[k_ - 1] = xi[xi.size() - 1];
        }
        return {q, p};
    }

    OneStepGF step_;
    int k_;
    bool rescaled_;
};

inline DiscreteAction build_Fk(const OneStepGF& step, int k, bool rescaled = true) {
    return DiscreteAction(step, k, rescaled);
}

} // namespace effham
