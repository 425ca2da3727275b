#include <doctest.h>

#include <cmath>
#include <random>

#include "effham/flow.hpp"
#include "effham/genfun.hpp"
#include "effham/presets.hpp"

using namespace effham;

TEST_CASE("one-step generating function: p-only is the exact flow") {
    auto H = sample_hamiltonian([](double, double p) { return std::cos(p); }, TorusGrid(32),
                                MomentumGrid(-3, 3, 129));
    auto S = one_step_gf(H, 0.3);
    CHECK(S.S(0.2, 1.0) == doctest::Approx(-0.3 * std::cos(1.0)).epsilon(1e-12));
    auto [Q, P] = S.generated_map(0.1, 1.0);
    CHECK(Q == doctest::Approx(0.1 - 0.3 * std::sin(1.0)).epsilon(1e-8));
    CHECK(P == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("one-step generating function: zero field gives the identity") {
    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-1, 1, 9));
    auto S = one_step_gf(Z, 0.5);
    auto [Q, P] = S.generated_map(0.3, 0.2);
    CHECK(Q == doctest::Approx(0.3));
    CHECK(P == doctest::Approx(0.2));
}

TEST_CASE("one-step near-identity precondition") {
    auto H = presets::pendulum();
    CHECK_THROWS_AS(one_step_gf(H, 0.1), StepTooLarge);  // 0.1 * 2 pi^2 > 0.5
    CHECK_NOTHROW(one_step_gf(H, 0.02));
}

TEST_CASE("generated map tracks the integrator to O(tau^2)") {
    // gentle amplitude keeps the error constant (~ sup Hessian) below 5
    auto H = presets::pendulum(0.25);
    double tau = 0.05;
    auto S = one_step_gf(H, tau);
    double worst = 0;
    for (double q : {0.0, 0.3, 0.62})
        for (double p : {-1.5, -0.2, 0.8, 2.0}) {
            auto [Q, P] = S.generated_map(q, p);
            auto traj = integrate(H, PhasePoint::at(q, p), tau, tau / 50);
            worst = std::max({worst, std::abs(Q - traj.back().lift_q),
                              std::abs(P - traj.back().p)});
        }
    CHECK(worst <= 5 * tau * tau);

    // at unit amplitude the constant is the Hessian bound
    auto H1 = presets::pendulum();
    double tau1 = 0.02;
    auto S1 = one_step_gf(H1, tau1);
    double worst1 = 0;
    for (double p : {-1.5, 0.8}) {
        auto [Q, P] = S1.generated_map(0.3, p);
        auto traj = integrate(H1, PhasePoint::at(0.3, p), tau1, tau1 / 50);
        worst1 = std::max({worst1, std::abs(Q - traj.back().lift_q), std::abs(P - traj.back().p)});
    }
    CHECK(worst1 <= (H1.sup_hessian() + 5) * tau1 * tau1);
}

TEST_CASE("Chekanov composition: identity and p-only flow addition") {
    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-2, 2, 17));
    auto SZ = one_step_gf(Z, 0.3);
    auto CZ = compose_gf(SZ, SZ);
    // critical fiber points q2 = q1, p1 = p2 with value 0
    CHECK(CZ.eval(0.4, 0.7, 0.4, 0.7) == 0.0);
    auto gz = CZ.grad(0.4, 0.7, 0.4, 0.7);
    for (double v : gz) CHECK(std::abs(v) < 1e-12);

    auto h = sample_hamiltonian([](double, double p) { return 0.5 * p * p; }, TorusGrid(16),
                                MomentumGrid(-2, 2, 65));
    double tau = 0.1;
    auto S = one_step_gf(h, tau);
    auto C = compose_gf(S, S);
    // for p-only steps the fiber-critical set has p1 = p2 and arbitrary q2;
    // there the coupling vanishes and the value is S1 + S2 = -2 tau h(p2)
    double q1 = 0.2, p2 = 0.7;
    auto gr = C.grad(q1, p2, 0.55, p2);
    CHECK(std::abs(gr[2]) < 1e-9);  // d/dq2 vanishes identically in q2
    CHECK(C.eval(q1, p2, 0.55, p2) == doctest::Approx(-2 * tau * 0.5 * p2 * p2).epsilon(1e-12));
}

TEST_CASE("composition gradient matches finite differences at random points") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto C = compose_gf(S, S);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uq(0, 1), up(-1.5, 1.5);
    double h = 1e-5;
    for (int rep = 0; rep < 100; ++rep) {
        double q1 = uq(rng), p2 = up(rng), q2 = uq(rng), p1 = up(rng);
        auto g = C.grad(q1, p2, q2, p1);
        double fd0 = (C.eval(q1 + h, p2, q2, p1) - C.eval(q1 - h, p2, q2, p1)) / (2 * h);
        double fd1 = (C.eval(q1, p2 + h, q2, p1) - C.eval(q1, p2 - h, q2, p1)) / (2 * h);
        double fd2 = (C.eval(q1, p2, q2 + h, p1) - C.eval(q1, p2, q2 - h, p1)) / (2 * h);
        double fd3 = (C.eval(q1, p2, q2, p1 + h) - C.eval(q1, p2, q2, p1 - h)) / (2 * h);
        CHECK(std::abs(g[0] - fd0) < 1e-6);
        CHECK(std::abs(g[1] - fd1) < 1e-6);
        CHECK(std::abs(g[2] - fd2) < 1e-6);
        CHECK(std::abs(g[3] - fd3) < 1e-6);
    }
    CHECK_THROWS_AS(
        compose_gf(S, one_step_gf(presets::free_motion(presets::GridChoice{32, 65, -3, 3}), 0.02)),
        GridMismatch);
}

TEST_CASE("discrete action: k = 1 is the one-step function itself") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F1 = build_Fk(S, 1, /*rescaled=*/false);
    CHECK(F1.fiber_dim() == 0);
    CHECK(F1.eval(0.3, 0.8, {}) == doctest::Approx(S.S(0.3, 0.8)).epsilon(1e-12));
}

TEST_CASE("discrete action gradient matches finite differences") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> uq(0, 1), up(-1.2, 1.2);
    for (int k : {2, 3, 4}) {
        auto F = build_Fk(S, k);
        for (int rep = 0; rep < 34; ++rep) {
            double x = uq(rng), y = up(rng);
            std::vector<double> xi(F.fiber_dim());
            for (size_t i = 0; i < xi.size(); ++i) xi[i] = (i % 2 ? uq(rng) : up(rng)) * 0.4;
            auto g = F.grad(x, y, xi);
            double h = 1e-5;
            auto at = [&](double xx, double yy, const std::vector<double>& zz) {
                return F.eval(xx, yy, zz);
            };
            CHECK(std::abs(g[0] - (at(x + h, y, xi) - at(x - h, y, xi)) / (2 * h)) < 1e-6);
            CHECK(std::abs(g[1] - (at(x, y + h, xi) - at(x, y - h, xi)) / (2 * h)) < 1e-6);
            for (size_t i = 0; i < xi.size(); ++i) {
                auto xp = xi, xm = xi;
                xp[i] += h;
                xm[i] -= h;
                CHECK(std::abs(g[2 + i] - (at(x, y, xp) - at(x, y, xm)) / (2 * h)) < 1e-6);
            }
        }
    }
}

TEST_CASE("p-only fiber reduction: F_k collapses to -h(y) per unit time") {
    auto H = sample_hamiltonian([](double, double p) { return std::exp(-p * p); }, TorusGrid(16),
                                MomentumGrid(-3, 3, 129));
    double tau = 0.25;
    auto S = one_step_gf(H, tau);
    for (int k : {1, 2, 3, 4}) {
        auto F = build_Fk(S, k);
        // stationarity forces every momentum to y and the coupling telescopes
        double y = 0.6;
        std::vector<double> xi(F.fiber_dim());
        if (k > 1) {
            xi[0] = y;
            for (int j = 1; j + 1 < k; ++j) {
                xi[1 + 2 * (j - 1)] = 0.3;  // positions are free on the critical set
                xi[2 + 2 * (j - 1)] = y;
            }
            xi[xi.size() - 1] = 0.3;
        }
        double expected = -tau * std::exp(-y * y);
        CHECK(F.eval(0.3, y, xi) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(F.eval(0.3, y, xi) / F.invariant_time_scale() ==
              doctest::Approx(-std::exp(-y * y)).epsilon(1e-12));
    }
}

TEST_CASE("F_k minus its coupling stays bounded by the step budget") {
    auto H = presets::pendulum();
    double tau = 0.02;
    auto S = one_step_gf(H, tau);
    auto F = build_Fk(S, 3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uq(0, 1), up(-1, 1), uf(-0.5, 0.5);
    double bound = tau * H.max_abs();  // (1/k) sum of k step values
    for (int rep = 0; rep < 50; ++rep) {
        double x = uq(rng), y = up(rng);
        std::vector<double> xi(F.fiber_dim());
        for (auto& v : xi) v = uf(rng);
        double q1 = x, p3 = y;
        double p1 = xi[0], q2 = xi[1], p2 = xi[2], q3 = xi[3];
        double coupling = (p1 - p2) * (q1 - q2) + (p2 - p3) * (q2 - q3);
        CHECK(std::abs(F.eval(x, y, xi) - coupling) <= bound + 1e-12);
    }
}

TEST_CASE("fiber box radius bounds critical points and shrinks with the field") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F = build_Fk(S, 2);
    double R = F.fiber_box_radius();
    CHECK(R > 0);
    double C = std::sqrt(2.0) * 0.02 * std::max(H.sup_dp(), H.sup_dq());
    CHECK(R >= 2 * C - 1e-12);

    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-1, 1, 9));
    auto FZ = build_Fk(one_step_gf(Z, 0.5), 3);
    CHECK(FZ.fiber_box_radius() <= 0.06);  // collapses to the floor
}
