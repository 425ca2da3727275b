#include <doctest.h>

#include <cmath>
#include <random>

#include "effham/flow.hpp"
#include "effham/presets.hpp"

using namespace effham;

TEST_CASE("free motion translates the lift") {
    auto H = presets::free_motion();
    auto traj = integrate(H, PhasePoint::at(0.0, 1.0), 1.0, 1e-3);
    CHECK(traj.back().lift_q == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(traj.back().q == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(traj.back().p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero Hamiltonian freezes everything") {
    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-1, 1, 9));
    auto traj = integrate(Z, PhasePoint::at(0.37, 0.22), 2.0, 1e-2);
    CHECK(traj.back().lift_q == doctest::Approx(0.37));
    CHECK(traj.back().p == doctest::Approx(0.22));
}

TEST_CASE("pendulum energy is conserved by the symplectic step") {
    auto H = presets::pendulum();
    auto traj = integrate(H, PhasePoint::at(0.25, 0.0), 10.0, 1e-3);
    double drift = 0;
    for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));
    CHECK(drift < 1e-6);

    // halving the step controls the endpoint
    auto fine = integrate(H, PhasePoint::at(0.25, 0.0), 1.0, 5e-4);
    auto coarse = integrate(H, PhasePoint::at(0.25, 0.0), 1.0, 1e-3);
    CHECK(std::abs(fine.back().lift_q - coarse.back().lift_q) < 1e-6);

    auto one = integrate(H, PhasePoint::at(0.25, 0.0), 1.0, 1e-3);
    double d2 = 0;
    for (double e : one.energy) d2 = std::max(d2, std::abs(e - one.energy.front()));
    CHECK(d2 < 1e-8);
}

TEST_CASE("implicit midpoint handles nonseparable fields") {
    auto H = sample_hamiltonian(
        [](double q, double p) { return 0.5 * p * p + 0.1 * p * std::sin(2 * presets::pi * q); },
        TorusGrid(32), MomentumGrid(-3, 3, 65));
    auto traj = integrate(H, PhasePoint::at(0.1, 0.5), 2.0, 1e-3);
    double drift = 0;
    for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));
    CHECK(drift < 1e-6);
}

TEST_CASE("flow leaves the domain when momentum escapes") {
    auto H = sample_hamiltonian([](double q, double) { return std::cos(2 * presets::pi * q); },
                                TorusGrid(32), MomentumGrid(-0.05, 0.05, 11));
    CHECK_THROWS_AS(integrate(H, PhasePoint::at(0.2, 0.0), 2.0, 1e-2), OutOfDomain);
}

TEST_CASE("symplecticity of the time-one map at random points") {
    auto H = presets::pendulum();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uq(0, 1), up(-1.2, 1.2);
    for (int i = 0; i < 5; ++i) {
        double det = flow_jacobian_det(H, uq(rng), up(rng), 1.0);
        CHECK(std::abs(det - 1.0) < 1e-6);
    }
}

TEST_CASE("rescale conjugation is k-independent for p-only fields") {
    auto H = sample_hamiltonian([](double, double p) { return std::cos(p); }, TorusGrid(16),
                                MomentumGrid(-3, 3, 129));
    auto base = rescale_conjugate(H, 1, PhasePoint::at(0.2, 1.1), 1.0);
    for (int k : {2, 3, 5}) {
        auto zk = rescale_conjugate(H, k, PhasePoint::at(0.2, 1.1), 1.0);
        CHECK(std::abs(zk.lift_q - base.lift_q) < 1e-8);
        CHECK(std::abs(zk.p - base.p) < 1e-10);
    }
    // and equals the plain flow for k = 1
    auto direct = integrate(H, PhasePoint::at(0.2, 1.1), 1.0, 1e-3);
    CHECK(base.lift_q == doctest::Approx(direct.back().lift_q).epsilon(1e-12));
}

TEST_CASE("rescaled momentum drift obeys the gradient bound") {
    auto H = presets::pendulum();
    double sup_hq = H.sup_dq();
    auto z = rescale_conjugate(H, 4, PhasePoint::at(0.0, 1.5), 1.0);
    CHECK(std::abs(z.p - 1.5) <= sup_hq * 1.0 + 1e-6);
}

TEST_CASE("lift drift obeys the momentum Lipschitz bound") {
    auto H = presets::pendulum();
    double bound = H.sup_dp();
    for (double p0 : {0.3, 1.0}) {
        auto traj = integrate(H, PhasePoint::at(0.1, p0), 3.0, 1e-3);
        CHECK(std::abs(traj.back().lift_q - 0.1) <= bound * 3.0 + 1e-9);
    }
}

TEST_CASE("time averaging of periodic fields") {
    TorusGrid qg(32);
    MomentumGrid pg(-2, 2, 33);
    int m = 16;
    std::vector<HamiltonianField> zero_mean, pulsing;
    for (int j = 0; j < m; ++j) {
        double t = static_cast<double>(j) / m;
        zero_mean.push_back(sample_hamiltonian(
            [t](double q, double p) {
                return std::sin(2 * presets::pi * t) * (p + std::cos(2 * presets::pi * q));
            },
            qg, pg));
        pulsing.push_back(sample_hamiltonian(
            [t](double, double p) { return (1 + std::cos(2 * presets::pi * t)) * 0.5 * p * p; },
            qg, pg));
    }
    auto avg0 = time_average(TimeDependentField(zero_mean, 1.0));
    CHECK(avg0.max_abs() < 1e-12);

    auto avg1 = time_average(TimeDependentField(pulsing, 1.0));
    for (int ip = 0; ip < pg.n_nodes(); ip += 8) {
        double p = pg.node(ip);
        CHECK(avg1.at(0, ip) == doctest::Approx(0.5 * p * p).epsilon(1e-12));
    }

    auto H = presets::pendulum();
    std::vector<HamiltonianField> constant(8, H);
    auto avg2 = time_average(TimeDependentField(constant, 1.0));
    CHECK(avg2.at(3, 7) == doctest::Approx(H.at(3, 7)));
}
