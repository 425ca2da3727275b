#include <doctest.h>

#include <cmath>

#include "effham/minmax.hpp"
#include "effham/presets.hpp"
#include "effham/weakkam.hpp"

using namespace effham;

TEST_CASE("p-only slices give (h(y), h(y), 0) exactly for every k") {
    auto H = presets::bump_in_p();
    auto S = one_step_gf(H, 0.25);
    for (int k : {1, 2, 3, 4}) {
        auto F = build_Fk(S, k);
        for (double y : {0.0, 0.5, 2.5}) {
            auto si = spectral_invariants(F, y);
            double h = presets::bump(y);
            CHECK(si.c_minus == doctest::Approx(h).epsilon(1e-12));
            CHECK(si.c_plus == doctest::Approx(h).epsilon(1e-12));
            CHECK(si.gamma() == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("zero Hamiltonian: all invariants vanish") {
    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-1, 1, 9));
    auto F = build_Fk(one_step_gf(Z, 0.5), 3);
    auto si = spectral_invariants(F, 0.3);
    CHECK(si.c_minus == 0.0);
    CHECK(si.c_plus == 0.0);
}

TEST_CASE("k = 1 pendulum slice: min and max over the circle") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F = build_Fk(S, 1);
    SliceOptions opt;
    opt.x_nodes = 32;  // even grid puts both extrema of sin^2 on nodes
    for (double y : {0.0, 1.0}) {
        auto si = spectral_invariants(F, y, opt);
        CHECK(si.c_minus == doctest::Approx(0.5 * y * y - 1.0).epsilon(1e-10));
        CHECK(si.c_plus == doctest::Approx(0.5 * y * y).epsilon(1e-10));
    }
}

TEST_CASE("pendulum k = 2 at y = 0: positive gamma, values inside the range") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F = build_Fk(S, 2);
    auto L = legendre(H);
    SliceOptions opt;
    opt.x_nodes = 33;
    opt.fiber_nodes = 33;
    auto si = spectral_invariants(F, 0.0, opt, &L);
    CHECK(si.gamma() > 0.1);
    CHECK(si.c_minus >= -1.0 - 1e-9);  // min H
    CHECK(si.c_plus <= 1.125 + 1e-9);  // max H over |p| <= 1.5
}

TEST_CASE("reduced and generic slice pipelines agree") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto L = legendre(H);
    auto F = build_Fk(S, 2);
    SliceOptions reduced;
    reduced.x_nodes = 33;
    reduced.fiber_nodes = 33;
    SliceOptions generic;
    generic.x_nodes = 17;
    generic.fiber_nodes = 11;
    generic.allow_reduction = false;
    for (double y : {0.0, 0.8, 1.5}) {
        auto a = spectral_invariants(F, y, reduced, &L);
        auto b = spectral_invariants(F, y, generic);
        CHECK(std::abs(a.c_minus - b.c_minus) < 0.03);
        CHECK(std::abs(a.c_plus - b.c_plus) < 0.03);
    }
}

TEST_CASE("doubling the fiber box does not move the values") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F = build_Fk(S, 2);
    SliceOptions a;
    a.x_nodes = 17;
    a.fiber_nodes = 11;
    a.allow_reduction = false;
    SliceOptions b = a;
    b.box_safety = 2.0;
    b.fiber_nodes = 21;  // keep comparable spacing over the doubled box
    for (double y : {0.0, 1.2}) {
        auto va = spectral_invariants(F, y, a);
        auto vb = spectral_invariants(F, y, b);
        CHECK(std::abs(va.c_plus - vb.c_plus) < 0.02);
        CHECK(std::abs(va.c_minus - vb.c_minus) < 0.02);
    }
}

TEST_CASE("hk curves: p-only projector and the pendulum trend") {
    MomentumGrid pg(-2, 2, 17);

    auto Hb = presets::bump_in_p();
    auto Fb = build_Fk(one_step_gf(Hb, 0.25), 3);
    auto cb = hk_curve(Fb, pg);
    for (int i = 0; i < pg.n_nodes(); ++i)
        CHECK(cb.h[i] == doctest::Approx(presets::bump(pg.node(i))).epsilon(1e-12));

    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    LevelsetOracle oracle(H);
    std::vector<double> ls;
    for (int i = 0; i < pg.n_nodes(); ++i) ls.push_back(oracle.value(pg.node(i)));
    SliceOptions opt;
    opt.x_nodes = 32;
    opt.fiber_nodes = 25;
    auto c1 = hk_curve(build_Fk(S, 1), pg, opt);
    auto c2 = hk_curve(build_Fk(S, 2), pg, opt);
    auto c3 = hk_curve(build_Fk(S, 3), pg, opt);
    CHECK(c2.sup_distance(ls) <= c1.sup_distance(ls) + 1e-9);
    CHECK(c3.sup_distance(ls) <= c2.sup_distance(ls) + 1e-9);

    double lip_bound = 1.1 * H.sup_dp();
    for (const auto* c : {&c1, &c2, &c3}) CHECK(c->lipschitz() <= lip_bound);
}

TEST_CASE("c_pm iterates: exact identities for p-only presets") {
    auto H = presets::bump_in_p();
    MomentumGrid pg(-3, 3, 25);  // the bump peak at p = 0 is a node
    auto seq = c_pm_iterates(H, 4, 0.25, pg);
    for (size_t i = 0; i < seq.ks.size(); ++i) {
        CHECK(seq.c_plus[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(seq.c_minus[i] == doctest::Approx(0.0).epsilon(1e-12));
    }

    auto Z = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                MomentumGrid(-1, 1, 9));
    auto zs = c_pm_iterates(Z, 3, 0.5, MomentumGrid(-1, 1, 9));
    for (double v : zs.c_plus) CHECK(v == 0.0);
    for (double v : zs.c_minus) CHECK(v == 0.0);
}

TEST_CASE("monotonicity transport: raising H raises both invariants") {
    auto H = presets::pendulum();
    auto S = one_step_gf(H, 0.02);
    auto F = build_Fk(S, 2);
    auto bump_q = [](double q) { return presets::bump(2 * (wrap_unit(q) - 0.5)); };
    auto H2 = sample_hamiltonian(
        [&H, bump_q](double q, double p) { return H.closure()(q, p) + 0.3 * bump_q(q); },
        H.qgrid(), H.pgrid());
    auto F2 = build_Fk(one_step_gf(H2, 0.02), 2);
    SliceOptions opt;
    opt.x_nodes = 17;
    opt.fiber_nodes = 11;
    opt.allow_reduction = false;
    for (double y : {0.0, 1.0}) {
        auto a = spectral_invariants(F, y, opt);
        auto b = spectral_invariants(F2, y, opt);
        CHECK(a.c_minus <= b.c_minus + 1e-12);
        CHECK(a.c_plus <= b.c_plus + 1e-12);
    }
}
