// exploratory probe, not part of the suite
#include <chrono>
#include <cstdio>

#include "effham/hj.hpp"
#include "effham/homog.hpp"

using namespace effham;
using Clock = std::chrono::steady_clock;
static double secs(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main() {
    auto t0 = Clock::now();
    std::printf("== property suite\n");
    auto rep = check_properties();
    for (const auto& r : rep.results)
        std::printf("  %-22s slack=%10.3e budget=%10.3e %s\n", r.property.c_str(), r.slack,
                    r.budget, r.pass ? "PASS" : "FAIL");
    std::printf("  (%.1f s)\n", secs(t0));

    std::printf("== longtime slopes\n");
    t0 = Clock::now();
    presets::GridChoice g;
    g.nq = 256;
    auto free = presets::free_motion(g);
    auto pend = presets::pendulum(1.0, g);
    auto shifted = presets::shifted_free(0.3, g);
    auto cosf = [](double q) { return std::cos(2 * presets::pi * q); };
    auto zerof = [](double) { return 0.0; };
    std::printf("  free/cos: %.5f (want 0)\n", longtime_slope(free, cosf));
    std::printf("  pendulum/0: %.5f (want 0)\n", longtime_slope(pend, zerof));
    std::printf("  shifted/0: %.5f (want -0.3)\n", longtime_slope(shifted, zerof));
    std::printf("  (%.1f s)\n", secs(t0));

    std::printf("== oscillatory HJ experiment\n");
    t0 = Clock::now();
    auto f = [](double q) { return 0.1 * std::cos(2 * presets::pi * q); };
    auto ex = homogenization_experiment(pend, f, {1, 2, 4, 8}, 0.16, 64, 0.02);
    for (size_t i = 0; i < ex.ks.size(); ++i) {
        std::printf("  k=%d eps=%.5f resid=%.3f  e(t)=", ex.ks[i], ex.epsilon[i],
                    ex.fit_residual[i]);
        for (double e : ex.e[i]) std::printf(" %.4f", e);
        std::printf("\n");
    }
    std::printf("  (%.1f s)\n", secs(t0));

    std::printf("== variational solver\n");
    t0 = Clock::now();
    auto hz = sample_hamiltonian([](double, double) { return 0.0; }, TorusGrid(16),
                                 MomentumGrid(-1, 1, 9));
    auto gentle = [](double q) { return 0.05 * std::cos(2 * presets::pi * q); };
    auto sv = solve_variational(hz, gentle, 0.5, 2);
    double worst = 0;
    for (int i = 0; i < 16; ++i)
        worst = std::max(worst, std::abs(sv.slices.back()[i] - gentle(TorusGrid(16).node(i))));
    std::printf("  H=0: max|u(t)-f| = %.2e\n", worst);

    presets::GridChoice g2;
    g2.nq = 24;
    auto freeC = presets::free_motion(g2);
    auto sv2 = solve_variational(freeC, zerof, 0.2, 2);
    std::printf("  h(p)=p^2/2, f=0: u = %.6f (want 0)\n", sv2.slices.back()[3]);

    auto mild = [](double q) { return 0.2 * std::cos(2 * presets::pi * q); };
    auto svp = solve_variational(presets::pendulum(1.0, g2), mild, 0.08, 4, 11);
    auto lo = solve_laxoleinik(presets::pendulum(1.0, presets::GridChoice{256, 129, -3, 3}), mild,
                               0.08, 0.02);
    double dmax = 0;
    for (int i = 0; i < g2.nq; ++i) {
        double x = TorusGrid(g2.nq).node(i);
        int j = static_cast<int>(x * 256 + 0.5);
        dmax = std::max(dmax, std::abs(svp.slices.back()[i] - lo.slices.back()[j % 256]));
    }
    std::printf("  pendulum variational vs laxoleinik at t=0.08: %.4f\n", dmax);

    auto bumpy = presets::cosine_bump_in_p(2.0, presets::GridChoice{16, 65, -3, 3});
    auto svn = solve_variational(bumpy, [](double q) { return 0.05 * std::cos(2 * presets::pi * q); },
                                 0.3, 2, 9);
    std::printf("  nonconvex steps ran: u(0) slice0=%.4f slice2=%.4f\n", svn.slices[0][0],
                svn.slices.back()[0]);
    std::printf("  (%.1f s)\n", secs(t0));
    return 0;
}
