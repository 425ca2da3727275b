#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "effham/runner.hpp"

using namespace effham;

int main(int argc, char** argv) {
    CLI::App app{"effham: effective Hamiltonians of torus Hamiltonian systems"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    if (const char* env = std::getenv("EFFHAM_OUT")) out_dir = env;
    int threads = 1;
    double tolerance_scale = 1.0;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker pool size");
    run->add_option("--tolerance-scale", tolerance_scale, "scale property budgets");
    run->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* diff = app.add_subcommand("diff", "compare two effective-Hamiltonian CSV files");
    std::string file_a, file_b;
    double tol = 1e-2;
    diff->add_option("a", file_a, "first curve CSV")->required();
    diff->add_option("b", file_b, "second curve CSV")->required();
    diff->add_option("--tolerance", tol, "sup-norm budget for exit status");

    auto* lp = app.add_subcommand("list-presets", "print the preset catalog");

    auto* check = app.add_subcommand("check", "run the operator property suite");
    check->add_option("--seed", seed, "suite seed")
        ->each([&](const std::string&) { seed_set = true; });
    check->add_option("--out", out_dir, "output directory");
    check->add_option("--tolerance-scale", tolerance_scale, "scale property budgets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            auto cfg = ExperimentConfig::load(config_path);
            std::optional<uint64_t> seed_opt;
            if (seed_set) seed_opt = seed;
            auto res = run_experiment(cfg, out_dir, threads, tolerance_scale, seed_opt);
            std::cout << "wrote " << res.out_dir.string() << " (config " << cfg.hash() << ")\n";
            return res.exit_code;
        }
        if (diff->parsed()) {
            auto d = diff_curves(file_a, file_b);
            std::cout << "sup=" << fmt(d.sup) << " l1=" << fmt(d.l1) << "\n";
            return d.within(tol) ? 0 : 3;
        }
        if (lp->parsed()) {
            for (const auto& info : presets::catalog())
                std::cout << info.name << "  -  " << info.description << "\n";
            return 0;
        }
        if (check->parsed()) {
            PropertySuiteConfig pcfg;
            if (seed_set) pcfg.seed = seed;
            pcfg.tolerance_scale = tolerance_scale;
            auto report = check_properties(pcfg);
            json j = property_report_json(report, "cli");
            write_text(std::filesystem::path(out_dir) / "properties.json", j.dump(2) + "\n");
            for (const auto& r : report.results)
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.property << " slack=" << fmt(r.slack)
                          << " budget=" << fmt(r.budget) << "\n";
            return report.all_pass() ? 0 : 2;
        }
    } catch (const ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
