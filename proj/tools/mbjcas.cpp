#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "mbjcas/config.hpp"
#include "mbjcas/experiments.hpp"

namespace {

void print_report(const mbjcas::RunReport& report) {
    std::printf("[%s] seed=%llu files=%zu wall=%.2fs\n", report.name.c_str(),
                static_cast<unsigned long long>(report.seed), report.files.size(),
                report.wall_seconds);
    for (const auto& [key, value] : report.metrics) std::printf("  %s = %.6g\n", key.c_str(), value);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multibeam joint communication and sensing simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // accept global flags after the subcommand name

    std::string config_path;
    std::string out_dir = "out";
    std::string solver = "omp";
    unsigned long long seed = 0;
    bool seed_set = false;
    int method = 0;
    bool plots = false;

    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--solver", solver, "sparse solver (only 'omp' is available)");
    app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--method", method, "multibeam combination method (1 or 2)");
    app.add_flag("--plots", plots, "emit SVG quick-look plots");

    auto* cmd_beams = app.add_subcommand("beams", "beam synthesis and combination figures");
    auto* cmd_sense = app.add_subcommand("sense", "sensing scene and estimation pipelines");
    auto* cmd_capacity = app.add_subcommand("capacity", "multibeam vs time-division capacity sweep");
    auto* cmd_all = app.add_subcommand("all", "run every experiment");
    auto* cmd_config = app.add_subcommand("config", "write the effective configuration (canonical form)");
    std::string config_out = "mbjcas.json";
    cmd_config->add_option("file", config_out, "destination file");

    CLI11_PARSE(app, argc, argv);

    try {
        mbjcas::RootConfig cfg = config_path.empty()
                                     ? mbjcas::config_from_json_text("{}")
                                     : mbjcas::load_config(config_path);
        mbjcas::apply_seed_env_override(cfg);
        if (seed_set) cfg.seed = seed;
        if (method != 0) {
            if (method != 1 && method != 2)
                throw mbjcas::ValidationError("--method must be 1 or 2");
            cfg.combine.method = method;
        }
        if (solver != "omp")
            throw mbjcas::ValidationError("unknown solver '" + solver + "' (available: omp)");
        cfg.validate();

        const std::filesystem::path out(out_dir);
        if (cmd_beams->parsed()) print_report(mbjcas::run_beams_experiment(cfg, out, plots));
        if (cmd_sense->parsed()) print_report(mbjcas::run_sensing_experiment(cfg, out, plots));
        if (cmd_capacity->parsed()) print_report(mbjcas::run_capacity_sweep(cfg, out, plots));
        if (cmd_all->parsed())
            for (const auto& report : mbjcas::run_all(cfg, out, plots)) print_report(report);
        if (cmd_config->parsed()) mbjcas::save_config(cfg, config_out);
    } catch (const mbjcas::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const mbjcas::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
