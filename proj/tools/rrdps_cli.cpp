#include "cli_core.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Key rates for round-robin differential-phase-shift QKD"};
    app.require_subcommand(0, 1);

    std::string config_path, out_path, obs_path, tier_s, source_s;
    std::uint64_t seed = 0;
    int packet_length = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_path, "output CSV path (default stdout)");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed for the sampling checks");
    auto* tier_opt = app.add_option("--tier", tier_s, "decoy tier")
                         ->check(CLI::IsMember({"none", "infinite", "two", "three", "four"}));
    auto* source_opt = app.add_option("--source", source_s, "photon source")
                           ->check(CLI::IsMember({"wcp", "hsps"}));
    auto* length_opt =
        app.add_option("--packet-length", packet_length, "pulses per packet (L)");

    auto* sc_rate = app.add_subcommand("rate", "key rate over a distance sweep");
    auto* sc_landscape =
        app.add_subcommand("landscape", "rate grid over intensity and threshold");
    auto* sc_bounds = app.add_subcommand("bounds", "decoy-state bounds beside true yields");
    sc_bounds->add_option("--observations", obs_path,
                          "measured data CSV (intensity_per_pulse,gain,qber); row count sets "
                          "the tier");
    auto* sc_validate = app.add_subcommand("validate", "run the self-check suite");
    // global flags remain valid after the subcommand name
    for (CLI::App* sc : {sc_rate, sc_landscape, sc_bounds, sc_validate}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        rrdps::cli::RunConfig cfg = config_path.empty()
                                        ? rrdps::cli::default_config()
                                        : rrdps::cli::load_config_file(config_path);
        if (seed_opt->count()) cfg.seed = seed;
        if (tier_opt->count()) cfg.tier = rrdps::tier_from_string(tier_s);
        if (source_opt->count())
            cfg.src.kind = source_s == "wcp" ? rrdps::Source::wcp : rrdps::Source::hsps;
        if (length_opt->count()) cfg.L = packet_length;
        rrdps::cli::cross_validate(cfg);

        if (out_path.empty()) out_path = cfg.out_csv;
        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) throw rrdps::cli::ConfigError(out_path + ": cannot open output file");
            os = &file;
        }

        if (sc_landscape->parsed()) return rrdps::cli::cmd_landscape(cfg, *os);
        if (sc_bounds->parsed())
            return obs_path.empty() ? rrdps::cli::cmd_bounds(cfg, *os)
                                    : rrdps::cli::cmd_bounds_obs(obs_path, cfg, *os);
        if (sc_validate->parsed()) return rrdps::cli::cmd_validate(cfg, *os);
        return rrdps::cli::cmd_rate(cfg, *os);
    } catch (const rrdps::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
