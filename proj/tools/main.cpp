#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"todalab: cyclic Toda field solver and entropy verification suite"};
    app.require_subcommand(1);

    std::string config, out = "out";
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--out", out, "output directory");
        if (with_seed) sub->add_option("--seed", seed, "64-bit seed for randomized suites");
    };

    auto* spectrum = app.add_subcommand("spectrum", "ensemble entropies, limits, divergence scans");
    add_common(spectrum, false);
    auto* solve = app.add_subcommand("solve", "solve a Dirichlet instance and persist the fields");
    add_common(solve, false);
    auto* verify = app.add_subcommand("verify", "inequality and entropy checks on a solution");
    add_common(verify, false);
    auto* entropy = app.add_subcommand("entropy", "entropy fields of a solved instance");
    add_common(entropy, false);
    auto* lemma = app.add_subcommand("lemma-pq", "seeded fuzz of the domination inequality");
    add_common(lemma, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed()) return todalab::cli::cmd_spectrum(config, out);
        if (solve->parsed()) return todalab::cli::cmd_solve(config, out);
        if (verify->parsed()) return todalab::cli::cmd_verify(config, out);
        if (entropy->parsed()) return todalab::cli::cmd_entropy(config, out);
        if (lemma->parsed()) return todalab::cli::cmd_lemma_pq(config, out, seed);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
