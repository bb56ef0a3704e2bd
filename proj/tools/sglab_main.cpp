#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "sglab/errors.hpp"
#include "sglab/runner.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

void add_common(CLI::App* sub, CliOverrides& ov) {
    sub->add_option("--config", ov.config_path, "experiment config file")->required();
    sub->add_option("--seed", ov.seed, "override the master seed");
    sub->add_option("--threads", ov.threads, "worker threads");
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--format", ov.format, "csv|jsonl|both")
        ->check(CLI::IsMember({"csv", "jsonl", "both"}));
}

int run_sub(sglab::ExperimentKind kind, const CliOverrides& ov) {
    sglab::ExperimentConfig cfg = sglab::load_config_file(ov.config_path);
    if (cfg.experiment != kind)
        throw sglab::ValidationError({"config declares experiment = " + sglab::to_string(cfg.experiment) +
                                      " but the " + sglab::to_string(kind) + " subcommand was invoked"});
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.threads) cfg.threads = *ov.threads;
    if (ov.out) cfg.out = *ov.out;
    if (ov.format) cfg.format = *ov.format;

    const sglab::RunManifest m = sglab::run(cfg);
    std::printf("config %s: wrote %zu file(s) to %s\n", m.config_hash.c_str(), m.files.size(),
                cfg.out.c_str());
    for (const auto& [name, digest] : m.files) std::printf("  %s  %s\n", digest.c_str(), name.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and estimation lab for stabilizing geometric functionals"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, sglab::ExperimentKind>> subs = {
        {"sample", sglab::ExperimentKind::sample},       {"functional", sglab::ExperimentKind::functional},
        {"stabilize", sglab::ExperimentKind::stabilize}, {"estimate", sglab::ExperimentKind::estimate},
        {"lil", sglab::ExperimentKind::lil},             {"clt", sglab::ExperimentKind::clt},
        {"sip", sglab::ExperimentKind::sip}};

    std::vector<CliOverrides> ovs(subs.size());
    std::vector<CLI::App*> apps;
    for (size_t i = 0; i < subs.size(); ++i) {
        CLI::App* sub = app.add_subcommand(subs[i].first, subs[i].first + " experiment");
        add_common(sub, ovs[i]);
        apps.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    for (size_t i = 0; i < subs.size(); ++i) {
        if (!apps[i]->parsed()) continue;
        try {
            return run_sub(subs[i].second, ovs[i]);
        } catch (const sglab::ParseError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 2;
        } catch (const sglab::ValidationError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 2;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 3;
        }
    }
    return 0;
}
