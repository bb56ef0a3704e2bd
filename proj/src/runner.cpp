#include "sglab/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "json.hpp"
#include "sglab/errors.hpp"
#include "sglab/experiments.hpp"
#include "sglab/rng.hpp"
#include "sglab/stats.hpp"

namespace sglab {

namespace {

using nlohmann::json;

struct OutputSet {
    std::string dir;
    std::string format;
    std::vector<std::string> names;

    bool csv() const { return format == "csv" || format == "both"; }
    bool jsonl() const { return format == "jsonl" || format == "both"; }

    std::string path(const std::string& name) {
        names.push_back(name);
        return dir + "/" + name;
    }
};

json report_json(const EstimateReport& r, const ExperimentConfig& cfg) {
    json j;
    j["method"] = r.method;
    j["functional"] = cfg.functional.to_string();
    j["d"] = cfg.d;
    j["params"] = {{"R", cfg.radius}, {"inner", cfg.inner}};
    j["estimate"] = r.estimate;
    j["se"] = r.std_error;
    j["replicates"] = r.replicates;
    j["seed"] = r.seed;
    j["config_hash"] = cfg.config_hash();
    if (r.has_cross) {
        j["cross_estimate"] = r.cross_estimate;
        j["cross_se"] = r.cross_se;
        j["cross_flagged"] = r.cross_flagged;
    }
    if (r.warning_nonpositive) j["warning"] = "nonpositive estimate";
    return j;
}

void write_jsonl(OutputSet& out, const std::string& name, const std::vector<json>& records) {
    std::string text;
    for (const auto& r : records) text += r.dump() + "\n";
    write_text_file(out.path(name), text);
}

ProcessKind process_kind(const ExperimentConfig& cfg) {
    return cfg.process == "binomial" ? ProcessKind::binomial : ProcessKind::poisson;
}

void run_sample(const ExperimentConfig& cfg, OutputSet& out) {
    const ProcessKey key{cfg.seed, 0, 0};
    PointCloud cloud;
    if (cfg.process == "binomial") {
        const long m = cfg.m > 0 ? cfg.m : std::llround(cfg.n);
        cloud = coupled_binomial(key, cfg.window(), cfg.d, m);
    } else {
        cloud = poisson_window(key, cfg.window(), cfg.d);
    }
    if (out.csv()) write_point_cloud_csv(out.path("points.csv"), cloud);
    write_point_cloud_sgpc(out.path("points.sgpc"), cloud);
    if (out.jsonl()) {
        json j{{"experiment", "sample"},
               {"config_hash", cfg.config_hash()},
               {"points", cloud.size()},
               {"d", cfg.d},
               {"volume", cfg.window().volume(cfg.d)}};
        write_jsonl(out, "meta.jsonl", {j});
    }
}

void run_functional(const ExperimentConfig& cfg, OutputSet& out) {
    PointCloud cloud = cfg.input.empty()
                           ? poisson_window(ProcessKey{cfg.seed, 0, 0}, cfg.window(), cfg.d)
                           : read_point_cloud_csv(cfg.input);
    json j{{"experiment", "functional"},
           {"functional", cfg.functional.to_string()},
           {"config_hash", cfg.config_hash()},
           {"points", cloud.size()},
           {"value", evaluate(cfg.functional, cloud)}};
    if (!cfg.insert.empty()) {
        if (static_cast<int>(cfg.insert.size()) != cloud.dim())
            throw std::runtime_error("insert point dimension mismatch");
        j["add_one_cost"] = add_one_cost(cfg.functional, cloud, cfg.insert);
    }
    write_jsonl(out, "result.jsonl", {j});
}

void run_stabilize(const ExperimentConfig& cfg, OutputSet& out) {
    const auto schedule = cfg.r_schedule.empty() ? default_r_schedule() : cfg.r_schedule;
    std::vector<double> radii(cfg.replicates);
    std::vector<std::vector<double>> rows;
    const std::uint64_t master = derive_state({cfg.seed, 0x73746162ull});
    for (long j = 0; j < cfg.replicates; ++j) {
        const ProcessKey key{master, 0, static_cast<std::uint64_t>(j)};
        const RadiusCertificate cert = empirical_radius(cfg.functional, key, cfg.d, cfg.trials, schedule);
        radii[j] = cert.radius;
        rows.push_back({static_cast<double>(j), cert.radius});
    }
    if (out.csv()) write_csv(out.path("radii.csv"), {"replicate", "radius"}, rows);

    std::vector<json> records;
    json meta{{"experiment", "stabilize"},
              {"functional", cfg.functional.to_string()},
              {"config_hash", cfg.config_hash()},
              {"trials", cfg.trials},
              {"replicates", cfg.replicates}};
    try {
        const TailFit fit = radius_tail_fit(radii);
        meta["fit"] = {{"c1", fit.c1}, {"c2", fit.c2}, {"r_squared", fit.r_squared},
                       {"n_samples", fit.n_samples}};
        if (out.csv())
            write_csv(out.path("fit.csv"), {"c1", "c2", "r_squared", "n_samples"},
                      {{fit.c1, fit.c2, fit.r_squared, static_cast<double>(fit.n_samples)}});
    } catch (const DegenerateFit& e) {
        meta["fit_error"] = e.what();
    }
    records.push_back(meta);
    if (out.jsonl()) write_jsonl(out, "stabilize.jsonl", records);
}

void run_estimate(const ExperimentConfig& cfg, OutputSet& out) {
    EstimatorConfig ecfg;
    ecfg.R = cfg.radius;
    ecfg.replicates = cfg.replicates;
    ecfg.seed = cfg.seed;
    ecfg.threads = cfg.threads;
    ecfg.inner = cfg.inner;

    std::vector<json> records;
    if (cfg.estimator == "alpha") {
        records.push_back(report_json(alpha_hat(cfg.functional, cfg.d, ecfg), cfg));
    } else if (cfg.estimator == "sigma2") {
        records.push_back(report_json(sigma2_hat(cfg.functional, cfg.d, ecfg), cfg));
    } else if (cfg.estimator == "tau2") {
        records.push_back(report_json(tau2_hat(cfg.functional, cfg.d, ecfg), cfg));
    } else if (cfg.estimator == "variance") {
        const auto grid = cfg.resolved_grid();
        const VarianceCurve vc = direct_variance(cfg.functional, process_kind(cfg), cfg.d, grid,
                                                 cfg.replicates, cfg.seed, cfg.threads);
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < vc.ns.size(); ++i) {
            rows.push_back({vc.ns[i], vc.values[i], vc.ses[i]});
            records.push_back(json{{"method", "direct_variance"},
                                   {"functional", cfg.functional.to_string()},
                                   {"d", cfg.d},
                                   {"params", {{"n", vc.ns[i]}, {"process", cfg.process}}},
                                   {"estimate", vc.values[i]},
                                   {"se", vc.ses[i]},
                                   {"replicates", cfg.replicates},
                                   {"seed", cfg.seed},
                                   {"config_hash", cfg.config_hash()}});
        }
        if (out.csv()) write_csv(out.path("variance_curve.csv"), {"n", "var_over_n", "se"}, rows);
    } else if (cfg.estimator == "covariance") {
        const auto pts = covariance_curve(cfg.functional, cfg.d, ecfg, cfg.lags);
        std::vector<std::vector<double>> rows;
        for (const auto& p : pts) {
            double norm = 0.0;
            for (long long c : p.lag.z) norm = std::max(norm, std::abs(static_cast<double>(c)));
            rows.push_back({norm, p.cov, p.se, p.inner_bias});
            json lag = json::array();
            for (long long c : p.lag.z) lag.push_back(c);
            records.push_back(json{{"method", "covariance_curve"},
                                   {"functional", cfg.functional.to_string()},
                                   {"d", cfg.d},
                                   {"params", {{"lag", lag}, {"inner", cfg.inner}}},
                                   {"estimate", p.cov},
                                   {"se", p.se},
                                   {"replicates", cfg.replicates},
                                   {"seed", cfg.seed},
                                   {"config_hash", cfg.config_hash()}});
        }
        if (out.csv()) write_csv(out.path("covariance.csv"), {"lag_norm", "cov", "se", "inner_bias"}, rows);
    }
    if (out.jsonl()) write_jsonl(out, "estimates.jsonl", records);
}

void run_lil(const ExperimentConfig& cfg, OutputSet& out) {
    LilConfig lcfg;
    lcfg.paths = cfg.paths;
    lcfg.pool_replicates = cfg.pool;
    lcfg.seed = cfg.seed;
    lcfg.threads = cfg.threads;
    lcfg.tail_fraction = cfg.tail_fraction;
    lcfg.envelope_factor = cfg.envelope;

    double sigma_ref = cfg.sigma_ref;
    if (sigma_ref <= 0.0) {
        EstimatorConfig ecfg;
        ecfg.seed = derive_state({cfg.seed, 0x7369676dull});
        ecfg.replicates = std::max<long>(cfg.replicates, 10000);
        ecfg.threads = cfg.threads;
        const auto rep = process_kind(cfg) == ProcessKind::poisson
                             ? sigma2_hat(cfg.functional, cfg.d, ecfg)
                             : tau2_hat(cfg.functional, cfg.d, ecfg);
        sigma_ref = std::sqrt(std::max(rep.estimate, 0.0));
    }
    lcfg.sigma_ref = sigma_ref;

    const auto grid = cfg.resolved_grid();
    const LilResult res =
        lil_experiment(cfg.functional, process_kind(cfg), cfg.d, cfg.window(), grid, lcfg);

    std::vector<std::vector<double>> rows, plot;
    for (const auto& p : res.paths)
        for (size_t i = 0; i < p.ns.size(); ++i) {
            rows.push_back({static_cast<double>(p.replicate_id), p.ns[i], p.centered[i], p.normalized[i]});
            plot.push_back({p.ns[i], static_cast<double>(p.replicate_id), p.normalized[i]});
        }
    if (out.csv()) {
        write_csv(out.path("paths.csv"), {"path", "n", "centered", "normalized"}, rows);
        std::vector<std::vector<double>> pool_rows;
        for (size_t i = 0; i < res.pool.ns.size(); ++i)
            pool_rows.push_back({res.pool.ns[i], res.pool.means[i], res.pool.ses[i]});
        write_csv(out.path("mean_curve.csv"), {"n", "mean", "se"}, pool_rows);
    }
    if (out.jsonl()) {
        json j{{"experiment", "lil"},
               {"functional", cfg.functional.to_string()},
               {"process", cfg.process},
               {"config_hash", cfg.config_hash()},
               {"paths", cfg.paths},
               {"sigma_ref", lcfg.sigma_ref},
               {"envelope", res.envelope},
               {"pass_fraction", res.pass_fraction},
               {"centering_se_worst", res.centering_se_worst},
               {"seed", cfg.seed}};
        write_jsonl(out, "lil.jsonl", {j});
    }
    if (out.csv()) {
        std::vector<std::vector<double>> long_rows;
        for (const auto& p : res.paths)
            for (size_t i = 0; i < p.ns.size(); ++i)
                long_rows.push_back({p.ns[i], static_cast<double>(p.replicate_id), p.normalized[i]});
        write_csv(out.path("plot.csv"), {"n", "series", "value"}, long_rows);
    }
}

void run_clt(const ExperimentConfig& cfg, OutputSet& out) {
    std::optional<double> var_override;
    if (cfg.sigma_ref > 0.0) var_override = cfg.sigma_ref * cfg.sigma_ref;
    const CltResult res = clt_experiment(cfg.functional, process_kind(cfg), cfg.d, cfg.n,
                                         cfg.replicates, cfg.seed, cfg.threads, var_override);
    json j{{"experiment", "clt"},
           {"functional", cfg.functional.to_string()},
           {"process", cfg.process},
           {"config_hash", cfg.config_hash()},
           {"n", cfg.n},
           {"replicates", res.replicates},
           {"ks_statistic", res.ks_statistic},
           {"sigma2_used", res.sigma2_used},
           {"seed", cfg.seed}};
    write_jsonl(out, "clt.jsonl", {j});
}

void run_sip(const ExperimentConfig& cfg, OutputSet& out) {
    SipConfig scfg;
    scfg.n_max = cfg.n_max;
    scfg.block_len = cfg.block_len;
    scfg.paths = cfg.paths;
    scfg.seed = cfg.seed;
    scfg.threads = cfg.threads;
    scfg.base = cfg.base;
    scfg.defect_replicates = cfg.defect_replicates;

    const SipReport rep = sip_experiment(cfg.functional, process_kind(cfg), cfg.d, scfg);

    if (out.csv()) {
        std::vector<std::vector<double>> vrows;
        for (size_t i = 0; i < rep.grid_ns.size(); ++i)
            vrows.push_back({rep.grid_ns[i], rep.variance_values[i], rep.variance_ses[i]});
        write_csv(out.path("variance_curve.csv"), {"n", "variance", "se"}, vrows);

        std::vector<std::vector<double>> crows;
        for (size_t a = 0; a < rep.increment_correlation.size(); ++a)
            for (size_t b = 0; b < rep.increment_correlation[a].size(); ++b)
                crows.push_back({static_cast<double>(a), static_cast<double>(b),
                                 rep.increment_correlation[a][b]});
        write_csv(out.path("increment_correlation.csv"), {"block_i", "block_j", "correlation"}, crows);

        if (rep.has_defect) {
            std::vector<std::vector<double>> drows;
            for (size_t i = 0; i < rep.defect_ns.size(); ++i)
                drows.push_back({rep.defect_ns[i], rep.defect_values[i], rep.defect_ses[i]});
            write_csv(out.path("defect_curve.csv"), {"n", "defect", "se"}, drows);
        }
    }
    if (out.jsonl()) {
        json j{{"experiment", "sip"},
               {"functional", cfg.functional.to_string()},
               {"process", cfg.process},
               {"config_hash", cfg.config_hash()},
               {"nu2_slope", rep.nu2_slope},
               {"nu2_slope_se", rep.nu2_slope_se},
               {"variance_fit_r2", rep.variance_fit_r2},
               {"block_ks", rep.block_ks},
               {"correlation_se", rep.correlation_se},
               {"seed", cfg.seed}};
        if (rep.has_defect) {
            j["defect_exponent"] = rep.defect_exponent;
            j["defect_fit_r2"] = rep.defect_fit_r2;
        }
        write_jsonl(out, "sip.jsonl", {j});
    }
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);

    RunManifest manifest;
    manifest.config_hash = cfg.config_hash();
    manifest.tool_version = kToolVersion;
    manifest.started_unix =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();

    OutputSet out{cfg.out, cfg.format, {}};
    switch (cfg.experiment) {
        case ExperimentKind::sample: run_sample(cfg, out); break;
        case ExperimentKind::functional: run_functional(cfg, out); break;
        case ExperimentKind::stabilize: run_stabilize(cfg, out); break;
        case ExperimentKind::estimate: run_estimate(cfg, out); break;
        case ExperimentKind::lil: run_lil(cfg, out); break;
        case ExperimentKind::clt: run_clt(cfg, out); break;
        case ExperimentKind::sip: run_sip(cfg, out); break;
    }

    for (const auto& name : out.names)
        manifest.files.emplace_back(name, file_digest(cfg.out + "/" + name));
    manifest.finished_unix =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();
    write_manifest(cfg.out + "/manifest.json", manifest);  // last: a crash leaves no manifest
    return manifest;
}

}  // namespace sglab
