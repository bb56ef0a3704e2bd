#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sglab/functionals.hpp"
#include "sglab/process.hpp"

namespace sglab {

enum class ExperimentKind { sample, functional, stabilize, estimate, lil, clt, sip };

std::string to_string(ExperimentKind k);

// Parsed and validated experiment description. Execution details (threads,
// output directory, format) are carried but excluded from the config hash, so
// reruns at any parallelism produce the same hash and the same data files.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::sample;
    FunctionalSpec functional = FunctionalSpec::count();
    int d = 2;
    // process/geometry
    std::string process = "poisson";  // poisson | binomial
    std::string geometry = "cubic";   // cubic | stretched
    std::vector<double> base = {1.0};
    double n = 100.0;
    std::vector<double> n_grid;   // explicit grid; empty -> derive from n_max
    double n_max = 0.0;
    // replication
    long replicates = 1000;
    long paths = 50;
    long pool = 500;
    long inner = 8;
    long trials = 100;
    long defect_replicates = 0;
    double block_len = 40.0;
    double radius = 0.0;
    double envelope = 1.3;
    double tail_fraction = 0.1;
    double sigma_ref = 0.0;  // 0 = estimate from data
    std::vector<double> r_schedule;
    std::vector<CubeIndex> lags;
    std::string estimator = "alpha";  // alpha|sigma2|tau2|variance|covariance
    long m = 0;                       // binomial length for sample; 0 -> round(n)
    std::string input;                // functional: point-cloud CSV path
    std::vector<double> insert;       // functional: optional insertion point
    // execution
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "out";
    std::string format = "both";  // csv | jsonl | both

    std::string canonical_text() const;
    std::string config_hash() const;

    WindowGeometry window() const;
    std::vector<double> resolved_grid() const;
};

// Parses key = value lines ('#' comments). Throws ParseError on malformed
// syntax and ValidationError carrying every violation.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace sglab
