#include "sglab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sglab/errors.hpp"
#include "sglab/experiments.hpp"
#include "sglab/hashing.hpp"

namespace sglab {

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::sample: return "sample";
        case ExperimentKind::functional: return "functional";
        case ExperimentKind::stabilize: return "stabilize";
        case ExperimentKind::estimate: return "estimate";
        case ExperimentKind::lil: return "lil";
        case ExperimentKind::clt: return "clt";
        case ExperimentKind::sip: return "sip";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_double_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// lags: semicolon-separated integer tuples, e.g. "1,0; 2,0; 5,0"
std::vector<CubeIndex> parse_lags(const std::string& v) {
    std::vector<CubeIndex> out;
    std::stringstream ss(v);
    std::string tuple;
    while (std::getline(ss, tuple, ';')) {
        tuple = trim(tuple);
        if (tuple.empty()) continue;
        CubeIndex z;
        std::stringstream ts(tuple);
        std::string item;
        while (std::getline(ts, item, ',')) z.z.push_back(std::stoll(trim(item)));
        out.push_back(std::move(z));
    }
    return out;
}

const std::set<std::string> kKnownKeys = {
    "experiment", "functional", "d", "process", "geometry", "base", "n", "n_grid", "n_max",
    "replicates", "paths", "pool", "inner", "trials", "defect_replicates", "block_len", "radius",
    "envelope", "tail_fraction", "sigma_ref", "r_schedule", "lags", "estimator", "m", "input",
    "insert", "seed", "threads", "out", "format"};

}  // namespace

WindowGeometry ExperimentConfig::window() const {
    if (geometry == "stretched") return WindowGeometry::stretched(base, n);
    return WindowGeometry::cubic(n);
}

std::vector<double> ExperimentConfig::resolved_grid() const {
    if (!n_grid.empty()) return n_grid;
    if (n_max > 0.0) return geometric_grid(20.0, 1.3, n_max);
    return {n};
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
        return s;
    };
    os << "experiment=" << to_string(experiment) << '\n'
       << "functional=" << functional.to_string() << '\n'
       << "d=" << d << '\n'
       << "process=" << process << '\n'
       << "geometry=" << geometry << '\n'
       << "base=" << list(base) << '\n'
       << "n=" << fmt_double(n) << '\n'
       << "n_grid=" << list(n_grid) << '\n'
       << "n_max=" << fmt_double(n_max) << '\n'
       << "replicates=" << replicates << '\n'
       << "paths=" << paths << '\n'
       << "pool=" << pool << '\n'
       << "inner=" << inner << '\n'
       << "trials=" << trials << '\n'
       << "defect_replicates=" << defect_replicates << '\n'
       << "block_len=" << fmt_double(block_len) << '\n'
       << "radius=" << fmt_double(radius) << '\n'
       << "envelope=" << fmt_double(envelope) << '\n'
       << "tail_fraction=" << fmt_double(tail_fraction) << '\n'
       << "sigma_ref=" << fmt_double(sigma_ref) << '\n'
       << "r_schedule=" << list(r_schedule) << '\n';
    os << "lags=";
    for (size_t i = 0; i < lags.size(); ++i) {
        if (i) os << ';';
        for (size_t j = 0; j < lags[i].z.size(); ++j) os << (j ? "," : "") << lags[i].z[j];
    }
    os << '\n'
       << "estimator=" << estimator << '\n'
       << "m=" << m << '\n'
       << "input=" << input << '\n'
       << "insert=" << list(insert) << '\n'
       << "seed=" << seed << '\n';
    return os.str();
}

std::string ExperimentConfig::config_hash() const { return hex64(fnv1a64(canonical_text())); }

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    {
        std::stringstream ss(text);
        std::string line;
        int lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const size_t eq = line.find('=');
            if (eq == std::string::npos) {
                const int col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
                throw ParseError("expected key = value", lineno, col);
            }
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ParseError("empty key", lineno, 1);
            kv[key] = trim(line.substr(eq + 1));
        }
    }

    ExperimentConfig cfg;
    std::vector<std::string> bad;
    auto complain = [&](const std::string& msg) { bad.push_back(msg); };

    for (const auto& [k, v] : kv)
        if (!kKnownKeys.count(k)) complain("unknown key: " + k);

    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto get_long = [&](const char* key, long& dst, long lo, long hi) {
        if (auto v = get(key)) {
            try {
                const long x = std::stol(*v);
                if (x < lo || x > hi) {
                    complain(std::string(key) + " must be in [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "], got " + *v);
                    return;
                }
                dst = x;
            } catch (...) {
                complain(std::string(key) + " is not an integer: " + *v);
            }
        }
    };
    auto get_double = [&](const char* key, double& dst, double lo, double hi) {
        if (auto v = get(key)) {
            try {
                const double x = std::stod(*v);
                if (!(x >= lo && x <= hi)) {
                    complain(std::string(key) + " out of range: " + *v);
                    return;
                }
                dst = x;
            } catch (...) {
                complain(std::string(key) + " is not a number: " + *v);
            }
        }
    };

    if (auto v = get("experiment")) {
        static const std::map<std::string, ExperimentKind> kinds = {
            {"sample", ExperimentKind::sample},   {"functional", ExperimentKind::functional},
            {"stabilize", ExperimentKind::stabilize}, {"estimate", ExperimentKind::estimate},
            {"lil", ExperimentKind::lil},         {"clt", ExperimentKind::clt},
            {"sip", ExperimentKind::sip}};
        auto it = kinds.find(*v);
        if (it == kinds.end())
            complain("experiment must be one of sample|functional|stabilize|estimate|lil|clt|sip, got " + *v);
        else
            cfg.experiment = it->second;
    }

    long d_l = cfg.d;
    get_long("d", d_l, 1, 6);
    cfg.d = static_cast<int>(d_l);

    if (auto v = get("functional")) {
        try {
            cfg.functional = FunctionalSpec::parse(*v);
        } catch (const std::exception& e) {
            complain(std::string("functional: ") + e.what());
        }
    }
    // range checks even when parsing succeeded with odd values
    switch (cfg.functional.kind) {
        case FunctionalSpec::Kind::euler:
            if (!(cfg.functional.radius > 0.0)) complain("euler.r must be > 0");
            if (cfg.functional.clique_cap < cfg.d + 3)
                complain("euler.cap must be >= d + 3 = " + std::to_string(cfg.d + 3));
            break;
        case FunctionalSpec::Kind::components:
            if (!(cfg.functional.radius > 0.0)) complain("components.r must be > 0");
            break;
        case FunctionalSpec::Kind::knn_length:
            if (cfg.functional.k < 1) complain("knn.k must be >= 1");
            break;
        default: break;
    }

    if (auto v = get("process")) {
        if (*v != "poisson" && *v != "binomial") complain("process must be poisson|binomial, got " + *v);
        else cfg.process = *v;
    }
    if (auto v = get("geometry")) {
        if (*v != "cubic" && *v != "stretched") complain("geometry must be cubic|stretched, got " + *v);
        else cfg.geometry = *v;
    }
    if (auto v = get("base")) {
        try {
            cfg.base = parse_double_list(*v);
            for (double b : cfg.base)
                if (!(b > 0)) complain("base sides must be positive");
        } catch (...) {
            complain("base is not a comma list of numbers: " + *v);
        }
    }
    get_double("n", cfg.n, 1e-9, 1e12);
    if (auto v = get("n_grid")) {
        try {
            cfg.n_grid = parse_double_list(*v);
            for (size_t i = 0; i + 1 < cfg.n_grid.size(); ++i)
                if (cfg.n_grid[i] >= cfg.n_grid[i + 1]) {
                    complain("n_grid must be strictly increasing");
                    break;
                }
        } catch (...) {
            complain("n_grid is not a comma list of numbers: " + *v);
        }
    }
    get_double("n_max", cfg.n_max, 0.0, 1e12);
    get_long("replicates", cfg.replicates, 1, 100000000);
    get_long("paths", cfg.paths, 1, 1000000);
    get_long("pool", cfg.pool, 1, 100000000);
    get_long("inner", cfg.inner, 1, 1000000);
    get_long("trials", cfg.trials, 1, 100000000);
    get_long("defect_replicates", cfg.defect_replicates, 0, 100000000);
    get_double("block_len", cfg.block_len, 1e-9, 1e12);
    get_double("radius", cfg.radius, 0.0, 1e6);
    get_double("envelope", cfg.envelope, 1e-9, 100.0);
    get_double("tail_fraction", cfg.tail_fraction, 0.0, 1.0);
    get_double("sigma_ref", cfg.sigma_ref, 0.0, 1e9);
    if (auto v = get("r_schedule")) {
        try {
            cfg.r_schedule = parse_double_list(*v);
            for (double r : cfg.r_schedule)
                if (!(r > 0)) complain("r_schedule radii must be positive");
        } catch (...) {
            complain("r_schedule is not a comma list of numbers: " + *v);
        }
    }
    if (auto v = get("lags")) {
        try {
            cfg.lags = parse_lags(*v);
            for (const auto& z : cfg.lags)
                if (static_cast<int>(z.z.size()) != cfg.d)
                    complain("each lag must have d = " + std::to_string(cfg.d) + " components");
        } catch (...) {
            complain("lags must be semicolon-separated integer tuples: " + *v);
        }
    }
    if (auto v = get("estimator")) {
        static const std::set<std::string> ests = {"alpha", "sigma2", "tau2", "variance", "covariance"};
        if (!ests.count(*v)) complain("estimator must be alpha|sigma2|tau2|variance|covariance, got " + *v);
        else cfg.estimator = *v;
    }
    get_long("m", cfg.m, 0, 2000000000);
    if (auto v = get("input")) cfg.input = *v;
    if (auto v = get("insert")) {
        try {
            cfg.insert = parse_double_list(*v);
        } catch (...) {
            complain("insert is not a comma list of numbers: " + *v);
        }
    }
    if (auto v = get("seed")) {
        try {
            cfg.seed = std::stoull(*v);
        } catch (...) {
            complain("seed is not an unsigned integer: " + *v);
        }
    }
    long threads_l = cfg.threads;
    get_long("threads", threads_l, 1, 4096);
    cfg.threads = static_cast<int>(threads_l);
    if (auto v = get("out")) cfg.out = *v;
    if (auto v = get("format")) {
        if (*v != "csv" && *v != "jsonl" && *v != "both") complain("format must be csv|jsonl|both, got " + *v);
        else cfg.format = *v;
    }

    // experiment-specific ranges
    switch (cfg.experiment) {
        case ExperimentKind::lil: {
            if (cfg.paths < 20) complain("lil needs paths >= 20");
            const auto grid = cfg.resolved_grid();
            if (grid.empty() || grid.back() < 100.0) complain("lil needs max(n_grid) >= 100");
            for (double nn : grid)
                if (nn < 3.0) {
                    complain("lil needs every n >= 3 (log log n must be positive)");
                    break;
                }
            break;
        }
        case ExperimentKind::clt:
            if (cfg.replicates < 500) complain("clt needs replicates >= 500");
            break;
        case ExperimentKind::sip:
            if (cfg.d < 2) complain("sip needs d >= 2");
            if (cfg.n_max <= 0.0) complain("sip needs n_max");
            else if (cfg.n_max < 10.0 * cfg.block_len) complain("sip needs n_max >= 10*block_len");
            break;
        case ExperimentKind::estimate:
            if (cfg.estimator == "variance" && cfg.replicates < 30)
                complain("variance estimator needs replicates >= 30");
            if (cfg.estimator == "covariance" && cfg.lags.empty())
                complain("covariance estimator needs lags");
            break;
        case ExperimentKind::stabilize:
            if (cfg.functional.kind == FunctionalSpec::Kind::knn_length && cfg.d != 2 &&
                cfg.estimator == "triangle")
                complain("triangle criterion needs d = 2");
            break;
        default: break;
    }

    if (!bad.empty()) throw ValidationError(std::move(bad));
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace sglab
