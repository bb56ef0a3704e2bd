#pragma once

#include <stdexcept>
#include <string>

namespace sglab {

struct CliqueCapExceeded : std::runtime_error {
    explicit CliqueCapExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct KnnUndefined : std::runtime_error {
    explicit KnnUndefined(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotCertifiable : std::runtime_error {
    explicit NotCertifiable(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceNotReached : std::runtime_error {
    explicit ConvergenceNotReached(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateFit : std::runtime_error {
    explicit DegenerateFit(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateSample : std::runtime_error {
    explicit DegenerateSample(const std::string& msg) : std::runtime_error(msg) {}
};

// Config syntax error; line/column are 1-based.
struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ")"),
          line(line_), column(col_) {}
};

// Collects every violation, not just the first.
struct ValidationError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> v)
        : std::runtime_error(join(v)), violations(std::move(v)) {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid config:";
        for (const auto& e : v) s += "\n  - " + e;
        return s;
    }
};

}  // namespace sglab
