#include "sglab/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sglab/hashing.hpp"

namespace sglab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint32_t get_u32_le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

void write_point_cloud_csv(const std::string& path, const PointCloud& cloud) {
    std::ostringstream os;
    for (int i = 0; i < cloud.dim(); ++i) os << (i ? "," : "") << 'x' << i;
    os << '\n';
    for (long i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.pt(i);
        for (int k = 0; k < cloud.dim(); ++k) os << (k ? "," : "") << fmt17(p[k]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

PointCloud read_point_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty point cloud file: " + path);
    int d = 1;
    for (char c : line)
        if (c == ',') ++d;
    PointCloud cloud(d);
    std::vector<double> x(d);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        for (int k = 0; k < d; ++k) {
            if (!std::getline(ss, item, ',')) throw std::runtime_error("short row in " + path);
            x[k] = std::stod(item);
        }
        cloud.push(x);
    }
    return cloud;
}

void write_point_cloud_sgpc(const std::string& path, const PointCloud& cloud) {
    std::string out;
    out += "SGPC";
    out.push_back(1);  // version
    put_u32_le(out, static_cast<std::uint32_t>(cloud.dim()));
    put_u64_le(out, static_cast<std::uint64_t>(cloud.size()));
    for (long i = 0; i < cloud.size(); ++i)
        for (int k = 0; k < cloud.dim(); ++k) {
            std::uint64_t bits;
            const double v = cloud.pt(i)[k];
            std::memcpy(&bits, &v, 8);
            put_u64_le(out, bits);
        }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

PointCloud read_point_cloud_sgpc(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (data.size() < 17 || data.compare(0, 4, "SGPC") != 0)
        throw std::runtime_error("not an SGPC file: " + path);
    if (data[4] != 1) throw std::runtime_error("unsupported SGPC version in " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint32_t d = get_u32_le(p + 5);
    const std::uint64_t count = get_u64_le(p + 9);
    if (data.size() != 17 + 8ull * d * count) throw std::runtime_error("truncated SGPC file: " + path);
    PointCloud cloud(static_cast<int>(d));
    std::vector<double> x(d);
    size_t off = 17;
    for (std::uint64_t i = 0; i < count; ++i) {
        for (std::uint32_t k = 0; k < d; ++k, off += 8) {
            const std::uint64_t bits = get_u64_le(p + off);
            std::memcpy(&x[k], &bits, 8);
        }
        cloud.push(x);
    }
    return cloud;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt17(row[i]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string file_digest(const std::string& path) { return hex64(fnv1a64(read_text_file(path))); }

void write_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::json j;
    j["config_hash"] = manifest.config_hash;
    j["tool_version"] = manifest.tool_version;
    j["started_unix"] = manifest.started_unix;
    j["finished_unix"] = manifest.finished_unix;
    j["files"] = nlohmann::json::array();
    for (const auto& [name, digest] : manifest.files)
        j["files"].push_back({{"name", name}, {"digest", digest}});
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace sglab
