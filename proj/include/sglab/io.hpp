#pragma once

#include <string>
#include <vector>

#include "sglab/geometry.hpp"

namespace sglab {

// CSV with header "x0,...,x{d-1}", one point per row, full double precision.
void write_point_cloud_csv(const std::string& path, const PointCloud& cloud);
PointCloud read_point_cloud_csv(const std::string& path);

// Compact binary dump: magic "SGPC", version byte, u32 dimension, u64 count,
// then row-major IEEE-754 doubles, all little-endian.
void write_point_cloud_sgpc(const std::string& path, const PointCloud& cloud);
PointCloud read_point_cloud_sgpc(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// FNV-1a digest of the file bytes, as 16 hex characters.
std::string file_digest(const std::string& path);

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    long long started_unix = 0;
    long long finished_unix = 0;
    std::vector<std::pair<std::string, std::string>> files;  // (name, digest)
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace sglab
