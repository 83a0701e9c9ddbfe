#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jumpctl {

// FNV-1a over the raw bytes; stable across platforms for identical text.
std::uint64_t fnv1a64(std::string_view text);

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::string version;
    double wall_time_s = 0.0;
    std::vector<std::uint64_t> job_seeds;
};

void write_manifest(const RunManifest& manifest, const std::string& file);

}  // namespace jumpctl
