#include "jumpctl/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "jumpctl/errors.hpp"

namespace jumpctl {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_manifest(const RunManifest& manifest, const std::string& file) {
    nlohmann::json j;
    char hash[19];
    std::snprintf(hash, sizeof(hash), "0x%016llx",
                  static_cast<unsigned long long>(manifest.config_hash));
    j["config_hash"] = hash;
    j["version"] = manifest.version;
    j["wall_time_s"] = manifest.wall_time_s;
    j["job_seeds"] = manifest.job_seeds;
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file);
    out << j.dump(2) << "\n";
}

}  // namespace jumpctl
