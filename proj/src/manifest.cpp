#include "stochfire/manifest.hpp"

#include <chrono>
#include <ctime>

#include "stochfire/config_json.hpp"
#include "stochfire/rng.hpp"
#include "stochfire/trace_io.hpp"

namespace stochfire {

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string fnv1a64_hex(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = hex[digest & 0xf];
        digest >>= 4;
    }
    return s;
}

ManifestBuilder::ManifestBuilder(std::string command, nlohmann::json resolved_config) {
    manifest_["tool_version"] = kToolVersion;
    manifest_["format_versions"] = {{"ffca", kFfcaVersion},
                                    {"ffst", kFfstVersion},
                                    {"config_schema", kConfigSchemaVersion}};
    manifest_["rng_scheme"] = kRngSchemeName;
    manifest_["command"] = std::move(command);
    manifest_["config"] = std::move(resolved_config);
    manifest_["inputs"] = nlohmann::json::array();
    manifest_["outputs"] = nlohmann::json::array();
    manifest_["created_at"] = utc_now_iso8601();
    manifest_["status"] = "ok";
}

void ManifestBuilder::add_input(const std::filesystem::path& path) {
    manifest_["inputs"].push_back({{"path", path.filename().string()},
                                   {"fnv1a64", fnv1a64_hex(fnv1a64_file(path))}});
}

void ManifestBuilder::add_output(const std::filesystem::path& path) {
    manifest_["outputs"].push_back({{"path", path.filename().string()},
                                    {"fnv1a64", fnv1a64_hex(fnv1a64_file(path))}});
}

void ManifestBuilder::set_failure(const std::string& message) {
    manifest_["status"] = "failed";
    manifest_["failure"] = message;
}

void ManifestBuilder::set_extra(const std::string& key, nlohmann::json value) {
    manifest_[key] = std::move(value);
}

nlohmann::json ManifestBuilder::build() const { return manifest_; }

void ManifestBuilder::write(const std::filesystem::path& path) const {
    write_json_file(path, manifest_);
}

}  // namespace stochfire
