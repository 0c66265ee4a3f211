#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace stochfire {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

// Reproducibility record written next to every command's outputs: resolved
// config, seeds, format versions and FNV-1a64 digests of the files read and
// written. The digests are what rerun comparisons check; the timestamp is
// informational.
class ManifestBuilder {
public:
    ManifestBuilder(std::string command, nlohmann::json resolved_config);

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void set_failure(const std::string& message);
    void set_extra(const std::string& key, nlohmann::json value);

    nlohmann::json build() const;
    void write(const std::filesystem::path& path) const;

private:
    nlohmann::json manifest_;
};

std::string fnv1a64_hex(std::uint64_t digest);

}  // namespace stochfire
