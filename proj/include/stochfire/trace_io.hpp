#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stochfire/ensemble.hpp"
#include "stochfire/forecasters.hpp"
#include "stochfire/sim.hpp"

namespace stochfire {

// Binary containers. "FFCA" holds one simulation trace (header + state bytes
// in t-major, row-major order; heat is transient and never persisted).
// "FFST" holds a probability map (statistic or forecast) as 32-bit floats.
// Both are little-endian and bit-exact: writing the result of a read
// reproduces the original file.

inline constexpr std::uint16_t kFfcaVersion = 1;
inline constexpr std::uint16_t kFfstVersion = 1;

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_trace(const SimulationTrace& trace);
SimulationTrace decode_trace(const std::vector<std::uint8_t>& bytes,
                             const std::string& origin = "buffer");
void write_trace(const std::filesystem::path& path, const SimulationTrace& trace);
SimulationTrace read_trace(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_stat_map(const MicroStatMap& map);
MicroStatMap decode_stat_map(const std::vector<std::uint8_t>& bytes,
                             const std::string& origin = "buffer");
void write_stat_map(const std::filesystem::path& path, const MicroStatMap& map);
MicroStatMap read_stat_map(const std::filesystem::path& path);

// Forecasts share the FFST container; kind/provenance are not persisted, so
// maps loaded from disk carry no holdout guard.
void write_forecast(const std::filesystem::path& path, const ForecastMap& forecast);
ForecastMap read_forecast(const std::filesystem::path& path);

// *.ffca files directly inside dir, sorted by filename.
std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir);

}  // namespace stochfire
