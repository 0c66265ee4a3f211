#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stochfire {

// Shortest decimal string that round-trips the exact double; NaN and
// missing values render as empty cells (the NA convention).
std::string csv_num(double v);
std::string csv_num(long long v);
std::string csv_num(std::optional<double> v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace stochfire
