#include "stochfire/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "stochfire/errors.hpp"

namespace stochfire {

std::string csv_num(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_num(long long v) { return std::to_string(v); }

std::string csv_num(std::optional<double> v) { return v ? csv_num(*v) : std::string(); }

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header.size()) {
        throw InternalError("CSV row width disagrees with its header");
    }
    rows.push_back(std::move(cells));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace stochfire
