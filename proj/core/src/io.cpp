#include "amrisk/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace amrisk {

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void write_pairs_csv(const std::vector<std::pair<double, double>>& pairs,
                     const std::string& header, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << header << '\n' << std::setprecision(12);
    for (const auto& [a, b] : pairs) f << a << ',' << b << '\n';
}

void write_columns_csv(const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& columns,
                       const std::string& path) {
    if (names.size() != columns.size() || columns.empty()) {
        throw std::invalid_argument("write_columns_csv: malformed columns");
    }
    const std::size_t n = columns.front()->size();
    for (const auto* col : columns) {
        if (col->size() != n) throw std::invalid_argument("write_columns_csv: ragged columns");
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    for (std::size_t k = 0; k < names.size(); ++k) {
        f << names[k] << (k + 1 < names.size() ? ',' : '\n');
    }
    f << std::setprecision(12);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            f << (*columns[k])[i] << (k + 1 < columns.size() ? ',' : '\n');
        }
    }
}

}  // namespace amrisk
