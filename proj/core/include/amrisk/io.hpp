#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace amrisk {

void ensure_directory(const std::string& path);

/// FNV-1a, used to stamp result bundles with their config.
std::uint64_t fnv1a_hash(const std::string& text);

void write_pairs_csv(const std::vector<std::pair<double, double>>& pairs,
                     const std::string& header, const std::string& path);

void write_columns_csv(const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& columns,
                       const std::string& path);

}  // namespace amrisk
