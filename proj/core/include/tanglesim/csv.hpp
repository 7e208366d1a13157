#pragma once

#include <filesystem>
#include <string>

#include "tanglesim/config.hpp"
#include "tanglesim/equilibrium.hpp"

namespace tanglesim {

/// Writes to a sibling temp file and renames into place, so a failed write
/// never leaves a partial file behind. Throws IoError.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Fixed column orders; times with six decimals, absent values empty.
std::string transactions_csv(const SimOutput& output);
std::string series_csv(std::span<const SeriesSample> series,
                       const char* value_header);
std::string costs_csv(const CostCurves& curves);
std::string point_costs_csv(const CostCurves& curves, std::size_t point);
std::string cdf_csv(std::span<const double> grid, std::span<const double> cdf);
std::string little_csv(const LittleResult& result, double lambda, double k);
std::string equilibrium_csv(const CostCurves& curves,
                            const EquilibriumReport& report);

}  // namespace tanglesim
