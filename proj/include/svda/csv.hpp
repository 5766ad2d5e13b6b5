#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "svda/harness.hpp"

namespace svda::csv {

/// Shortest %.17g-style rendering: '.' decimal separator, locale-free,
/// round-trip exact for every finite double.
std::string format_double(double v);

// All writers emit LF line endings (files opened in binary mode) and the
// exact header, so identical inputs give byte-identical files.

void write_epochs(const std::filesystem::path& path, const std::vector<EpochLog>& logs);

/// One row per indicator sample; indicators a mechanism cannot define
/// (sigma-based ones on the baseline) simply have no rows.
void write_indicators(const std::filesystem::path& path, const std::vector<EpochLog>& logs);

struct MetricsRow {
  std::string mechanism;
  DepthMetrics metrics;
};

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

void write_layerwise(const std::filesystem::path& path, const std::vector<LayerwiseRow>& rows);

void write_trends(const std::filesystem::path& path, const std::vector<TrendRow>& rows);

/// Paired epoch logs of a two-mechanism run, svda rows first.
void write_compare(const std::filesystem::path& path, const CompareResult& result);

}  // namespace svda::csv
