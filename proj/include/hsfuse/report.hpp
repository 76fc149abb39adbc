#pragma once

#include "hsfuse/wald.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace hsfuse {

enum class ReportFormat { csv, json };

/// "method,CC,SAM,RMSE,ERGAS,time_s" plus one row per method; failed methods get nan metrics.
std::string report_csv(const BenchmarkReport& report);

/// Config echo, metrics, per-band RMSE, solver settings and percentile spectra.
nlohmann::json report_json(const BenchmarkReport& report);

/// Inverse of report_json (images are not serialized and come back empty).
BenchmarkReport report_from_json(const nlohmann::json& j);

void emit_report(const BenchmarkReport& report, const std::filesystem::path& path, ReportFormat format);

/// RMSE maps (ENVI) and percentile spectra (CSV) for every successful method.
void write_artifacts(const BenchmarkReport& report, const std::filesystem::path& dir);

}  // namespace hsfuse
