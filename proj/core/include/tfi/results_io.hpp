#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfi/harness.hpp"

namespace tfi {

enum class ResultFormat { kCsv, kJson };
ResultFormat parse_result_format(std::string_view name);

/// Column order of the CSV header and the key order of each JSON object.
inline constexpr std::string_view kResultColumns[] = {
    "snr_db",     "g",                   "scheme",         "noise_model", "receiver",
    "trials",     "ber_mean",            "ber_stderr",     "mean_abs_sync_error",
    "sync_error_std", "miss_rate",       "cfo_rmse_hz",    "wall_time_s"};

/// Reals use 9 significant digits ("%.9g"); NaN prints as "nan" in CSV and
/// null in JSON.
std::string format_real(double v);

std::string to_csv(std::span<const SweepResultRow> rows);
std::string to_json(std::span<const SweepResultRow> rows);

/// Inverse of to_csv / to_json; throws std::runtime_error on malformed input.
std::vector<SweepResultRow> parse_csv(std::string_view text);
std::vector<SweepResultRow> parse_json(std::string_view text);

/// Writes the table to `path`; std::runtime_error on an empty table or I/O failure.
void emit_results(std::span<const SweepResultRow> rows, ResultFormat format, const std::filesystem::path& path);

}  // namespace tfi
