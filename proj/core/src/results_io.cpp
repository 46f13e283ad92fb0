#include "tfi/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tfi {
namespace {

ReceiverKind parse_receiver(std::string_view name) {
    if (name == "tfi") return ReceiverKind::kTfi;
    if (name == "baseline") return ReceiverKind::kBaseline;
    throw std::runtime_error("unknown receiver: " + std::string(name));
}

double parse_real(const std::string& field) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
        throw std::runtime_error("malformed number: '" + field + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> row_fields(const SweepResultRow& r) {
    return {format_real(r.snr_db),
            std::to_string(r.g),
            std::string(to_string(r.scheme)),
            std::string(to_string(r.noise_model)),
            std::string(to_string(r.receiver)),
            std::to_string(r.trials),
            format_real(r.ber_mean),
            format_real(r.ber_stderr),
            format_real(r.mean_abs_sync_error),
            format_real(r.sync_error_std),
            format_real(r.miss_rate),
            format_real(r.cfo_rmse_hz),
            format_real(r.wall_time_s)};
}

SweepResultRow row_from_fields(const std::vector<std::string>& f) {
    constexpr std::size_t kColumns = std::size(kResultColumns);
    if (f.size() != kColumns) throw std::runtime_error("expected " + std::to_string(kColumns) + " fields");
    SweepResultRow r;
    r.snr_db = parse_real(f[0]);
    r.g = static_cast<int>(parse_real(f[1]));
    r.scheme = parse_scheme(f[2]);
    r.noise_model = parse_noise_model(f[3]);
    r.receiver = parse_receiver(f[4]);
    r.trials = static_cast<std::size_t>(parse_real(f[5]));
    r.ber_mean = parse_real(f[6]);
    r.ber_stderr = parse_real(f[7]);
    r.mean_abs_sync_error = parse_real(f[8]);
    r.sync_error_std = parse_real(f[9]);
    r.miss_rate = parse_real(f[10]);
    r.cfo_rmse_hz = parse_real(f[11]);
    r.wall_time_s = parse_real(f[12]);
    return r;
}

}  // namespace

ResultFormat parse_result_format(std::string_view name) {
    if (name == "csv") return ResultFormat::kCsv;
    if (name == "json") return ResultFormat::kJson;
    throw std::invalid_argument("unknown result format: " + std::string(name));
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string to_csv(std::span<const SweepResultRow> rows) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kResultColumns); ++i) {
        if (i) out += ',';
        out += kResultColumns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        const auto fields = row_fields(row);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }
    return out;
}

std::string to_json(std::span<const SweepResultRow> rows) {
    // Objects are written by hand so keys keep the documented column order and
    // reals keep exactly the CSV formatting.
    std::string out = "[";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto fields = row_fields(rows[r]);
        out += r ? ",\n  {" : "\n  {";
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ", ";
            out += nlohmann::json(std::string(kResultColumns[i])).dump();
            out += ": ";
            const bool text = i >= 2 && i <= 4;
            if (text)
                out += nlohmann::json(fields[i]).dump();
            else
                out += fields[i] == "nan" ? "null" : fields[i];
        }
        out += "}";
    }
    out += rows.empty() ? "]\n" : "\n]\n";
    return out;
}

std::vector<SweepResultRow> parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
    const auto header = split_fields(line);
    if (header.size() != std::size(kResultColumns)) throw std::runtime_error("CSV header has the wrong column count");
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != kResultColumns[i]) throw std::runtime_error("unexpected CSV column '" + header[i] + "'");

    std::vector<SweepResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(row_from_fields(split_fields(line)));
    }
    return rows;
}

std::vector<SweepResultRow> parse_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error("results JSON must be an array");
    std::vector<SweepResultRow> rows;
    for (const auto& obj : doc) {
        if (!obj.is_object()) throw std::runtime_error("results JSON entries must be objects");
        std::vector<std::string> fields;
        for (auto key : kResultColumns) {
            const auto it = obj.find(std::string(key));
            if (it == obj.end()) throw std::runtime_error("missing key '" + std::string(key) + "'");
            if (it->is_null()) {
                fields.emplace_back("nan");
            } else if (it->is_string()) {
                fields.push_back(it->get<std::string>());
            } else if (it->is_number()) {
                fields.push_back(format_real(it->get<double>()));
            } else {
                throw std::runtime_error("unexpected value for '" + std::string(key) + "'");
            }
        }
        rows.push_back(row_from_fields(fields));
    }
    return rows;
}

void emit_results(std::span<const SweepResultRow> rows, ResultFormat format, const std::filesystem::path& path) {
    if (rows.empty()) throw std::runtime_error("refusing to write an empty result table");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const std::string text = format == ResultFormat::kCsv ? to_csv(rows) : to_json(rows);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace tfi
