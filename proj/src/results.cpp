#include "multiscale/results.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace multiscale {

const char* version() noexcept { return "0.1.0"; }

void ResultTable::add(ResultRow row) {
    if (row.std_error < 0.0) throw std::invalid_argument("ResultTable: std_error must be >= 0");
    rows_.push_back(std::move(row));
}

const ResultRow& ResultTable::find(const std::string& experiment_id, std::optional<double> epsilon,
                                   const std::string& statistic_id) const {
    for (const auto& r : rows_)
        if (r.experiment_id == experiment_id && r.epsilon == epsilon && r.statistic_id == statistic_id) return r;
    throw std::out_of_range("ResultTable: no row " + experiment_id + "/" + statistic_id);
}

void ResultTable::append(const ResultTable& other) {
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::string format_double(double x) {
    if (std::isnan(x)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

CsvTable to_csv(const ResultTable& table) {
    CsvTable csv;
    csv.header = {"experiment_id", "epsilon", "statistic_id", "value", "std_error", "n", "censored_count"};
    for (const auto& r : table.rows())
        csv.rows.push_back({r.experiment_id, r.epsilon ? format_double(*r.epsilon) : "", r.statistic_id,
                            format_double(r.value), format_double(r.std_error), std::to_string(r.n),
                            std::to_string(r.censored_count)});
    return csv;
}

namespace {

void put_field(std::string& out, const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
        return;
    }
    out += '"';
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

void put_record(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        put_field(out, fields[i]);
    }
    out += "\r\n";
}

}  // namespace

std::string render_csv(const CsvTable& table) {
    std::string out;
    put_record(out, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw std::invalid_argument("render_csv: ragged row");
        put_record(out, row);
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << render_csv(table);
}

void emit_csv(const CsvTable& table, const std::filesystem::path& dir, const std::string& stem,
              const RunMetadata& meta) {
    std::filesystem::create_directories(dir);
    write_csv(dir / (stem + ".csv"), table);
    const nlohmann::json j = {{"seed", meta.seed},
                              {"version", version()},
                              {"config_hash", meta.config_hash},
                              {"command", meta.command},
                              {"csv", stem + ".csv"}};
    std::ofstream out(dir / (stem + ".meta.json"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write metadata in " + dir.string());
    out << j.dump(2) << '\n';
}

void emit_results(const ResultTable& table, const std::filesystem::path& dir, const std::string& stem,
                  const RunMetadata& meta) {
    emit_csv(to_csv(table), dir, stem, meta);
}

}  // namespace multiscale
