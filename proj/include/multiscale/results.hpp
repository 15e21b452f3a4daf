#pragma once

// Result tables and their RFC-4180 CSV form with a JSON metadata sidecar.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace multiscale {

struct ResultRow {
    std::string experiment_id;
    std::optional<double> epsilon;  // blank for ε-independent statistics
    std::string statistic_id;
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::size_t censored_count = 0;
};

class ResultTable {
public:
    void add(ResultRow row);
    const std::vector<ResultRow>& rows() const noexcept { return rows_; }
    /// First row matching the key; throws std::out_of_range when absent.
    const ResultRow& find(const std::string& experiment_id, std::optional<double> epsilon,
                          const std::string& statistic_id) const;
    void append(const ResultTable& other);

private:
    std::vector<ResultRow> rows_;
};

/// Plain table of strings with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Shortest representation that parses back to the same double; "" for NaN.
std::string format_double(double x);

CsvTable to_csv(const ResultTable& table);
/// RFC-4180: CRLF line ends, fields quoted when they contain , " CR or LF.
std::string render_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

struct RunMetadata {
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string command;
};

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.meta.json`.
void emit_results(const ResultTable& table, const std::filesystem::path& dir, const std::string& stem,
                  const RunMetadata& meta);
void emit_csv(const CsvTable& table, const std::filesystem::path& dir, const std::string& stem,
              const RunMetadata& meta);

/// Library version string.
const char* version() noexcept;

}  // namespace multiscale
