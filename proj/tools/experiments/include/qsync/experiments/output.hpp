#pragma once

#include "qsync/experiments/params.hpp"

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace qsync::exp {

/// Lowercase hex SHA-256 of a byte string.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);

/// Shortest round-trip decimal form of a double ("%.17g").
[[nodiscard]] std::string format_number(double x);

/// Column-oriented numeric table.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) { rows.push_back(std::move(row)); }
    [[nodiscard]] std::string to_csv() const;
};

/// Single writer for one run directory. Every file goes through here so the
/// manifest lists it with its hash; CSV files get a `<stem>.json` sidecar
/// carrying the shared run metadata plus per-file fields.
class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string scenario);

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Metadata merged into every sidecar (model parameters, n_max, dt, tolerances).
    void set_run_metadata(nlohmann::json meta);

    void csv(const std::string& stem, const Table& table, const nlohmann::json& file_meta = nlohmann::json::object());
    /// CSV whose cells are preformatted strings (mixed numeric/text columns).
    void csv_text(const std::string& stem, const std::vector<std::string>& columns,
                  const std::vector<std::vector<std::string>>& rows,
                  const nlohmann::json& file_meta = nlohmann::json::object());
    void json(const std::string& stem, const nlohmann::json& content);
    void text(const std::string& name, const std::string& content);

    void warn(const std::string& code, const std::string& message);
    [[nodiscard]] const nlohmann::json& warnings() const noexcept { return warnings_; }

    /// Writes manifest.json and returns its content.
    nlohmann::json finish(const ParamSet& params, const nlohmann::json& extra = nlohmann::json::object());

private:
    void write(const std::string& name, const std::string& bytes);
    void sidecar(const std::string& stem, const std::vector<std::string>& columns, std::size_t rows,
                 const nlohmann::json& file_meta);

    std::filesystem::path dir_;
    std::string scenario_;
    nlohmann::json run_meta_ = nlohmann::json::object();
    nlohmann::json files_ = nlohmann::json::array();
    nlohmann::json warnings_ = nlohmann::json::array();
    std::mutex mutex_;
};

/// Library versions recorded in manifests.
[[nodiscard]] nlohmann::json version_info();

}  // namespace qsync::exp
