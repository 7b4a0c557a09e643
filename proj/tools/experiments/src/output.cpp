#include "qsync/experiments/output.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <array>
#include <cstdio>
#include <fstream>

#ifndef QSYNC_VERSION
#define QSYNC_VERSION "0.0.0"
#endif

namespace qsync::exp {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string format_number(double x) {
    if (x == 0.0) return "0";
    std::array<char, 32> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_number(row[c]);
        }
        out += '\n';
    }
    return out;
}

RunWriter::RunWriter(std::filesystem::path dir, std::string scenario)
    : dir_(std::move(dir)), scenario_(std::move(scenario)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
        throw ExperimentError("output_error", "cannot create output directory: " + ec.message(),
                              {{"path", dir_.string()}});
    }
}

void RunWriter::set_run_metadata(nlohmann::json meta) {
    std::lock_guard lock(mutex_);
    run_meta_ = std::move(meta);
}

void RunWriter::write(const std::string& name, const std::string& bytes) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ExperimentError("output_error", "cannot write output file", {{"path", path.string()}});
    files_.push_back({{"path", name}, {"sha256", sha256_hex(bytes)}});
}

void RunWriter::sidecar(const std::string& stem, const std::vector<std::string>& columns, std::size_t rows,
                        const nlohmann::json& file_meta) {
    nlohmann::json meta = run_meta_;
    meta["scenario"] = scenario_;
    meta["file"] = stem + ".csv";
    meta["columns"] = columns;
    meta["rows"] = rows;
    for (const auto& [k, v] : file_meta.items()) meta[k] = v;
    write(stem + ".json", meta.dump(2) + "\n");
}

void RunWriter::csv(const std::string& stem, const Table& table, const nlohmann::json& file_meta) {
    const std::string bytes = table.to_csv();
    std::lock_guard lock(mutex_);
    write(stem + ".csv", bytes);
    sidecar(stem, table.columns, table.rows.size(), file_meta);
}

void RunWriter::csv_text(const std::string& stem, const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows, const nlohmann::json& file_meta) {
    std::string bytes;
    for (std::size_t c = 0; c < columns.size(); ++c) bytes += (c ? "," : "") + columns[c];
    bytes += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) bytes += (c ? "," : "") + row[c];
        bytes += '\n';
    }
    std::lock_guard lock(mutex_);
    write(stem + ".csv", bytes);
    sidecar(stem, columns, rows.size(), file_meta);
}

void RunWriter::json(const std::string& stem, const nlohmann::json& content) {
    std::lock_guard lock(mutex_);
    write(stem + ".json", content.dump(2) + "\n");
}

void RunWriter::text(const std::string& name, const std::string& content) {
    std::lock_guard lock(mutex_);
    write(name, content);
}

void RunWriter::warn(const std::string& code, const std::string& message) {
    std::lock_guard lock(mutex_);
    warnings_.push_back({{"code", code}, {"message", message}});
}

nlohmann::json RunWriter::finish(const ParamSet& params, const nlohmann::json& extra) {
    std::lock_guard lock(mutex_);
    nlohmann::json manifest = {
        {"scenario", scenario_},
        {"params", params.to_json()},
        {"seed", params.seed()},
        {"files", files_},
        {"versions", version_info()},
        {"warnings", warnings_},
    };
    for (const auto& [k, v] : extra.items()) manifest[k] = v;
    const auto path = dir_ / "manifest.json";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << manifest.dump(2) << '\n';
    if (!f) throw ExperimentError("output_error", "cannot write manifest", {{"path", path.string()}});
    return manifest;
}

nlohmann::json version_info() {
    return {
        {"qsync", QSYNC_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                      std::to_string(BOOST_VERSION % 100)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__},
    };
}

}  // namespace qsync::exp
