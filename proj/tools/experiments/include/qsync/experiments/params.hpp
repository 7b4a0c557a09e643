#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsync::exp {

/// Failure reported to CLI users as {"error": {"code": ..., "message": ..., ...details}}.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(std::string code, const std::string& message, nlohmann::json details = nlohmann::json::object());

    [[nodiscard]] const std::string& code() const noexcept { return code_; }
    [[nodiscard]] const nlohmann::json& details() const noexcept { return details_; }
    [[nodiscard]] nlohmann::json to_json() const;

private:
    std::string code_;
    nlohmann::json details_;
};

enum class ParamKind {
    Real,         // any finite number
    NonNegative,  // rates, noise strengths
    Positive,     // step sizes, durations, widths
    Count,        // integer >= 0
    RealList,     // comma-separated finite numbers
};

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::Real;
    std::string default_value;
    std::string help;
};

/// Effective parameters of one scenario run: defaults, then config-file
/// values, then command-line overrides. Every key must be declared.
class ParamSet {
public:
    explicit ParamSet(std::vector<ParamSpec> specs);

    /// Throws ExperimentError "unknown_parameter" or "invalid_parameter".
    void set(const std::string& key, const std::string& value);

    [[nodiscard]] double real(const std::string& key) const;
    [[nodiscard]] std::size_t count(const std::string& key) const;
    [[nodiscard]] int integer(const std::string& key) const { return static_cast<int>(count(key)); }
    [[nodiscard]] std::vector<double> list(const std::string& key) const;
    [[nodiscard]] std::uint64_t seed() const { return static_cast<std::uint64_t>(count("seed")); }

    [[nodiscard]] const std::vector<ParamSpec>& specs() const noexcept { return specs_; }
    /// Typed values in declaration order.
    [[nodiscard]] nlohmann::json to_json() const;
    /// One INI section holding every value, readable by read_ini_section.
    [[nodiscard]] std::string to_ini(const std::string& section) const;

private:
    [[nodiscard]] const std::string& raw(const std::string& key) const;

    std::vector<ParamSpec> specs_;
    std::map<std::string, std::string> values_;
};

/// Key/value pairs of [section] in an INI file. A missing file throws
/// "config_not_found"; a missing section throws "config_section_missing".
[[nodiscard]] std::vector<std::pair<std::string, std::string>> read_ini_section(const std::filesystem::path& file,
                                                                                const std::string& section);

/// Parses "lo:hi:n" into n evenly spaced values, or a comma-separated list.
[[nodiscard]] std::vector<double> parse_axis(const std::string& text);

}  // namespace qsync::exp
