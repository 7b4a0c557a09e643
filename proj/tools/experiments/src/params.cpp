#include "qsync/experiments/params.hpp"

#include "qsync/series.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace qsync::exp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

std::string kind_name(ParamKind k) {
    switch (k) {
        case ParamKind::Real: return "real";
        case ParamKind::NonNegative: return "real >= 0";
        case ParamKind::Positive: return "real > 0";
        case ParamKind::Count: return "integer >= 0";
        case ParamKind::RealList: return "comma-separated reals";
    }
    return "?";
}

bool valid(ParamKind kind, const std::string& value) {
    double x = 0.0;
    switch (kind) {
        case ParamKind::Real: return parse_number(value, x);
        case ParamKind::NonNegative: return parse_number(value, x) && x >= 0.0;
        case ParamKind::Positive: return parse_number(value, x) && x > 0.0;
        case ParamKind::Count: {
            const std::string t = trim(value);
            std::uint64_t n = 0;
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
            return !t.empty() && ec == std::errc{} && ptr == t.data() + t.size();
        }
        case ParamKind::RealList: {
            if (trim(value).empty()) return true;
            for (const auto& part : split(value, ','))
                if (!parse_number(part, x)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace

ExperimentError::ExperimentError(std::string code, const std::string& message, nlohmann::json details)
    : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

nlohmann::json ExperimentError::to_json() const {
    nlohmann::json body = {{"code", code_}, {"message", what()}};
    for (const auto& [k, v] : details_.items()) body[k] = v;
    return {{"error", body}};
}

ParamSet::ParamSet(std::vector<ParamSpec> specs) : specs_(std::move(specs)) {
    for (const auto& s : specs_) values_[s.name] = s.default_value;
}

void ParamSet::set(const std::string& key, const std::string& value) {
    for (const auto& s : specs_) {
        if (s.name != key) continue;
        if (!valid(s.kind, value)) {
            throw ExperimentError("invalid_parameter", "parameter '" + key + "' expects " + kind_name(s.kind),
                                  {{"parameter", key}, {"value", value}});
        }
        values_[key] = trim(value);
        return;
    }
    std::vector<std::string> names;
    for (const auto& s : specs_) names.push_back(s.name);
    throw ExperimentError("unknown_parameter", "unknown parameter '" + key + "'",
                          {{"parameter", key}, {"valid_parameters", names}});
}

const std::string& ParamSet::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::logic_error("ParamSet: undeclared parameter " + key);
    return it->second;
}

double ParamSet::real(const std::string& key) const {
    double x = 0.0;
    parse_number(raw(key), x);
    return x;
}

std::size_t ParamSet::count(const std::string& key) const {
    const std::string t = trim(raw(key));
    std::uint64_t n = 0;
    std::from_chars(t.data(), t.data() + t.size(), n);
    return static_cast<std::size_t>(n);
}

std::vector<double> ParamSet::list(const std::string& key) const {
    std::vector<double> out;
    if (trim(raw(key)).empty()) return out;
    for (const auto& part : split(raw(key), ',')) {
        double x = 0.0;
        parse_number(part, x);
        out.push_back(x);
    }
    return out;
}

nlohmann::json ParamSet::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : specs_) {
        switch (s.kind) {
            case ParamKind::Count: j[s.name] = count(s.name); break;
            case ParamKind::RealList: j[s.name] = list(s.name); break;
            default: j[s.name] = real(s.name); break;
        }
    }
    return j;
}

std::string ParamSet::to_ini(const std::string& section) const {
    std::ostringstream out;
    out << '[' << section << "]\n";
    for (const auto& s : specs_) out << s.name << " = " << raw(s.name) << '\n';
    return out.str();
}

std::vector<std::pair<std::string, std::string>> read_ini_section(const std::filesystem::path& file,
                                                                  const std::string& section) {
    if (!std::filesystem::exists(file)) {
        throw ExperimentError("config_not_found", "config file not found", {{"path", file.string()}});
    }
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(file.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ExperimentError("config_parse_error", e.message(), {{"path", file.string()}, {"line", e.line()}});
    }
    const auto child = tree.get_child_optional(boost::property_tree::ptree::path_type(section, '\0'));
    if (!child) {
        throw ExperimentError("config_section_missing", "config has no [" + section + "] section",
                              {{"path", file.string()}, {"section", section}});
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, node] : *child) out.emplace_back(key, node.get_value<std::string>());
    return out;
}

std::vector<double> parse_axis(const std::string& text) {
    const auto parts = split(text, ':');
    auto fail = [&] {
        return ExperimentError("invalid_axis", "axis must be 'lo:hi:n' or a comma-separated list", {{"axis", text}});
    };
    if (parts.size() == 3) {
        double lo = 0.0;
        double hi = 0.0;
        double n = 0.0;
        if (!parse_number(parts[0], lo) || !parse_number(parts[1], hi) || !parse_number(parts[2], n) || n < 1.0 ||
            n != std::floor(n)) {
            throw fail();
        }
        if (n == 1.0) return {lo};
        return linspace(lo, hi, static_cast<std::size_t>(n));
    }
    if (parts.size() != 1) throw fail();
    std::vector<double> values;
    for (const auto& p : split(text, ',')) {
        double x = 0.0;
        if (!parse_number(p, x)) throw fail();
        values.push_back(x);
    }
    if (values.empty()) throw fail();
    return values;
}

}  // namespace qsync::exp
