#include "qsync/experiments/scenario.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using namespace qsync::exp;

struct CommonArgs {
    std::string scenario;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool strict = false;
    unsigned threads = 0;
    std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("scenario", a.scenario, "scenario id (see `qsync list`)")->required();
    cmd->add_option("--config", a.config, "INI file; the section named after the scenario supplies parameters");
    cmd->add_option("--out", a.out, "output directory (default runs/<scenario>)");
    cmd->add_option("--seed", a.seed, "master seed, overrides the config");
    cmd->add_flag("--strict", a.strict, "treat truncation warnings as errors");
    cmd->add_option("--set", a.set, "parameter override key=value (repeatable)");
    cmd->add_option("--threads", a.threads, "worker threads, 0 for all cores");
}

RunOptions to_options(const CommonArgs& a, const CLI::App* cmd) {
    RunOptions o;
    o.out = a.out;
    if (!a.config.empty()) o.config = a.config;
    if (cmd->count("--seed") > 0) o.seed = a.seed;
    o.strict = a.strict;
    o.threads = a.threads;
    for (const auto& kv : a.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ExperimentError("invalid_override", "--set expects key=value", {{"value", kv}});
        }
        o.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return o;
}

void print_list(bool as_json) {
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : scenarios()) {
            j.push_back({{"id", s.id},
                         {"figures", s.figures},
                         {"summary", s.summary},
                         {"unit", s.unit},
                         {"sweep", s.sweep_point != nullptr}});
        }
        std::cout << j.dump(2) << '\n';
        return;
    }
    for (const auto& s : scenarios()) {
        std::cout << s.id << "\t" << s.figures << "\t" << s.summary << (s.sweep_point ? " [sweep]" : "") << '\n';
    }
}

void report(const nlohmann::json& manifest, const std::filesystem::path& dir) {
    for (const auto& w : manifest["warnings"]) std::cerr << "warning: " << w["message"].get<std::string>() << '\n';
    std::cout << "wrote " << manifest["files"].size() << " files and manifest.json to " << dir.string() << '\n';
}

int fail(const ErrorReport& r) {
    std::cerr << r.body.dump() << '\n';
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsync: synchronization scenarios for classical and quantum limit-cycle oscillators"};
    app.require_subcommand(1);

    bool list_json = false;
    auto* list = app.add_subcommand("list", "print scenario ids and the figures they produce");
    list->add_flag("--json", list_json, "machine-readable output");

    std::string config_id;
    auto* config = app.add_subcommand("config", "print the default configuration of a scenario as INI");
    config->add_option("scenario", config_id, "scenario id")->required();

    CommonArgs run_args;
    auto* run = app.add_subcommand("run", "run one scenario and write its output directory");
    add_common(run, run_args);

    CommonArgs sweep_args;
    std::string delta_axis;
    std::string v_axis;
    auto* sweep = app.add_subcommand("sweep", "tabulate the phase-locking measure over a (delta, V) grid");
    add_common(sweep, sweep_args);
    sweep->add_option("--delta", delta_axis, "detuning axis, lo:hi:n or a comma list")->required();
    sweep->add_option("--V", v_axis, "coupling axis, lo:hi:n or a comma list")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail({{{"error", {{"code", "usage_error"}, {"message", e.what()}}}}, 2});
    }

    try {
        if (list->parsed()) {
            print_list(list_json);
        } else if (config->parsed()) {
            const auto& info = find_scenario(config_id);
            std::cout << ParamSet(info.params()).to_ini(info.id);
        } else if (run->parsed()) {
            const auto opts = to_options(run_args, run);
            report(run_scenario(run_args.scenario, opts), output_dir(opts, run_args.scenario));
        } else if (sweep->parsed()) {
            SweepOptions so;
            so.run = to_options(sweep_args, sweep);
            so.deltas = parse_axis(delta_axis);
            so.couplings = parse_axis(v_axis);
            report(run_sweep(sweep_args.scenario, so), output_dir(so.run, sweep_args.scenario, true));
        }
    } catch (...) {
        return fail(describe_error(std::current_exception()));
    }
    return 0;
}
