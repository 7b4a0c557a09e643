#include "common.hpp"

#include "qsync/heterodyne.hpp"
#include "qsync/parallel.hpp"

#include <cmath>

namespace qsync::exp {

using namespace detail;

const std::vector<ScenarioInfo>& scenarios() {
    static const std::vector<ScenarioInfo> list = {
        {"classical-lc", "fig1-fig3", "noisy classical van-der-Pol oscillator: trajectories, P(x,p), P(phi), linewidth",
         "sigma2", classical_lc_params, run_classical_lc, nullptr},
        {"classical-two", "fig4-fig5",
         "two coupled noisy phase oscillators: P(phi_AB), observed frequency difference, spectra", "delta",
         classical_two_params, run_classical_two, sweep_classical_two},
        {"qvdp-lc", "fig6", "quantum van-der-Pol oscillator: Husimi Q(x,p) and Q(phi) over time, steady state, spectrum",
         "kappa", qvdp_lc_params, run_qvdp_lc, nullptr},
        {"qvdp-traj", "fig7", "quantum van-der-Pol oscillator under heterodyne detection: trajectories, measured spectrum",
         "kappa", qvdp_traj_params, run_qvdp_traj, nullptr},
        {"qvdp-two", "fig8-fig9",
         "two coupled quantum van-der-Pol oscillators: Q(phi_AB), measured phase difference, spectra", "kappa2",
         qvdp_two_params, run_qvdp_two, sweep_qvdp_two},
        {"spin-lc", "fig10", "spin-1/2 limit cycle: Husimi Q(theta,phi) and Q(phi) over time, steady state, spectrum",
         "gamma_minus", spin_lc_params, run_spin_lc, nullptr},
        {"spin-traj", "fig10", "spin-1/2 limit cycle under heterodyne detection: trajectories, measured spectrum",
         "gamma_minus", spin_traj_params, run_spin_traj, nullptr},
        {"spin-two", "fig11-fig12", "two coupled spins-1/2: Q(phi_AB), measured phase difference, spectra",
         "gamma_minus", spin_two_params, run_spin_two, sweep_spin_two},
    };
    return list;
}

const ScenarioInfo& find_scenario(const std::string& id) {
    std::vector<std::string> ids;
    for (const auto& s : scenarios()) {
        if (s.id == id) return s;
        ids.push_back(s.id);
    }
    throw ExperimentError("unknown_scenario", "unknown scenario '" + id + "'", {{"scenario", id}, {"valid_ids", ids}});
}

std::filesystem::path output_dir(const RunOptions& opts, const std::string& id, bool sweep) {
    if (!opts.out.empty()) return opts.out;
    return std::filesystem::path("runs") / (sweep ? id + "-sweep" : id);
}

ParamSet resolve_params(const ScenarioInfo& info, const RunOptions& opts) {
    ParamSet p(info.params());
    if (opts.config) {
        for (const auto& [k, v] : read_ini_section(*opts.config, info.id)) p.set(k, v);
    }
    for (const auto& [k, v] : opts.overrides) p.set(k, v);
    if (opts.seed) p.set("seed", std::to_string(*opts.seed));
    return p;
}

namespace {

nlohmann::json base_metadata(const ScenarioInfo& info, const ParamSet& p) {
    const Tolerances tol{};
    return {
        {"unit", info.unit},
        {"params", p.to_json()},
        {"seed", p.seed()},
        {"tolerances",
         {{"trace", tol.trace},
          {"hermiticity", tol.hermiticity},
          {"min_eigenvalue", tol.min_eigenvalue},
          {"truncation_population", 1e-8}}},
    };
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
}

}  // namespace

nlohmann::json run_scenario(const std::string& id, const RunOptions& opts) {
    const auto& info = find_scenario(id);
    const ParamSet p = resolve_params(info, opts);
    RunWriter out(output_dir(opts, id), id);
    out.set_run_metadata(base_metadata(info, p));
    out.text("config.ini", p.to_ini(id));
    RunContext ctx{p, out, opts.strict, opts.threads};
    info.run(ctx);
    return out.finish(p, {{"unit", info.unit}, {"figures", info.figures}, {"strict", opts.strict}});
}

nlohmann::json run_sweep(const std::string& id, const SweepOptions& opts) {
    const auto& info = find_scenario(id);
    if (info.sweep_point == nullptr) {
        std::vector<std::string> ids;
        for (const auto& s : scenarios()) {
            if (s.sweep_point != nullptr) ids.push_back(s.id);
        }
        throw ExperimentError("sweep_unsupported", "scenario '" + id + "' has no (delta, V) sweep",
                              {{"scenario", id}, {"valid_ids", ids}});
    }
    if (opts.deltas.empty() || opts.couplings.empty()) {
        throw ExperimentError("invalid_axis", "sweep axes must not be empty");
    }
    const ParamSet base = resolve_params(info, opts.run);
    RunWriter out(output_dir(opts.run, id, true), id);
    out.set_run_metadata(base_metadata(info, base));
    out.text("config.ini", base.to_ini(id));

    struct Row {
        double delta = 0.0, V = 0.0;
        SweepValue value;
        std::string error;
    };
    std::vector<Row> rows;
    for (double d : opts.deltas) {
        for (double v : opts.couplings) rows.push_back({d, v, {}, {}});
    }
    parallel_for(
        rows.size(),
        [&](std::size_t i) {
            Row& r = rows[i];
            try {
                ParamSet q = base;
                q.set("delta", format_number(r.delta));
                q.set("V_list", format_number(r.V));
                r.value = info.sweep_point(q);
                if (opts.run.strict && r.value.top_population > 1e-8) {
                    throw ExperimentError("truncation", "truncated levels hold population " +
                                                            format_number(r.value.top_population));
                }
            } catch (...) {
                const auto report = describe_error(std::current_exception());
                r.error = report.body["error"]["code"].get<std::string>() + ": " +
                          report.body["error"]["message"].get<std::string>();
            }
        },
        opts.run.threads);

    std::vector<std::vector<std::string>> cells;
    std::size_t failed = 0;
    for (const auto& r : rows) {
        const bool ok = r.error.empty();
        failed += ok ? 0 : 1;
        cells.push_back({format_number(r.delta), format_number(r.V), ok ? format_number(r.value.max_value) : "nan",
                         ok ? format_number(r.value.top_population) : "nan", csv_field(r.error)});
    }
    out.csv_text("sweep", {"delta", "V", "max_value", "top_population", "error"}, cells,
                 {{"measure", "max of the phase-difference distribution"}, {"failed_points", failed}});
    return out.finish(base, {{"unit", info.unit},
                             {"figures", info.figures},
                             {"strict", opts.run.strict},
                             {"sweep", {{"deltas", opts.deltas}, {"couplings", opts.couplings}}}});
}

ErrorReport describe_error(std::exception_ptr error) {
    auto report = [](std::string code, const std::string& message, int exit_code) {
        return ErrorReport{{{"error", {{"code", std::move(code)}, {"message", message}}}}, exit_code};
    };
    try {
        std::rethrow_exception(error);
    } catch (const ExperimentError& e) {
        const std::string& c = e.code();
        int exit_code = 1;
        if (c.rfind("config_", 0) == 0 || c.rfind("unknown_", 0) == 0 || c.rfind("invalid_", 0) == 0 ||
            c == "sweep_unsupported") {
            exit_code = 2;
        } else if (c == "truncation") {
            exit_code = 3;
        }
        return {e.to_json(), exit_code};
    } catch (const lindblad::StepSizeError& e) {
        return report("step_size", e.what(), 3);
    } catch (const lindblad::ConvergenceError& e) {
        return report("convergence", e.what(), 3);
    } catch (const lindblad::DegenerateSteadyState& e) {
        return report("degenerate_steady_state", e.what(), 3);
    } catch (const InvariantViolation& e) {
        return report("invariant_violation", e.what(), 3);
    } catch (const std::invalid_argument& e) {
        return report("invalid_parameter", e.what(), 2);
    } catch (const std::exception& e) {
        return report("internal_error", e.what(), 1);
    } catch (...) {
        return report("internal_error", "unknown exception", 1);
    }
}

}  // namespace qsync::exp
