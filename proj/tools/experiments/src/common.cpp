#include "common.hpp"

#include <cmath>
#include <numbers>

namespace qsync::exp {

void RunContext::truncation(const std::string& where, double top_population, double threshold) const {
    if (top_population <= threshold) return;
    const std::string message = where + ": truncated levels hold population " + format_number(top_population) +
                                " (threshold " + format_number(threshold) + "); increase n_max";
    if (strict) {
        throw ExperimentError("truncation", message,
                              {{"where", where}, {"top_population", top_population}, {"threshold", threshold}});
    }
    out.warn("truncation", message);
}

}  // namespace qsync::exp

namespace qsync::exp::detail {

std::size_t at_least(const ParamSet& p, const std::string& key, std::size_t min) {
    const std::size_t v = p.count(key);
    if (v < min) {
        throw ExperimentError("invalid_parameter", "parameter '" + key + "' must be >= " + std::to_string(min),
                              {{"parameter", key}, {"value", v}});
    }
    return v;
}

void require_stable(const lindblad::Liouvillian& L, double dt) {
    if (dt > L.stable_dt()) {
        throw ExperimentError("invalid_parameter", "dt exceeds the stable RK4 step of this model",
                              {{"parameter", "dt"}, {"value", dt}, {"stable_dt", L.stable_dt()}});
    }
}

MeTrace trace_me(const lindblad::Liouvillian& L, const DensityOperator& rho0, double dt, double t_final,
                 std::size_t sample_every, const std::vector<Operator>& observables,
                 const std::vector<double>& snapshot_times) {
    require_stable(L, dt);
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    std::vector<std::size_t> snap_steps;
    for (double t : snapshot_times) {
        if (t < 0.0 || t > t_final + 0.5 * dt) {
            throw ExperimentError("invalid_parameter", "snapshot time outside [0, t_final]",
                                  {{"parameter", "snapshot_times"}, {"value", t}});
        }
        snap_steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
    }
    std::vector<Matrix> obs_t;
    for (const auto& o : observables) obs_t.push_back(o.matrix().transpose());

    MeTrace trace;
    Matrix rho = rho0.matrix();
    lindblad::Liouvillian::Workspace ws;
    for (std::size_t k = 0;; ++k) {
        if (k % sample_every == 0) {
            trace.times.push_back(static_cast<double>(k) * dt);
            std::vector<cplx> row;
            for (const auto& ot : obs_t) row.push_back(ot.cwiseProduct(rho).sum());
            trace.values.push_back(std::move(row));
        }
        for (std::size_t s : snap_steps) {
            if (s == k) {
                trace.snapshots.push_back({static_cast<double>(k) * dt, DensityOperator(Operator(rho), rho0.tolerances())});
            }
        }
        if (k == steps) break;
        L.rk4_step(rho, dt, ws);
    }
    trace.final_state = DensityOperator(Operator(rho), rho0.tolerances());
    return trace;
}

lindblad::SteadyState steady(RunContext& ctx, const lindblad::Liouvillian& L, const std::string& where) {
    lindblad::SteadyStateOptions o;
    // Integration wins over the dense null space well before the dense bound.
    o.method = L.dim() < 25 ? lindblad::SteadyStateMethod::NullSpace : lindblad::SteadyStateMethod::Integration;
    auto ss = lindblad::steady_state(L, o);
    if (ss.truncation_warning) ctx.truncation(where, ss.top_population, o.truncation_threshold);
    return ss;
}

nlohmann::json steady_summary(const lindblad::SteadyState& ss, const std::vector<std::pair<std::string, cplx>>& expect) {
    nlohmann::json j = {
        {"method", ss.method == lindblad::SteadyStateMethod::NullSpace ? "null_space" : "integration"},
        {"residual", ss.residual},
        {"top_population", ss.top_population},
        {"truncation_warning", ss.truncation_warning},
    };
    for (const auto& [k, v] : expect) j[k] = {{"re", v.real()}, {"im", v.imag()}};
    return j;
}

MeanSe mean_se(const std::vector<std::vector<double>>& series) {
    MeanSe r;
    if (series.empty()) return r;
    const std::size_t n = series.front().size();
    const auto m = static_cast<double>(series.size());
    r.mean.assign(n, 0.0);
    r.se.assign(n, 0.0);
    for (const auto& s : series) {
        for (std::size_t j = 0; j < n; ++j) r.mean[j] += s[j];
    }
    for (auto& v : r.mean) v /= m;
    if (series.size() < 2) return r;
    for (const auto& s : series) {
        for (std::size_t j = 0; j < n; ++j) r.se[j] += (s[j] - r.mean[j]) * (s[j] - r.mean[j]);
    }
    for (auto& v : r.se) v = std::sqrt(v / (m - 1.0) / m);
    return r;
}

void write_plane_surfaces(RunWriter& out, const std::string& stem, const std::vector<double>& times,
                          const std::vector<phase::QSurface>& surfaces, const nlohmann::json& meta) {
    Table t{{"t", "x", "p", "Q"}, {}};
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const auto& q = surfaces[s];
        for (std::size_t i = 0; i < q.axis1.size(); ++i) {
            for (std::size_t j = 0; j < q.axis2.size(); ++j) t.add({times[s], q.axis1[i], q.axis2[j], q.at(i, j)});
        }
    }
    out.csv(stem, t, meta);
}

void write_sphere_surfaces(RunWriter& out, const std::string& stem, const std::vector<double>& times,
                           const std::vector<phase::QSurface>& surfaces, const nlohmann::json& meta) {
    Table t{{"t", "theta", "phi", "Q"}, {}};
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const auto& q = surfaces[s];
        for (std::size_t i = 0; i < q.axis1.size(); ++i) {
            for (std::size_t j = 0; j < q.axis2.size(); ++j) t.add({times[s], q.axis1[i], q.axis2[j], q.at(i, j)});
        }
    }
    out.csv(stem, t, meta);
}

void write_phase_series(RunWriter& out, const std::string& stem, const std::string& key,
                        const std::vector<double>& keys, const std::vector<phase::PhaseSeries>& series,
                        const nlohmann::json& meta) {
    Table t{{key, "phi", "Q"}, {}};
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (std::size_t j = 0; j < series[s].size(); ++j) t.add({keys[s], series[s].phis[j], series[s].values[j]});
    }
    out.csv(stem, t, meta);
}

void write_histograms(RunWriter& out, const std::string& stem, const std::string& key,
                      const std::vector<double>& keys, const std::vector<HistogramDist>& hists,
                      const nlohmann::json& meta) {
    Table t{{key, "phi", "density", "std_error"}, {}};
    nlohmann::json counts = nlohmann::json::array();
    for (std::size_t s = 0; s < hists.size(); ++s) {
        const auto& h = hists[s];
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double se = h.std_errors.empty() ? std::nan("") : h.std_errors[i] / h.bin_measure(i);
            t.add({keys[s], h.bin_center(i), h.density(i), se});
        }
        counts.push_back({{key, keys[s]}, {"samples", h.samples}, {"skipped", h.skipped}});
    }
    nlohmann::json m = meta;
    m["counts"] = counts;
    out.csv(stem, t, m);
}

std::vector<double> omega_grid(double center, double half_width, std::size_t points) {
    return linspace(center - half_width, center + half_width, points);
}

std::vector<double> theta_axis(std::size_t n) { return linspace(0.0, std::numbers::pi, n); }

std::vector<double> phi_axis(std::size_t n) { return phase::PhaseGrid(n).phis(); }


MeasuredSpectra measured_spectra(const lindblad::Liouvillian& L, const std::vector<hetero::MonitoredChannel>& channels,
                                 const DensityOperator& rho_ss, const std::vector<double>& omegas,
                                 const MeasuredSpectraOptions& opts) {
    hetero::SmeOptions o;
    o.dt = opts.dt;
    o.t_final = opts.t_final;
    o.seed = opts.seed;
    o.store_every = opts.store_every;
    std::vector<hetero::HeterodyneRecord> records(opts.n_traj);
    hetero::run_sme_ensemble(L, channels, rho_ss, o, opts.n_traj, opts.threads,
                             [&](std::size_t i, hetero::HeterodyneRecord&& r) { records[i] = std::move(r); });

    lindblad::CorrelationOptions co;
    co.tau_max = opts.tau_max;
    co.d_tau = opts.d_tau;
    co.omegas = omegas;
    MeasuredSpectra out;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        out.measured.push_back(hetero::measured_spectrum(records, c, 0.0, opts.t_final, omegas));
        const auto cr = lindblad::correlation_spectrum(L, rho_ss, channels[c].op.adjoint(), channels[c].op, co);
        SpectrumSeries pr = cr.spectrum;
        for (auto& v : pr.values) v = channels[c].rate * v + 1.0;
        out.predicted.push_back(std::move(pr));
        out.tail_flags.push_back(cr.tail_flag);
    }
    return out;
}

void write_measured_spectra(RunWriter& out, const std::string& stem, const std::string& key,
                            const std::vector<double>& keys, const std::vector<MeasuredSpectra>& spectra,
                            const std::vector<std::string>& names, double bin_width, const nlohmann::json& meta) {
    std::vector<std::string> columns;
    if (!key.empty()) columns.push_back(key);
    columns.push_back("omega");
    for (const auto& n : names) {
        columns.push_back("P_" + n);
        columns.push_back("pred_" + n);
    }
    Table raw{columns, {}};
    Table binned{columns, {}};
    nlohmann::json tails = nlohmann::json::array();
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        const auto& sp = spectra[s];
        const double lo = sp.measured.front().omegas.front();
        const double hi = sp.measured.front().omegas.back() + 1e-9 * bin_width;
        std::vector<SpectrumSeries> mb, pb;
        for (std::size_t c = 0; c < names.size(); ++c) {
            mb.push_back(bin_average(sp.measured[c], bin_width, lo, hi));
            pb.push_back(bin_average(sp.predicted[c], bin_width, lo, hi));
            tails.push_back(sp.tail_flags[c]);
        }
        auto fill = [&](Table& t, const std::vector<SpectrumSeries>& m, const std::vector<SpectrumSeries>& pr) {
            for (std::size_t k = 0; k < m.front().size(); ++k) {
                std::vector<double> row;
                if (!key.empty()) row.push_back(keys[s]);
                row.push_back(m.front().omegas[k]);
                for (std::size_t c = 0; c < names.size(); ++c) {
                    row.push_back(m[c].values[k]);
                    row.push_back(pr[c].values[k]);
                }
                t.add(std::move(row));
            }
        };
        fill(raw, sp.measured, sp.predicted);
        fill(binned, mb, pb);
    }
    nlohmann::json m = meta;
    m["measured"] = "Bartlett periodogram of the heterodyne current, noise floor 1";
    m["predicted"] = "rate * S(omega) + 1";
    m["regression_tail_flags"] = tails;
    out.csv(stem, raw, m);
    m["bin_width"] = bin_width;
    out.csv(stem + "_binned", binned, m);
}


Unraveling unravel(const lindblad::Liouvillian& L, const std::vector<hetero::MonitoredChannel>& channels,
                   const DensityOperator& rho0, const std::vector<Operator>& observables,
                   const UnravelingOptions& opts) {
    hetero::SmeOptions o;
    o.dt = opts.dt;
    o.t_final = opts.t_final;
    o.seed = opts.seed;
    o.store_every = opts.store_every;
    o.observables = observables;
    const std::size_t n_obs = observables.size();
    std::vector<std::vector<std::vector<double>>> per(n_obs, std::vector<std::vector<double>>(opts.n_traj));
    std::vector<double> times;
    hetero::run_sme_ensemble(L, channels, rho0, o, opts.n_traj, opts.threads,
                             [&](std::size_t i, hetero::HeterodyneRecord&& r) {
                                 for (std::size_t k = 0; k < n_obs; ++k) {
                                     for (const auto& v : r.observables[k]) per[k][i].push_back(v.real());
                                 }
                                 if (i == 0) times = r.times;
                             });
    const auto trace = trace_me(L, rho0, opts.dt, opts.t_final, opts.store_every, observables, {});

    Unraveling u;
    const std::size_t n = std::min(times.size(), trace.times.size());
    u.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t k = 0; k < n_obs; ++k) {
        for (auto& s : per[k]) s.resize(n);
        u.stats.push_back(mean_se(per[k]));
        std::vector<double> me(n);
        for (std::size_t j = 0; j < n; ++j) me[j] = trace.values[j][k].real();
        u.me.push_back(std::move(me));
        const std::size_t shown = std::min(opts.shown, opts.n_traj);
        u.shown.emplace_back(per[k].begin(), per[k].begin() + static_cast<std::ptrdiff_t>(shown));
    }
    return u;
}

void write_unraveling(RunWriter& out, const Unraveling& u, const std::vector<std::string>& names) {
    Table ens;
    Table traj;
    ens.columns.push_back("t");
    traj.columns.push_back("t");
    for (std::size_t k = 0; k < names.size(); ++k) {
        ens.columns.insert(ens.columns.end(), {names[k] + "_mean", names[k] + "_se", names[k] + "_me"});
        for (std::size_t i = 0; i < u.shown[k].size(); ++i) traj.columns.push_back(names[k] + "_" + std::to_string(i));
    }
    nlohmann::json summary = nlohmann::json::object();
    std::vector<double> max_z(names.size(), 0.0);
    std::vector<std::size_t> within(names.size(), 0), tested(names.size(), 0);
    for (std::size_t j = 0; j < u.times.size(); ++j) {
        std::vector<double> er{u.times[j]};
        std::vector<double> tr{u.times[j]};
        for (std::size_t k = 0; k < names.size(); ++k) {
            const double mean = u.stats[k].mean[j];
            const double se = u.stats[k].se[j];
            er.insert(er.end(), {mean, se, u.me[k][j]});
            for (const auto& s : u.shown[k]) tr.push_back(s[j]);
            if (se > 0.0) {
                const double z = std::abs(mean - u.me[k][j]) / se;
                max_z[k] = std::max(max_z[k], z);
                within[k] += z <= 3.0 ? 1 : 0;
                ++tested[k];
            }
        }
        ens.add(std::move(er));
        traj.add(std::move(tr));
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
        summary[names[k]] = {{"max_abs_z", max_z[k]},
                             {"fraction_within_3se",
                              tested[k] ? static_cast<double>(within[k]) / static_cast<double>(tested[k]) : 1.0}};
    }
    out.csv("ensemble", ens, {{"mean", "conditional expectation averaged over trajectories"},
                              {"me", "unconditional master-equation expectation"}});
    out.csv("trajectories", traj, {});
    out.json("unraveling", summary);
}

}  // namespace qsync::exp::detail
