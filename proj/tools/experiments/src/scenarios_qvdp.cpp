#include "common.hpp"

#include "qsync/heterodyne.hpp"
#include "qsync/random.hpp"

#include <cmath>
#include <limits>

namespace qsync::exp::detail {

using lindblad::Liouvillian;

namespace {

std::vector<ParamSpec> single_mode_physics() {
    return {
        seed_spec(),
        real("omega", "4", "oscillation frequency"),
        rate("kappa1", "4", "one-phonon gain"),
        rate("kappa2", "0.5", "two-phonon loss"),
        rate("kappa", "1", "one-phonon loss, the monitored channel"),
        count("n_max", "24", "Fock truncation"),
        real("alpha0_re", "2", "initial coherent amplitude, real part"),
        real("alpha0_im", "0", "initial coherent amplitude, imaginary part"),
        positive("dt", "0.001", "integration step"),
        positive("t_final", "10", "duration of the time evolution"),
    };
}

Liouvillian single_mode(const ParamSet& p) {
    return Liouvillian(lindblad::build_qvdp_model(p.real("omega"), p.real("kappa1"), p.real("kappa2"), p.real("kappa"),
                                                  static_cast<int>(at_least(p, "n_max", 1))));
}

DensityOperator initial_coherent(RunContext& ctx, int n_max) {
    const auto& p = ctx.params;
    const auto ck = coherent_ket({p.real("alpha0_re"), p.real("alpha0_im")}, n_max);
    if (ck.truncation_warning) ctx.truncation("initial coherent state", ck.truncated_weight, kCoherentTruncationThreshold);
    return DensityOperator::pure(ck.ket);
}

std::vector<double> plane_axis(const ParamSet& p) {
    const double e = p.real("q_extent");
    return linspace(-e, e, at_least(p, "q_points", 2));
}

void warn_q_grid(RunContext& ctx, const std::vector<phase::QSurface>& qs, const std::string& what) {
    for (const auto& q : qs) {
        if (q.beyond_truncation) {
            ctx.out.warn("q_grid_beyond_truncation", what + ": grid reaches beyond the trusted coherent-state radius");
            return;
        }
    }
}

}  // namespace

std::vector<ParamSpec> qvdp_lc_params() {
    auto s = single_mode_physics();
    s.insert(s.end(), {
                          count("sample_every", "10", "steps per stored expectation sample"),
                          list("snapshot_times", "0,0.5,1.5,10", "times of the Q snapshots"),
                          positive("q_extent", "4", "Q(x,p) grid covers [-extent, extent]"),
                          count("q_points", "81", "Q(x,p) grid points per axis"),
                          count("phase_points", "64", "Q(phi) grid points"),
                          positive("tau_max", "40", "largest correlation lag"),
                          positive("d_tau", "0.01", "correlation lag step"),
                          positive("spectrum_half_width", "4", "spectrum grid covers omega +- half width"),
                          count("spectrum_points", "401", "spectrum grid points"),
                      });
    return s;
}

void run_qvdp_lc(RunContext& ctx) {
    const auto& p = ctx.params;
    const int n_max = static_cast<int>(at_least(p, "n_max", 1));
    const Liouvillian L = single_mode(p);
    const auto f = fock_operators(n_max);
    const auto rho0 = initial_coherent(ctx, n_max);

    const auto trace = trace_me(L, rho0, p.real("dt"), p.real("t_final"), at_least(p, "sample_every", 1),
                                {f.a, f.n}, p.list("snapshot_times"));
    Table ex{{"t", "x", "p", "n"}, {}};
    for (std::size_t j = 0; j < trace.times.size(); ++j) {
        ex.add({trace.times[j], trace.values[j][0].real(), trace.values[j][0].imag(), trace.values[j][1].real()});
    }
    ctx.out.csv("expectations", ex, {{"x", "Re <a>"}, {"p", "Im <a>"}, {"dt", p.real("dt")}});
    ctx.truncation("time evolution", lindblad::top_level_population(L.model(), trace.final_state.matrix()));

    const auto axis = plane_axis(p);
    const phase::PhaseGrid grid(at_least(p, "phase_points", 1));
    std::vector<double> ts;
    std::vector<phase::QSurface> qs;
    std::vector<phase::PhaseSeries> phis;
    for (const auto& s : trace.snapshots) {
        ts.push_back(s.t);
        qs.push_back(phase::husimi_q_boson(s.rho, axis, axis));
        phis.push_back(phase::phase_dist_boson(s.rho, grid));
    }
    warn_q_grid(ctx, qs, "snapshots");
    write_plane_surfaces(ctx.out, "q_plane", ts, qs, {{"alpha", "x + i p"}});
    write_phase_series(ctx.out, "q_phase", "t", ts, phis, {{"phase", "phi = -arg(alpha)"}});

    const auto ss = steady(ctx, L, "steady state");
    const auto sq = phase::husimi_q_boson(ss.rho, axis, axis);
    warn_q_grid(ctx, {sq}, "steady state");
    write_plane_surfaces(ctx.out, "steady_q_plane", {std::numeric_limits<double>::infinity()}, {sq},
                         {{"alpha", "x + i p"}});
    write_phase_series(ctx.out, "steady_q_phase", "t", {std::numeric_limits<double>::infinity()},
                       {phase::phase_dist_boson(ss.rho, grid)}, {});
    ctx.out.json("steady", steady_summary(ss, {{"a", ss.rho.expect(f.a)}, {"n", ss.rho.expect(f.n)}}));

    lindblad::CorrelationOptions co;
    co.tau_max = p.real("tau_max");
    co.d_tau = p.real("d_tau");
    co.omegas = omega_grid(p.real("omega"), p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    const auto cr = lindblad::correlation_spectrum(L, ss.rho, f.a_dag, f.a, co);
    Table st{{"omega", "S"}, {}};
    for (std::size_t m = 0; m < cr.spectrum.size(); ++m) st.add({cr.spectrum.omegas[m], cr.spectrum.values[m]});
    ctx.out.csv("spectrum", st,
                {{"correlation", "<a^dag(tau) a>"},
                 {"kernel", "exp(-i omega tau)"},
                 {"tail_flag", cr.tail_flag},
                 {"window_rate", cr.window_rate},
                 {"imag_residue", cr.imag_residue}});
}

std::vector<ParamSpec> qvdp_traj_params() {
    auto s = single_mode_physics();
    s.insert(s.end(), {
                          count("store_every", "10", "steps per stored sample"),
                          count("n_traj", "100", "conditional trajectories"),
                          count("shown_traj", "10", "individual trajectories written out"),
                          positive("q_extent", "4", "steady-state Q(x,p) grid covers [-extent, extent]"),
                          count("q_points", "81", "Q(x,p) grid points per axis"),
                          count("spectrum_traj", "200", "stationary trajectories for the measured spectrum"),
                          positive("spectrum_t_final", "20", "duration of each stationary trajectory"),
                          positive("tau_max", "40", "largest correlation lag of the predicted spectrum"),
                          positive("d_tau", "0.01", "correlation lag step"),
                          positive("spectrum_half_width", "4", "spectrum grid covers omega +- half width"),
                          count("spectrum_points", "161", "spectrum grid points"),
                          positive("bin_width", "0.4", "bin-averaging width of the spectra"),
                      });
    return s;
}

namespace {

double monitored_rate(const ParamSet& p, const std::string& key) {
    const double r = p.real(key);
    if (!(r > 0.0)) {
        throw ExperimentError("invalid_parameter", "heterodyne detection needs '" + key + "' > 0",
                              {{"parameter", key}, {"value", r}});
    }
    return r;
}

}  // namespace

void run_qvdp_traj(RunContext& ctx) {
    const auto& p = ctx.params;
    const int n_max = static_cast<int>(at_least(p, "n_max", 1));
    const Liouvillian L = single_mode(p);
    const auto f = fock_operators(n_max);
    const std::vector<hetero::MonitoredChannel> channels{{f.a, monitored_rate(p, "kappa"), 1.0, "a"}};
    const auto rho0 = initial_coherent(ctx, n_max);

    UnravelingOptions uo;
    uo.dt = p.real("dt");
    uo.t_final = p.real("t_final");
    uo.store_every = at_least(p, "store_every", 1);
    uo.n_traj = at_least(p, "n_traj", 1);
    uo.shown = p.count("shown_traj");
    uo.seed = p.seed();
    uo.threads = ctx.threads;
    const Operator x = 0.5 * (f.a + f.a_dag);
    const Operator y = cplx{0.0, -0.5} * (f.a - f.a_dag);
    write_unraveling(ctx.out, unravel(L, channels, rho0, {x, y}, uo), {"x", "p"});

    const auto ss = steady(ctx, L, "steady state");
    const auto axis = linspace(-p.real("q_extent"), p.real("q_extent"), at_least(p, "q_points", 2));
    const auto sq = phase::husimi_q_boson(ss.rho, axis, axis);
    warn_q_grid(ctx, {sq}, "steady state");
    write_plane_surfaces(ctx.out, "steady_q_plane", {std::numeric_limits<double>::infinity()}, {sq},
                         {{"alpha", "x + i p"}});

    MeasuredSpectraOptions mo;
    mo.n_traj = at_least(p, "spectrum_traj", 1);
    mo.t_final = p.real("spectrum_t_final");
    mo.dt = uo.dt;
    mo.store_every = uo.store_every;
    mo.tau_max = p.real("tau_max");
    mo.d_tau = p.real("d_tau");
    mo.seed = stream_seed(p.seed(), 1);
    mo.threads = ctx.threads;
    const auto omegas = omega_grid(p.real("omega"), p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    write_measured_spectra(ctx.out, "measured_spectrum", "", {}, {measured_spectra(L, channels, ss.rho, omegas, mo)},
                           {"a"}, p.real("bin_width"), {{"trajectories", mo.n_traj}, {"initial_state", "steady state"}});
}

std::vector<ParamSpec> qvdp_two_params() {
    return {
        seed_spec(),
        rate("kappa1", "3", "one-phonon gain per mode"),
        rate("kappa2", "1", "two-phonon loss per mode"),
        rate("kappa", "1", "one-phonon loss per mode, the monitored channels"),
        count("n_max", "8", "Fock truncation per mode"),
        real("delta", "0.5", "detuning of the Q(phi_AB) curves and sweep points"),
        list("V_list", "0.5,1,2", "dissipative couplings of the Q(phi_AB) curves"),
        count("phase_points", "64", "Q(phi_AB) grid points"),
        positive("dt", "0.001", "integration step of the trajectories"),
        count("store_every", "10", "steps per stored sample"),
        count("measured_traj", "20", "stationary trajectories per measured phase distribution"),
        positive("measured_t_final", "50", "duration of each measured-phase trajectory"),
        rate("measured_t_min", "5", "filter warm-up discarded from the measured phase"),
        rate("tau_f", "0", "low-pass time constant of the currents, 0 selects 2 / kappa"),
        count("phase_bins", "32", "bins of the measured phase distribution"),
        real("spectrum_delta", "5", "detuning of the spectra"),
        list("spectrum_V", "0,2,5", "couplings of the spectra"),
        positive("tau_max", "30", "largest correlation lag"),
        positive("d_tau", "0.01", "correlation lag step"),
        positive("spectrum_half_width", "8", "spectrum grid covers +- half width"),
        count("spectrum_points", "321", "spectrum grid points"),
        count("spectrum_traj", "20", "stationary trajectories per measured spectrum"),
        positive("spectrum_t_final", "40", "duration of each measured-spectrum trajectory"),
        positive("bin_width_over_delta", "0.1", "bin-averaging width of the spectra relative to |spectrum_delta|"),
    };
}

namespace {

Liouvillian two_mode(const ParamSet& p, double delta, double V) {
    return Liouvillian(lindblad::build_two_qvdp_model(delta, V, p.real("kappa1"), p.real("kappa2"), p.real("kappa"),
                                                      static_cast<int>(at_least(p, "n_max", 1))));
}

lindblad::SteadyState two_mode_steady(const Liouvillian& L) {
    lindblad::SteadyStateOptions o;
    o.method = L.dim() < 25 ? lindblad::SteadyStateMethod::NullSpace : lindblad::SteadyStateMethod::Integration;
    return lindblad::steady_state(L, o);
}

}  // namespace

void run_qvdp_two(RunContext& ctx) {
    const auto& p = ctx.params;
    const int n_max = static_cast<int>(at_least(p, "n_max", 1));
    const auto ops = lindblad::two_mode_operators(n_max);
    const double kappa = monitored_rate(p, "kappa");
    const std::vector<hetero::MonitoredChannel> channels{{ops.a, kappa, 1.0, "a"}, {ops.b, kappa, 1.0, "b"}};
    const phase::PhaseGrid grid(at_least(p, "phase_points", 1));
    const double delta = p.real("delta");

    const auto Vs = p.list("V_list");
    std::vector<phase::PhaseSeries> closed;
    std::vector<HistogramDist> measured;
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t k = 0; k < Vs.size(); ++k) {
        const Liouvillian L = two_mode(p, delta, Vs[k]);
        const auto ss = two_mode_steady(L);
        if (ss.truncation_warning) ctx.truncation("steady state at V=" + format_number(Vs[k]), ss.top_population);
        closed.push_back(phase::phase_diff_dist_boson(ss.rho, grid));
        states.push_back({{"V", Vs[k]}, {"steady", steady_summary(ss, {{"ab_dag", ss.rho.expect(ops.a * ops.b_dag)}})}});

        hetero::SmeOptions o;
        o.dt = p.real("dt");
        o.t_final = p.real("measured_t_final");
        o.seed = stream_seed(p.seed(), k);
        o.store_every = at_least(p, "store_every", 1);
        const std::size_t n = at_least(p, "measured_traj", 1);
        std::vector<hetero::HeterodyneRecord> records(n);
        hetero::run_sme_ensemble(L, channels, ss.rho, o, n, ctx.threads,
                                 [&](std::size_t i, hetero::HeterodyneRecord&& r) { records[i] = std::move(r); });
        hetero::PhaseEstimateOptions po;
        po.tau_f = p.real("tau_f");
        po.t_min = p.real("measured_t_min");
        po.n_bins = at_least(p, "phase_bins", 1);
        measured.push_back(hetero::measured_phase_distribution(records, po));
    }
    write_phase_series(ctx.out, "phase_diff", "V", Vs, closed, {{"delta", delta}, {"phase", "phi_AB = phi_A - phi_B"}});
    write_histograms(ctx.out, "measured_phase_diff", "V", Vs, measured,
                     {{"delta", delta}, {"estimator", "arg(I_B / I_A) of low-pass filtered currents"}});
    ctx.out.json("steady_states", states);

    const double sd = p.real("spectrum_delta");
    const auto omegas = omega_grid(0.0, p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    Table spec{{"V", "omega", "S_A", "S_B"}, {}};
    nlohmann::json peaks = nlohmann::json::array();
    std::vector<MeasuredSpectra> meas;
    const auto sVs = p.list("spectrum_V");
    for (std::size_t k = 0; k < sVs.size(); ++k) {
        const Liouvillian L = two_mode(p, sd, sVs[k]);
        const auto ss = two_mode_steady(L);
        if (ss.truncation_warning) ctx.truncation("spectrum steady state at V=" + format_number(sVs[k]), ss.top_population);
        MeasuredSpectraOptions mo;
        mo.n_traj = at_least(p, "spectrum_traj", 1);
        mo.t_final = p.real("spectrum_t_final");
        mo.dt = p.real("dt");
        mo.store_every = at_least(p, "store_every", 1);
        mo.tau_max = p.real("tau_max");
        mo.d_tau = p.real("d_tau");
        mo.seed = stream_seed(p.seed(), 1000 + k);
        mo.threads = ctx.threads;
        meas.push_back(measured_spectra(L, channels, ss.rho, omegas, mo));
        const auto& sa = meas.back().predicted[0];
        const auto& sb = meas.back().predicted[1];
        for (std::size_t m = 0; m < omegas.size(); ++m) {
            spec.add({sVs[k], omegas[m], (sa.values[m] - 1.0) / kappa, (sb.values[m] - 1.0) / kappa});
        }
        peaks.push_back({{"V", sVs[k]},
                         {"peak_A", sa.peak_omega()},
                         {"peak_B", sb.peak_omega()},
                         {"separation", sa.peak_omega() - sb.peak_omega()}});
    }
    ctx.out.csv("spectra", spec, {{"delta", sd}, {"correlation", "<a^dag(tau) a>, <b^dag(tau) b>"}});
    write_measured_spectra(ctx.out, "measured_spectra", "V", sVs, meas, {"A", "B"}, std::abs(sd) * p.real("bin_width_over_delta"),
                           {{"delta", sd}, {"initial_state", "steady state"}});
    ctx.out.json("entrainment", peaks);
}

SweepValue sweep_qvdp_two(const ParamSet& p) {
    const auto Vs = p.list("V_list");
    if (Vs.size() != 1) throw ExperimentError("invalid_parameter", "a sweep point needs exactly one coupling");
    const Liouvillian L = two_mode(p, p.real("delta"), Vs.front());
    const auto ss = two_mode_steady(L);
    return {phase::phase_diff_dist_boson(ss.rho, phase::PhaseGrid(at_least(p, "phase_points", 1))).max(),
            ss.top_population};
}

}  // namespace qsync::exp::detail
