#include "common.hpp"

#include "qsync/heterodyne.hpp"
#include "qsync/random.hpp"

#include <cmath>
#include <limits>

namespace qsync::exp::detail {

using lindblad::Liouvillian;

namespace {

std::vector<ParamSpec> single_spin_physics() {
    return {
        seed_spec(),
        real("omega", "2", "level splitting"),
        rate("gamma_plus", "0.5", "gain rate"),
        rate("gamma_minus", "1", "loss rate, the monitored channel"),
        real("theta0", "1.5707963267948966", "polar angle of the initial spin coherent state"),
        real("phi0", "0", "azimuth of the initial spin coherent state"),
        positive("dt", "0.001", "integration step"),
        positive("t_final", "10", "duration of the time evolution"),
    };
}

Liouvillian single_spin(const ParamSet& p) {
    return Liouvillian(lindblad::build_spin_model(p.real("omega"), p.real("gamma_plus"), p.real("gamma_minus")));
}

DensityOperator initial_spin(const ParamSet& p) {
    return DensityOperator::pure(spin_coherent_ket(p.real("theta0"), p.real("phi0")));
}

double monitored_rate(const ParamSet& p, const std::string& key) {
    const double r = p.real(key);
    if (!(r > 0.0)) {
        throw ExperimentError("invalid_parameter", "heterodyne detection needs '" + key + "' > 0",
                              {{"parameter", key}, {"value", r}});
    }
    return r;
}

MeasuredSpectraOptions spectra_options(const RunContext& ctx, std::uint64_t stream) {
    const auto& p = ctx.params;
    MeasuredSpectraOptions mo;
    mo.n_traj = at_least(p, "spectrum_traj", 1);
    mo.t_final = p.real("spectrum_t_final");
    mo.dt = p.real("dt");
    mo.store_every = at_least(p, "store_every", 1);
    mo.tau_max = p.real("tau_max");
    mo.d_tau = p.real("d_tau");
    mo.seed = stream_seed(p.seed(), stream);
    mo.threads = ctx.threads;
    return mo;
}

}  // namespace

std::vector<ParamSpec> spin_lc_params() {
    auto s = single_spin_physics();
    s.insert(s.end(), {
                          count("sample_every", "10", "steps per stored expectation sample"),
                          list("snapshot_times", "0,0.5,1.5,10", "times of the Q snapshots"),
                          count("theta_points", "46", "Q(theta,phi) polar grid points on [0, pi]"),
                          count("phi_points", "90", "Q(theta,phi) azimuthal grid points on [0, 2 pi)"),
                          count("phase_points", "64", "Q(phi) grid points"),
                          positive("tau_max", "30", "largest correlation lag"),
                          positive("d_tau", "0.01", "correlation lag step"),
                          positive("spectrum_half_width", "6", "spectrum grid covers omega +- half width"),
                          count("spectrum_points", "481", "spectrum grid points"),
                      });
    return s;
}

void run_spin_lc(RunContext& ctx) {
    const auto& p = ctx.params;
    const Liouvillian L = single_spin(p);
    const auto s = pauli_operators();
    const auto trace = trace_me(L, initial_spin(p), p.real("dt"), p.real("t_final"), at_least(p, "sample_every", 1),
                                {s.sx, s.sy, s.sz}, p.list("snapshot_times"));
    Table ex{{"t", "sx", "sy", "sz"}, {}};
    for (std::size_t j = 0; j < trace.times.size(); ++j) {
        ex.add({trace.times[j], trace.values[j][0].real(), trace.values[j][1].real(), trace.values[j][2].real()});
    }
    ctx.out.csv("expectations", ex, {{"dt", p.real("dt")}});

    const auto thetas = theta_axis(at_least(p, "theta_points", 2));
    const auto phis = phi_axis(at_least(p, "phi_points", 1));
    const phase::PhaseGrid grid(at_least(p, "phase_points", 1));
    std::vector<double> ts;
    std::vector<phase::QSurface> qs;
    std::vector<phase::PhaseSeries> ph;
    for (const auto& snap : trace.snapshots) {
        ts.push_back(snap.t);
        qs.push_back(phase::husimi_q_spin(snap.rho, thetas, phis));
        ph.push_back(phase::phase_dist_spin(snap.rho, grid));
    }
    const auto ss = steady(ctx, L, "steady state");
    ts.push_back(std::numeric_limits<double>::infinity());
    qs.push_back(phase::husimi_q_spin(ss.rho, thetas, phis));
    ph.push_back(phase::phase_dist_spin(ss.rho, grid));
    write_sphere_surfaces(ctx.out, "q_sphere", ts, qs, {{"steady_state_row", "t = inf"}});
    write_phase_series(ctx.out, "q_phase", "t", ts, ph, {{"phase", "azimuth of the spin coherent state"}});
    ctx.out.json("steady", steady_summary(ss, {{"sx", ss.rho.expect(s.sx)},
                                               {"sy", ss.rho.expect(s.sy)},
                                               {"sz", ss.rho.expect(s.sz)}}));

    lindblad::CorrelationOptions co;
    co.tau_max = p.real("tau_max");
    co.d_tau = p.real("d_tau");
    co.omegas = omega_grid(p.real("omega"), p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    const auto cr = lindblad::correlation_spectrum(L, ss.rho, s.sp, s.sm, co);
    Table st{{"omega", "S"}, {}};
    for (std::size_t m = 0; m < cr.spectrum.size(); ++m) st.add({cr.spectrum.omegas[m], cr.spectrum.values[m]});
    ctx.out.csv("spectrum", st,
                {{"correlation", "<s+(tau) s->"},
                 {"kernel", "exp(-i omega tau)"},
                 {"tail_flag", cr.tail_flag},
                 {"imag_residue", cr.imag_residue}});
}

std::vector<ParamSpec> spin_traj_params() {
    auto s = single_spin_physics();
    s.insert(s.end(), {
                          count("store_every", "10", "steps per stored sample"),
                          count("n_traj", "100", "conditional trajectories"),
                          count("shown_traj", "10", "individual trajectories written out"),
                          count("theta_points", "46", "steady-state Q(theta,phi) polar grid points"),
                          count("phi_points", "90", "steady-state Q(theta,phi) azimuthal grid points"),
                          count("spectrum_traj", "200", "stationary trajectories for the measured spectrum"),
                          positive("spectrum_t_final", "40", "duration of each stationary trajectory"),
                          positive("tau_max", "30", "largest correlation lag of the predicted spectrum"),
                          positive("d_tau", "0.01", "correlation lag step"),
                          positive("spectrum_half_width", "6", "spectrum grid covers omega +- half width"),
                          count("spectrum_points", "241", "spectrum grid points"),
                          positive("bin_width", "0.2", "bin-averaging width of the spectra"),
                      });
    return s;
}

void run_spin_traj(RunContext& ctx) {
    const auto& p = ctx.params;
    const Liouvillian L = single_spin(p);
    const auto s = pauli_operators();
    const std::vector<hetero::MonitoredChannel> channels{{s.sm, monitored_rate(p, "gamma_minus"), 1.0, "s-"}};

    UnravelingOptions uo;
    uo.dt = p.real("dt");
    uo.t_final = p.real("t_final");
    uo.store_every = at_least(p, "store_every", 1);
    uo.n_traj = at_least(p, "n_traj", 1);
    uo.shown = p.count("shown_traj");
    uo.seed = p.seed();
    uo.threads = ctx.threads;
    write_unraveling(ctx.out, unravel(L, channels, initial_spin(p), {s.sx, s.sy, s.sz}, uo), {"sx", "sy", "sz"});

    const auto ss = steady(ctx, L, "steady state");
    const auto q = phase::husimi_q_spin(ss.rho, theta_axis(at_least(p, "theta_points", 2)),
                                        phi_axis(at_least(p, "phi_points", 1)));
    write_sphere_surfaces(ctx.out, "steady_q_sphere", {std::numeric_limits<double>::infinity()}, {q}, {});

    const auto omegas = omega_grid(p.real("omega"), p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    const auto mo = spectra_options(ctx, 1);
    write_measured_spectra(ctx.out, "measured_spectrum", "", {}, {measured_spectra(L, channels, ss.rho, omegas, mo)},
                           {"s"}, p.real("bin_width"), {{"trajectories", mo.n_traj}, {"initial_state", "steady state"}});
}

std::vector<ParamSpec> spin_two_params() {
    return {
        seed_spec(),
        rate("gamma_plus", "0.5", "gain rate per spin"),
        rate("gamma_minus", "1", "loss rate per spin, the monitored channels"),
        real("delta", "0.5", "detuning of the Q(phi_AB) curves and sweep points"),
        list("V_list", "0.2,1,5", "dissipative couplings of the Q(phi_AB) curves"),
        count("phase_points", "64", "Q(phi_AB) grid points"),
        positive("dt", "0.001", "integration step of the trajectories"),
        count("store_every", "10", "steps per stored sample"),
        count("measured_traj", "50", "stationary trajectories per measured phase distribution"),
        positive("measured_t_final", "50", "duration of each measured-phase trajectory"),
        rate("measured_t_min", "5", "filter warm-up discarded from the measured phase"),
        rate("tau_f", "0", "low-pass time constant of the currents, 0 selects 2 / gamma_minus"),
        count("phase_bins", "32", "bins of the measured phase distribution"),
        real("spectrum_delta", "5", "detuning of the spectra"),
        list("spectrum_V", "0,2,5", "couplings of the spectra"),
        positive("tau_max", "30", "largest correlation lag"),
        positive("d_tau", "0.01", "correlation lag step"),
        positive("spectrum_half_width", "8", "spectrum grid covers +- half width"),
        count("spectrum_points", "321", "spectrum grid points"),
        count("spectrum_traj", "50", "stationary trajectories per measured spectrum"),
        positive("spectrum_t_final", "40", "duration of each measured-spectrum trajectory"),
        positive("bin_width_over_delta", "0.1", "bin-averaging width of the spectra relative to |spectrum_delta|"),
    };
}

namespace {

Liouvillian two_spin(const ParamSet& p, double delta, double V) {
    return Liouvillian(lindblad::build_two_spin_model(delta, V, p.real("gamma_plus"), p.real("gamma_minus")));
}

}  // namespace

void run_spin_two(RunContext& ctx) {
    const auto& p = ctx.params;
    const auto ops = lindblad::two_spin_operators();
    const double gm = monitored_rate(p, "gamma_minus");
    const std::vector<hetero::MonitoredChannel> channels{{ops.sm_a, gm, 1.0, "s-_A"}, {ops.sm_b, gm, 1.0, "s-_B"}};
    const phase::PhaseGrid grid(at_least(p, "phase_points", 1));
    const double delta = p.real("delta");

    const auto Vs = p.list("V_list");
    std::vector<phase::PhaseSeries> closed;
    std::vector<HistogramDist> measured;
    nlohmann::json states = nlohmann::json::array();
    for (std::size_t k = 0; k < Vs.size(); ++k) {
        const Liouvillian L = two_spin(p, delta, Vs[k]);
        const auto ss = steady(ctx, L, "steady state at V=" + format_number(Vs[k]));
        closed.push_back(phase::phase_diff_dist_spins(ss.rho, grid));
        states.push_back(
            {{"V", Vs[k]}, {"steady", steady_summary(ss, {{"sp_a_sm_b", ss.rho.expect(ops.sp_a * ops.sm_b)}})}});

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
        const Liouvillian L = two_spin(p, sd, sVs[k]);
        const auto ss = steady(ctx, L, "spectrum steady state");
        meas.push_back(measured_spectra(L, channels, ss.rho, omegas, spectra_options(ctx, 1000 + k)));
        const auto& sa = meas.back().predicted[0];
        const auto& sb = meas.back().predicted[1];
        for (std::size_t m = 0; m < omegas.size(); ++m) {
            spec.add({sVs[k], omegas[m], (sa.values[m] - 1.0) / gm, (sb.values[m] - 1.0) / gm});
        }
        peaks.push_back({{"V", sVs[k]},
                         {"peak_A", sa.peak_omega()},
                         {"peak_B", sb.peak_omega()},
                         {"separation", sa.peak_omega() - sb.peak_omega()}});
    }
    ctx.out.csv("spectra", spec, {{"delta", sd}, {"correlation", "<s+_A(tau) s-_A>, <s+_B(tau) s-_B>"}});
    write_measured_spectra(ctx.out, "measured_spectra", "V", sVs, meas, {"A", "B"},
                           std::abs(sd) * p.real("bin_width_over_delta"), {{"delta", sd}, {"initial_state", "steady state"}});
    ctx.out.json("entrainment", peaks);
}

SweepValue sweep_spin_two(const ParamSet& p) {
    const auto Vs = p.list("V_list");
    if (Vs.size() != 1) throw ExperimentError("invalid_parameter", "a sweep point needs exactly one coupling");
    const Liouvillian L = two_spin(p, p.real("delta"), Vs.front());
    const auto ss = lindblad::steady_state(L);
    return {phase::phase_diff_dist_spins(ss.rho, phase::PhaseGrid(at_least(p, "phase_points", 1))).max(), 0.0};
}

}  // namespace qsync::exp::detail
