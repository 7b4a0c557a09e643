#include "common.hpp"

#include "qsync/classical.hpp"
#include "qsync/random.hpp"

#include <cmath>
#include <numbers>

namespace qsync::exp::detail {

using namespace qsync::classical;

namespace {

IntegrationOptions integration(const ParamSet& p, double t_final, std::size_t n_traj, std::uint64_t seed,
                               std::size_t record_every, unsigned threads) {
    IntegrationOptions o;
    o.dt = p.real("dt");
    o.t_final = t_final;
    o.n_traj = n_traj;
    o.seed = seed;
    o.record_every = record_every;
    o.threads = threads;
    return o;
}

std::size_t nearest_sample(const TrajectoryRecord& r, double t) {
    const auto j = static_cast<std::size_t>(std::llround(t / r.sample_dt));
    return std::min(j, r.size() - 1);
}

}  // namespace

std::vector<ParamSpec> classical_lc_params() {
    return {
        seed_spec(),
        rate("kappa1", "10", "linear gain"),
        rate("kappa2", "10", "nonlinear loss"),
        real("omega", "20", "oscillation frequency"),
        rate("sigma2", "1", "noise strength per quadrature"),
        real("alpha0_re", "0.2", "initial amplitude, real part"),
        real("alpha0_im", "0", "initial amplitude, imaginary part"),
        positive("dt", "0.001", "Euler-Maruyama step"),
        positive("t_final", "2", "duration of the time-evolution ensemble"),
        count("n_traj", "16000", "trajectories in the time-evolution ensemble"),
        count("record_every", "10", "integrator steps per stored sample"),
        count("shown_traj", "10", "individual trajectories written out"),
        list("snapshot_times", "0,0.1,0.3,2", "times of the P(x,p) and P(phi) snapshots"),
        positive("xy_extent", "1.5", "P(x,p) grid covers [-extent, extent] in x and p"),
        count("xy_bins", "60", "P(x,p) bins per axis"),
        count("phase_bins", "60", "P(phi) bins"),
        count("spectrum_traj", "2000", "trajectories for the spectrum"),
        positive("spectrum_t_final", "20", "duration of each spectrum trajectory"),
        rate("spectrum_t_min", "2", "start of the stationary window"),
        positive("spectrum_max_lag", "5", "largest correlation lag"),
        positive("spectrum_half_width", "10", "spectrum grid covers omega +- half width"),
        count("spectrum_points", "801", "spectrum grid points"),
    };
}

void run_classical_lc(RunContext& ctx) {
    const auto& p = ctx.params;
    const VdpParams vp{p.real("kappa1"), p.real("kappa2"), p.real("omega"), p.real("sigma2")};
    vp.validate();
    const cplx alpha0{p.real("alpha0_re"), p.real("alpha0_im")};
    const std::size_t record_every = at_least(p, "record_every", 1);
    const double dt = p.real("dt");

    {
        const auto trajs = simulate_vdp(
            vp, alpha0, integration(p, p.real("t_final"), at_least(p, "n_traj", 1), p.seed(), record_every, ctx.threads));
        const auto noiseless = integrate_vdp_rk4(vp, alpha0, dt, p.real("t_final"), record_every);
        const std::size_t shown = std::min(p.count("shown_traj"), trajs.size());

        Table tr;
        tr.columns.push_back("t");
        for (std::size_t i = 0; i < shown; ++i) tr.columns.push_back("x_" + std::to_string(i));
        tr.columns.insert(tr.columns.end(), {"x_mean", "x_noiseless"});
        const std::size_t n = std::min(trajs.front().size(), noiseless.size());
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> row{trajs.front().times[j]};
            double mean = 0.0;
            for (const auto& r : trajs) mean += r.amplitudes[j].real();
            for (std::size_t i = 0; i < shown; ++i) row.push_back(trajs[i].amplitudes[j].real());
            row.push_back(mean / static_cast<double>(trajs.size()));
            row.push_back(noiseless[j].real());
            tr.add(std::move(row));
        }
        ctx.out.csv("trajectories", tr, {{"ensemble_size", trajs.size()}});

        Table path{{"t", "x", "p"}, {}};
        for (std::size_t j = 0; j < trajs.front().size(); ++j) {
            const auto& r = trajs.front();
            path.add({r.times[j], r.amplitudes[j].real(), r.amplitudes[j].imag()});
        }
        ctx.out.csv("path", path, {{"trajectory_seed", trajs.front().seed}});

        const double ext = p.real("xy_extent");
        const std::size_t xy_bins = at_least(p, "xy_bins", 1);
        const XYGrid grid{-ext, ext, xy_bins, -ext, ext, xy_bins};
        const std::size_t phase_bins = at_least(p, "phase_bins", 1);
        Table xy{{"t", "x", "p", "density"}, {}};
        std::vector<double> snap_times;
        std::vector<HistogramDist> phase_hists;
        nlohmann::json skipped = nlohmann::json::array();
        for (double t : p.list("snapshot_times")) {
            const auto h = histogram_xy(trajs, t, grid);
            for (std::size_t i = 0; i < xy_bins; ++i) {
                for (std::size_t k = 0; k < xy_bins; ++k) {
                    const double x = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
                    const double y = 0.5 * (h.bin_edges_p[k] + h.bin_edges_p[k + 1]);
                    xy.add({t, x, y, h.density(i * xy_bins + k)});
                }
            }
            skipped.push_back({{"t", t}, {"outside_grid", h.skipped}});

            PhaseHistogramBuilder b(phase_bins, HistogramDomain::Phase);
            for (const auto& r : trajs) b.add_group({-std::arg(r.amplitudes[nearest_sample(r, t)])});
            snap_times.push_back(t);
            phase_hists.push_back(b.finish());
        }
        ctx.out.csv("xy_density", xy, {{"skipped", skipped}});
        write_histograms(ctx.out, "phase_density", "t", snap_times, phase_hists, {{"phase", "phi = -arg(alpha)"}});
    }

    const auto strajs = simulate_vdp(vp, alpha0,
                                     integration(p, p.real("spectrum_t_final"), at_least(p, "spectrum_traj", 1),
                                                 stream_seed(p.seed(), 1), record_every, ctx.threads));
    const auto omegas =
        omega_grid(vp.omega, p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    const auto spec = classical_spectrum(strajs, p.real("spectrum_t_min"), p.real("spectrum_max_lag"), omegas).front();
    Table st{{"omega", "S"}, {}};
    for (std::size_t m = 0; m < spec.size(); ++m) st.add({spec.omegas[m], spec.values[m]});
    ctx.out.csv("spectrum", st, {{"method", to_string(spec.method)}, {"kernel", "exp(-i omega tau)"}});

    const auto fit = fit_lorentzian(spec);
    const double r0 = vp.r0();
    const double predicted = vp.sigma2 / (r0 * r0);
    ctx.out.json("linewidth", {{"fit",
                                {{"amplitude", fit.amplitude},
                                 {"center", fit.center},
                                 {"fwhm", fit.fwhm},
                                 {"points", fit.points},
                                 {"converged", fit.converged}}},
                               {"r0", r0},
                               {"predicted_fwhm", predicted},
                               {"relative_error", std::abs(fit.fwhm - predicted) / predicted}});
}

std::vector<ParamSpec> classical_two_params() {
    return {
        seed_spec(),
        real("delta", "1", "detuning"),
        list("V_list", "0.5,1,2", "couplings of the P(phi_AB) curves"),
        rate("sigma2_over_delta", "1", "noise strength sigma2 = ratio * |delta| for P(phi_AB) and sweeps"),
        positive("dt", "0.005", "Euler-Maruyama step"),
        count("n_traj", "400", "trajectories per P(phi_AB) curve or sweep point"),
        positive("t_final", "60", "duration per trajectory"),
        rate("t_min", "20", "start of the long-time window"),
        count("record_every", "10", "integrator steps per stored sample"),
        count("phase_bins", "64", "P(phi_AB) bins"),
        rate("freq_V", "1", "coupling of the observed-frequency curves"),
        list("freq_deltas", "0,0.25,0.5,0.75,1,1.25,1.5,1.75,2,2.25,2.5,2.75,3", "detunings of the frequency curves"),
        list("freq_sigma2", "0,0.2,1", "noise strengths of the frequency curves"),
        count("freq_traj", "50", "trajectories per frequency point"),
        positive("freq_t_final", "200", "duration of frequency trajectories"),
        rate("freq_t_min", "20", "start of the frequency window"),
        list("spectrum_V", "0.5,1,2", "couplings of the spectra"),
        rate("spectrum_sigma2_over_delta", "0.2", "noise strength of the spectra relative to |delta|"),
        count("spectrum_traj", "200", "trajectories per spectrum"),
        positive("spectrum_t_final", "200", "duration of spectrum trajectories"),
        rate("spectrum_t_min", "20", "start of the stationary window"),
        count("spectrum_record_every", "20", "integrator steps per stored sample for spectra"),
        positive("spectrum_max_lag", "60", "largest correlation lag"),
        positive("spectrum_half_width", "3", "spectrum grid covers +- half width"),
        count("spectrum_points", "601", "spectrum grid points"),
    };
}

namespace {

HistogramDist locking_histogram(const ParamSet& p, double delta, double V, std::uint64_t seed, unsigned threads) {
    const CoupledPhaseParams cp{delta, V, p.real("sigma2_over_delta") * std::abs(delta)};
    cp.validate();
    const auto trajs = simulate_coupled_phases(
        cp, {0.0, 0.0},
        integration(p, p.real("t_final"), at_least(p, "n_traj", 1), seed, at_least(p, "record_every", 1), threads));
    return histogram_phase(trajs, p.real("t_min"), at_least(p, "phase_bins", 1));
}

}  // namespace

void run_classical_two(RunContext& ctx) {
    const auto& p = ctx.params;
    const double delta = p.real("delta");

    const auto Vs = p.list("V_list");
    std::vector<HistogramDist> hists;
    nlohmann::json fixed = nlohmann::json::array();
    for (std::size_t k = 0; k < Vs.size(); ++k) {
        hists.push_back(locking_histogram(p, delta, Vs[k], stream_seed(p.seed(), k), ctx.threads));
        const bool locks = Vs[k] > 0.0 && std::abs(delta) <= Vs[k];
        fixed.push_back({{"V", Vs[k]}, {"phi_fixed", locks ? nlohmann::json(std::asin(delta / Vs[k])) : nullptr}});
    }
    write_histograms(ctx.out, "phase_diff", "V", Vs, hists,
                     {{"delta", delta},
                      {"sigma2", p.real("sigma2_over_delta") * std::abs(delta)},
                      {"noiseless_fixed_points", fixed}});

    Table freq{{"delta", "sigma2", "observed", "noiseless"}, {}};
    const double fv = p.real("freq_V");
    std::uint64_t stream = 100;
    for (double s2 : p.list("freq_sigma2")) {
        for (double d : p.list("freq_deltas")) {
            const CoupledPhaseParams cp{d, fv, s2};
            cp.validate();
            const std::size_t n = s2 == 0.0 ? 1 : at_least(p, "freq_traj", 1);
            const auto trajs = simulate_coupled_phases(
                cp, {0.0, 0.0},
                integration(p, p.real("freq_t_final"), n, stream_seed(p.seed(), stream++),
                            at_least(p, "record_every", 1), ctx.threads));
            const double noiseless = std::abs(d) > fv ? std::copysign(std::sqrt(d * d - fv * fv), d) : 0.0;
            freq.add({d, s2, observed_frequency_difference(trajs, p.real("freq_t_min")), noiseless});
        }
    }
    ctx.out.csv("frequency", freq, {{"V", fv}, {"observed", "mean of (phi_AB(T) - phi_AB(t_min)) / (T - t_min)"}});

    Table spec{{"V", "omega", "S_A", "S_B"}, {}};
    const double s2 = p.real("spectrum_sigma2_over_delta") * std::abs(delta);
    const auto omegas = omega_grid(0.0, p.real("spectrum_half_width"), at_least(p, "spectrum_points", 2));
    std::uint64_t sstream = 1000;
    for (double V : p.list("spectrum_V")) {
        const CoupledPhaseParams cp{delta, V, s2};
        cp.validate();
        const auto trajs = simulate_coupled_phases(
            cp, {0.0, 0.0},
            integration(p, p.real("spectrum_t_final"), at_least(p, "spectrum_traj", 1),
                        stream_seed(p.seed(), sstream++), at_least(p, "spectrum_record_every", 1), ctx.threads));
        const auto s = classical_spectrum(trajs, p.real("spectrum_t_min"), p.real("spectrum_max_lag"), omegas);
        for (std::size_t m = 0; m < omegas.size(); ++m) spec.add({V, omegas[m], s[0].values[m], s[1].values[m]});
    }
    ctx.out.csv("spectra", spec, {{"delta", delta}, {"sigma2", s2}, {"kernel", "exp(-i omega tau)"}});
}

SweepValue sweep_classical_two(const ParamSet& p) {
    const auto Vs = p.list("V_list");
    if (Vs.size() != 1) throw ExperimentError("invalid_parameter", "a sweep point needs exactly one coupling");
    return {locking_histogram(p, p.real("delta"), Vs.front(), p.seed(), 1).max_density(), 0.0};
}

}  // namespace qsync::exp::detail
