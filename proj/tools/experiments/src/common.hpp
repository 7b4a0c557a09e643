#pragma once

#include "qsync/experiments/scenario.hpp"

#include "qsync/heterodyne.hpp"
#include "qsync/lindblad.hpp"
#include "qsync/phase_space.hpp"

#include <string>
#include <vector>

namespace qsync::exp::detail {

std::vector<ParamSpec> classical_lc_params();
void run_classical_lc(RunContext& ctx);

std::vector<ParamSpec> classical_two_params();
void run_classical_two(RunContext& ctx);
SweepValue sweep_classical_two(const ParamSet& p);

std::vector<ParamSpec> qvdp_lc_params();
void run_qvdp_lc(RunContext& ctx);

std::vector<ParamSpec> qvdp_traj_params();
void run_qvdp_traj(RunContext& ctx);

std::vector<ParamSpec> qvdp_two_params();
void run_qvdp_two(RunContext& ctx);
SweepValue sweep_qvdp_two(const ParamSet& p);

std::vector<ParamSpec> spin_lc_params();
void run_spin_lc(RunContext& ctx);

std::vector<ParamSpec> spin_traj_params();
void run_spin_traj(RunContext& ctx);

std::vector<ParamSpec> spin_two_params();
void run_spin_two(RunContext& ctx);
SweepValue sweep_spin_two(const ParamSet& p);

inline ParamSpec real(std::string name, std::string value, std::string help) {
    return {std::move(name), ParamKind::Real, std::move(value), std::move(help)};
}
inline ParamSpec rate(std::string name, std::string value, std::string help) {
    return {std::move(name), ParamKind::NonNegative, std::move(value), std::move(help)};
}
inline ParamSpec positive(std::string name, std::string value, std::string help) {
    return {std::move(name), ParamKind::Positive, std::move(value), std::move(help)};
}
inline ParamSpec count(std::string name, std::string value, std::string help) {
    return {std::move(name), ParamKind::Count, std::move(value), std::move(help)};
}
inline ParamSpec list(std::string name, std::string value, std::string help) {
    return {std::move(name), ParamKind::RealList, std::move(value), std::move(help)};
}
inline ParamSpec seed_spec() { return count("seed", "1", "master seed of every random stream"); }

/// A count parameter that must be at least `min`.
std::size_t at_least(const ParamSet& p, const std::string& key, std::size_t min);

/// Master-equation trajectory sampled every `sample_every` steps, with full
/// states kept at the steps nearest to `snapshot_times`.
struct MeTrace {
    std::vector<double> times;
    std::vector<std::vector<cplx>> values;  ///< [sample][observable]
    std::vector<lindblad::MeSample> snapshots;
    DensityOperator final_state;
};

/// RK4 integration at fixed dt. Throws ExperimentError "invalid_parameter"
/// if dt exceeds the Liouvillian's stable step.
MeTrace trace_me(const lindblad::Liouvillian& L, const DensityOperator& rho0, double dt, double t_final,
                 std::size_t sample_every, const std::vector<Operator>& observables,
                 const std::vector<double>& snapshot_times);

/// Throws ExperimentError "invalid_parameter" unless dt <= L.stable_dt().
void require_stable(const lindblad::Liouvillian& L, double dt);

/// Steady state with the truncation policy applied through ctx.
lindblad::SteadyState steady(RunContext& ctx, const lindblad::Liouvillian& L, const std::string& where);

/// JSON summary of a steady state plus named expectation values.
nlohmann::json steady_summary(const lindblad::SteadyState& ss, const std::vector<std::pair<std::string, cplx>>& expect);

/// Ensemble mean and standard error of per-trajectory series, [traj][sample].
struct MeanSe {
    std::vector<double> mean;
    std::vector<double> se;
};
MeanSe mean_se(const std::vector<std::vector<double>>& series);

/// Conditional-trajectory ensemble next to the unconditional evolution,
/// for Hermitian observables sampled at the start of every stored block.
struct Unraveling {
    std::vector<double> times;
    std::vector<MeanSe> stats;                          ///< [observable]
    std::vector<std::vector<double>> me;                ///< [observable][sample]
    std::vector<std::vector<std::vector<double>>> shown;  ///< [observable][trajectory][sample]
};

struct UnravelingOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    std::size_t store_every = 1;
    std::size_t n_traj = 1;
    std::size_t shown = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

Unraveling unravel(const lindblad::Liouvillian& L, const std::vector<hetero::MonitoredChannel>& channels,
                   const DensityOperator& rho0, const std::vector<Operator>& observables,
                   const UnravelingOptions& opts);

/// ensemble.csv (t, <name>_mean, <name>_se, <name>_me), trajectories.csv
/// (t, <name>_<i>) and unraveling.json with the largest |mean - me| / se and
/// the fraction of samples within three standard errors.
void write_unraveling(RunWriter& out, const Unraveling& u, const std::vector<std::string>& names);

/// Long table (t, x, p, Q) for a list of plane surfaces.
void write_plane_surfaces(RunWriter& out, const std::string& stem, const std::vector<double>& times,
                          const std::vector<phase::QSurface>& surfaces, const nlohmann::json& meta);
/// Long table (t, theta, phi, Q) for a list of sphere surfaces.
void write_sphere_surfaces(RunWriter& out, const std::string& stem, const std::vector<double>& times,
                           const std::vector<phase::QSurface>& surfaces, const nlohmann::json& meta);
/// Long table (<key>, phi, Q) for a list of phase series.
void write_phase_series(RunWriter& out, const std::string& stem, const std::string& key,
                        const std::vector<double>& keys, const std::vector<phase::PhaseSeries>& series,
                        const nlohmann::json& meta);
/// Long table (<key>, phi, density, std_error) for histogram estimates.
void write_histograms(RunWriter& out, const std::string& stem, const std::string& key,
                      const std::vector<double>& keys, const std::vector<HistogramDist>& hists,
                      const nlohmann::json& meta);

/// Heterodyne periodograms of every channel over stationary trajectories
/// started in rho_ss, next to the predictions rate * S + 1 with S the
/// regression spectrum of <L^dag(tau) L>.
struct MeasuredSpectra {
    std::vector<SpectrumSeries> measured;
    std::vector<SpectrumSeries> predicted;
    std::vector<bool> tail_flags;
};

struct MeasuredSpectraOptions {
    std::size_t n_traj = 1;
    double t_final = 1.0;
    double dt = 1e-3;
    std::size_t store_every = 1;
    double tau_max = 10.0;
    double d_tau = 0.01;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

MeasuredSpectra measured_spectra(const lindblad::Liouvillian& L, const std::vector<hetero::MonitoredChannel>& channels,
                                 const DensityOperator& rho_ss, const std::vector<double>& omegas,
                                 const MeasuredSpectraOptions& opts);

/// Writes <stem>.csv and <stem>_binned.csv with columns
/// [key], omega, then P_<name>, pred_<name> per channel.
void write_measured_spectra(RunWriter& out, const std::string& stem, const std::string& key,
                            const std::vector<double>& keys, const std::vector<MeasuredSpectra>& spectra,
                            const std::vector<std::string>& names, double bin_width, const nlohmann::json& meta);

/// Frequency grid centered on `center`.
std::vector<double> omega_grid(double center, double half_width, std::size_t points);

/// Spin coherent state (theta, phi) Q grid axes.
std::vector<double> theta_axis(std::size_t n);
std::vector<double> phi_axis(std::size_t n);

}  // namespace qsync::exp::detail
