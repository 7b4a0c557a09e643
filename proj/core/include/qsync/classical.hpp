#pragma once

// Classical noisy limit-cycle oscillators: van-der-Pol Langevin dynamics and
// the noisy Adler-type phase equations of two dissipatively coupled
// oscillators, integrated by fixed-step Euler-Maruyama.
//
// Phase convention: phi = -arg(alpha), so a free oscillator alpha ~ e^{-i w t}
// has phi increasing at rate w.

#include "qsync/series.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qsync::classical {

using cplx = std::complex<double>;

struct VdpParams {
    double kappa1 = 1.0;  ///< linear gain
    double kappa2 = 1.0;  ///< nonlinear loss
    double omega = 0.0;   ///< oscillation frequency
    double sigma2 = 0.0;  ///< noise strength per quadrature

    /// Limit-cycle radius sqrt(kappa1 / (2 kappa2)).
    [[nodiscard]] double r0() const;
    void validate() const;
};

struct CoupledPhaseParams {
    double delta = 0.0;   ///< detuning
    double V = 0.0;       ///< dissipative coupling, >= 0
    double sigma2 = 0.0;  ///< noise strength; each phase receives sigma2 / 2

    void validate() const;
};

enum class TrajectoryKind { Amplitude, PhasePair };

/// One stochastic realization sampled on a uniform grid. Amplitude records
/// fill `amplitudes`; phase-pair records fill `phases` with unwrapped
/// (phi_A, phi_B).
struct TrajectoryRecord {
    TrajectoryKind kind = TrajectoryKind::Amplitude;
    std::uint64_t seed = 0;  ///< seed of this trajectory's own stream
    double dt = 0.0;         ///< integrator step
    double sample_dt = 0.0;  ///< spacing of `times`
    std::vector<double> times;
    std::vector<cplx> amplitudes;
    std::vector<std::array<double, 2>> phases;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    /// First sample index with t >= t_min (size() if none).
    [[nodiscard]] std::size_t index_at_or_after(double t_min) const;
};

struct IntegrationOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    std::size_t n_traj = 1;
    std::uint64_t seed = 0;
    /// Keep every k-th integrator step (the initial point is always kept).
    std::size_t record_every = 1;
    unsigned threads = 0;

    void validate() const;
};

/// Euler-Maruyama integration of
///   d alpha = (-i w alpha + k1 alpha/2 - k2 |alpha|^2 alpha) dt + sigma (dW_x + i dW_y)
/// with the free rotation applied exactly as a factor e^{-i w dt} per step,
/// so the limit-cycle radius carries no O(w^2 dt) bias.
/// Trajectory i draws from stream_seed(seed, i).
[[nodiscard]] std::vector<TrajectoryRecord> simulate_vdp(const VdpParams& params, cplx alpha0,
                                                         const IntegrationOptions& opts);

/// Deterministic fourth-order Runge-Kutta reference for the noiseless
/// amplitude equation; returns alpha at each recorded step.
[[nodiscard]] std::vector<cplx> integrate_vdp_rk4(const VdpParams& params, cplx alpha0, double dt, double t_final,
                                                  std::size_t record_every = 1);

/// Noiseless two-oscillator amplitude equations (full radius dynamics),
/// integrated by RK4. Returns (alpha, beta) at each recorded step.
[[nodiscard]] std::vector<std::array<cplx, 2>> integrate_two_vdp_rk4(const VdpParams& single, double delta, double V,
                                                                     cplx alpha0, cplx beta0, double dt,
                                                                     double t_final, std::size_t record_every = 1);

/// Euler-Maruyama integration of
///   d phi_A = (+delta/2 + V/2 sin(phi_B - phi_A)) dt + sqrt(sigma2/2) dW_A
///   d phi_B = (-delta/2 + V/2 sin(phi_A - phi_B)) dt + sqrt(sigma2/2) dW_B
/// with phases accumulated without wrapping.
[[nodiscard]] std::vector<TrajectoryRecord> simulate_coupled_phases(const CoupledPhaseParams& params,
                                                                    std::pair<double, double> phi0,
                                                                    const IntegrationOptions& opts);

/// Normalized histogram of phi = -arg(alpha) (amplitude records) or
/// phi_AB = phi_A - phi_B (phase pairs), mod 2*pi, over all samples with
/// t >= t_min. Per-bin standard errors come from the spread of per-trajectory
/// histograms.
[[nodiscard]] HistogramDist histogram_phase(const std::vector<TrajectoryRecord>& trajs, double t_min,
                                            std::size_t n_bins);

struct XYGrid {
    double x_min = -2.0, x_max = 2.0;
    std::size_t nx = 64;
    double p_min = -2.0, p_max = 2.0;
    std::size_t np = 64;
};

/// 2D histogram of (Re alpha, Im alpha) at the recorded sample nearest to
/// t_snapshot. Samples outside the grid are counted in `skipped` and excluded
/// from the normalization.
[[nodiscard]] HistogramDist histogram_xy(const std::vector<TrajectoryRecord>& trajs, double t_snapshot,
                                         const XYGrid& grid);

/// Spectrum estimate: g(tau) averaged over time origins t >= t_min and over
/// trajectories, extended by g(-tau) = g(tau)*, then Fourier transformed with
/// kernel e^{-i w tau}. Amplitude records use g = E[alpha*(t+tau) alpha(t)] and
/// yield one spectrum; phase pairs use g_a = E[exp(i phi_a(t+tau) - i phi_a(t))]
/// and yield spectra for A and B.
[[nodiscard]] std::vector<SpectrumSeries> classical_spectrum(const std::vector<TrajectoryRecord>& trajs, double t_min,
                                                             double max_lag, const std::vector<double>& omegas);

/// Ensemble mean of (phi_AB(T) - phi_AB(t_min)) / (T - t_min).
[[nodiscard]] double observed_frequency_difference(const std::vector<TrajectoryRecord>& trajs, double t_min);

struct LorentzianFit {
    double amplitude = 0.0;  ///< peak height
    double center = 0.0;
    double fwhm = 0.0;
    std::size_t points = 0;
    bool converged = false;
};

/// Least-squares fit of A / (1 + ((w - w0) / (fwhm / 2))^2) to the samples
/// around the spectrum's maximum whose value exceeds `floor_fraction` of the
/// peak (contiguous region).
[[nodiscard]] LorentzianFit fit_lorentzian(const SpectrumSeries& s, double floor_fraction = 0.1);

}  // namespace qsync::classical
