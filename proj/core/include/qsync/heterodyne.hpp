#pragma once

// Conditional dynamics under continuous heterodyne detection, in the frame
// of the local oscillator. Per monitored channel c (J = sqrt(rate) L) and
// step dt, with dZ = (dW_x + i dW_y)/sqrt(2) and <J> = Tr[J rho]:
//
//   rho <- RK4_dt(rho) + (J - <J>) rho dZ^* + rho (J - <J>)^dag dZ
//              + (|dZ|^2 - dt) D[J - <J>] rho
//
// followed by Hermitization and trace renormalization. The demodulated
// current is I = <J> + dZ/dt.

#include "qsync/lindblad.hpp"
#include "qsync/series.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qsync::hetero {

struct MonitoredChannel {
    Operator op;
    double rate = 0.0;
    double efficiency = 1.0;
    std::string label;

    void validate() const;
};

struct SmeOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    std::uint64_t seed = 0;
    /// Samples cover blocks of this many steps: expectations are block means,
    /// noise increments are block sums.
    std::size_t store_every = 1;
    /// Extra observables recorded as Tr[O rho] at the start of every block.
    std::vector<Operator> observables;
    /// Times at which the conditional state is stored (nearest step).
    std::vector<double> snapshot_times;
    /// Steps between eigenvalue checks of the conditional state.
    std::size_t positivity_check_every = 50;
    double min_eigenvalue = -1e-4;
    /// Largest |Tr rho - 1| tolerated before a step's renormalization.
    double trace_drift_tolerance = 1e-6;

    void validate() const;
};

struct Snapshot {
    double t = 0.0;
    DensityOperator rho;
};

/// One conditional trajectory. Sample j covers steps [j s, (j+1) s) with
/// s = store_every and starts at times[j] = j s dt.
struct HeterodyneRecord {
    std::uint64_t seed = 0;
    double dt = 0.0;
    double sample_dt = 0.0;
    std::size_t store_every = 1;
    std::vector<double> rates;  ///< per channel
    std::vector<double> times;
    /// [channel][sample] block mean of <L> (without the sqrt(rate) factor).
    std::vector<std::vector<cplx>> cond_expectations;
    /// [channel][sample] block sum of dZ = (dW_x + i dW_y)/sqrt(2).
    std::vector<std::vector<cplx>> increments;
    /// [observable][sample]
    std::vector<std::vector<cplx>> observables;
    std::vector<Snapshot> snapshots;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] std::size_t channels() const noexcept { return cond_expectations.size(); }
    [[nodiscard]] std::size_t index_at_or_after(double t_min) const;
};

/// Integrates the heterodyne stochastic master equation. Every channel must
/// match a dissipator of the Liouvillian (same operator, same rate). Throws
/// std::invalid_argument on a mismatch, InvariantViolation on trace drift and
/// lindblad::StepSizeError on a negative-eigenvalue excursion.
[[nodiscard]] HeterodyneRecord evolve_sme(const lindblad::Liouvillian& L, const std::vector<MonitoredChannel>& channels,
                                          const DensityOperator& rho0, const SmeOptions& opts);

/// I_c(t_j) = sqrt(rate_c) <L_c>_j + Z_j / sample_dt, per channel.
[[nodiscard]] std::vector<std::vector<cplx>> heterodyne_current(const HeterodyneRecord& record);

/// Runs n_traj trajectories with seeds stream_seed(opts.seed, i) and hands
/// each finished record to sink(i, record). sink may be called concurrently.
void run_sme_ensemble(const lindblad::Liouvillian& L, const std::vector<MonitoredChannel>& channels,
                      const DensityOperator& rho0, const SmeOptions& opts, std::size_t n_traj, unsigned threads,
                      const std::function<void(std::size_t, HeterodyneRecord&&)>& sink);

struct PhaseEstimateOptions {
    std::size_t channel_a = 0;
    std::size_t channel_b = 1;
    /// Time constant of the single-pole low-pass filter; 0 selects 2 / rate_a.
    double tau_f = 0.0;
    double t_min = 0.0;
    std::size_t n_bins = 64;
};

/// Filtered currents I_bar (EMA with weight 1 - exp(-sample_dt / tau_f)) and
/// phi_AB = arg(I_bar_B / I_bar_A) for t >= t_min. Samples with
/// min(|I_bar_A|, |I_bar_B|) < 1e-12 are skipped and counted.
[[nodiscard]] std::vector<double> measured_phase_differences(const HeterodyneRecord& record,
                                                             const PhaseEstimateOptions& opts, std::size_t* skipped);

/// Phase-difference histogram over a set of records, one group per record.
[[nodiscard]] HistogramDist measured_phase_distribution(const std::vector<HeterodyneRecord>& records,
                                                        const PhaseEstimateOptions& opts);

/// Bartlett-averaged periodogram P(w) = (dt/N) |sum_n I_n e^{i w t_n}|^2 over
/// non-overlapping segments of N samples. The detector-noise floor is 1.
class PeriodogramAccumulator {
public:
    PeriodogramAccumulator(std::vector<double> omegas, double sample_dt, std::size_t segment_length);

    /// Adds every full segment of `current` starting at index `first`.
    /// Throws std::invalid_argument if not even one segment fits.
    void add(const std::vector<cplx>& current, std::size_t first = 0);
    void merge(const PeriodogramAccumulator& other);
    [[nodiscard]] std::size_t segments() const noexcept { return segments_; }
    [[nodiscard]] SpectrumSeries result() const;

private:
    std::vector<double> omegas_;
    double sample_dt_;
    std::size_t segment_length_;
    std::vector<double> sums_;
    std::size_t segments_ = 0;
};

/// Measured spectrum of one channel over a set of records.
[[nodiscard]] SpectrumSeries measured_spectrum(const std::vector<HeterodyneRecord>& records, std::size_t channel,
                                               double t_min, double segment_time, const std::vector<double>& omegas);

}  // namespace qsync::hetero
