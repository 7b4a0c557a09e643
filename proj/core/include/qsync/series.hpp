#pragma once

// Binned distributions and spectra shared by the classical, quantum and
// measurement modules.

#include <cstddef>
#include <string>
#include <vector>

namespace qsync {

enum class HistogramDomain { Phase, PhaseDifference, XYPlane };

[[nodiscard]] std::string to_string(HistogramDomain d);

/// Binned probability distribution. masses sum to 1; density() divides by
/// the bin measure. For the xy-plane domain, bins are row-major over
/// (x, p) with x the slow index.
struct HistogramDist {
    HistogramDomain domain = HistogramDomain::Phase;
    std::vector<double> bin_edges;    ///< x edges (or phase edges)
    std::vector<double> bin_edges_p;  ///< p edges, xy-plane only
    std::vector<double> masses;
    /// Per-bin standard error of the mass, estimated from the spread across
    /// trajectories. Empty when fewer than two trajectories contributed.
    std::vector<double> std_errors;
    std::size_t samples = 0;
    std::size_t skipped = 0;

    [[nodiscard]] std::size_t size() const noexcept { return masses.size(); }
    [[nodiscard]] double bin_measure(std::size_t i) const;
    [[nodiscard]] double density(std::size_t i) const { return masses[i] / bin_measure(i); }
    [[nodiscard]] double bin_center(std::size_t i) const;
    [[nodiscard]] std::size_t argmax() const;
    [[nodiscard]] double max_density() const;
    [[nodiscard]] double total_mass() const;
};

/// Accumulates phase samples grouped by trajectory into a HistogramDist on
/// [0, 2*pi). Standard errors come from the spread of the per-group
/// normalized histograms. Builders over disjoint groups merge associatively.
class PhaseHistogramBuilder {
public:
    PhaseHistogramBuilder(std::size_t n_bins, HistogramDomain domain);

    /// Adds one group of (unwrapped) phases plus a count of rejected samples.
    void add_group(const std::vector<double>& phases, std::size_t skipped = 0);
    void merge(const PhaseHistogramBuilder& other);
    /// Throws std::invalid_argument if no sample was added.
    [[nodiscard]] HistogramDist finish() const;

private:
    std::size_t n_bins_;
    HistogramDomain domain_;
    std::vector<double> counts_;
    std::vector<std::vector<double>> per_group_;
    std::size_t samples_ = 0;
    std::size_t skipped_ = 0;
};

/// Uniform edges on [0, 2*pi).
[[nodiscard]] std::vector<double> phase_bin_edges(std::size_t n_bins);

/// Wraps an angle into [0, 2*pi).
[[nodiscard]] double wrap_phase(double phi);

/// Smallest absolute angular distance between two angles.
[[nodiscard]] double angular_distance(double a, double b);

enum class SpectrumMethod { FftOfCorrelation, CurrentPeriodogram };

[[nodiscard]] std::string to_string(SpectrumMethod m);

struct SpectrumSeries {
    std::vector<double> omegas;
    std::vector<double> values;
    SpectrumMethod method = SpectrumMethod::FftOfCorrelation;

    [[nodiscard]] std::size_t size() const noexcept { return omegas.size(); }
    [[nodiscard]] std::size_t argmax() const;
    [[nodiscard]] double peak_omega() const { return omegas.at(argmax()); }
};

/// Uniform grid of n points from lo to hi inclusive.
[[nodiscard]] std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Averages the values of s over consecutive windows [lo + k w, lo + (k+1) w)
/// inside [lo, hi). The output grid holds the window centers; windows
/// without samples are dropped.
[[nodiscard]] SpectrumSeries bin_average(const SpectrumSeries& s, double width, double lo, double hi);

}  // namespace qsync
