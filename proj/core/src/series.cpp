#include "qsync/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qsync {

std::string to_string(HistogramDomain d) {
    switch (d) {
        case HistogramDomain::Phase: return "phase";
        case HistogramDomain::PhaseDifference: return "phase-difference";
        case HistogramDomain::XYPlane: return "xy-plane";
    }
    return "unknown";
}

std::string to_string(SpectrumMethod m) {
    switch (m) {
        case SpectrumMethod::FftOfCorrelation: return "fft-of-correlation";
        case SpectrumMethod::CurrentPeriodogram: return "current-periodogram";
    }
    return "unknown";
}

double HistogramDist::bin_measure(std::size_t i) const {
    if (domain == HistogramDomain::XYPlane) {
        const std::size_t np = bin_edges_p.size() - 1;
        const std::size_t ix = i / np;
        const std::size_t ip = i % np;
        return (bin_edges[ix + 1] - bin_edges[ix]) * (bin_edges_p[ip + 1] - bin_edges_p[ip]);
    }
    return bin_edges[i + 1] - bin_edges[i];
}

double HistogramDist::bin_center(std::size_t i) const {
    if (domain == HistogramDomain::XYPlane) {
        throw std::logic_error("bin_center: xy-plane bins have two coordinates");
    }
    return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
}

std::size_t HistogramDist::argmax() const {
    if (masses.empty()) throw std::logic_error("argmax of empty histogram");
    std::size_t best = 0;
    for (std::size_t i = 1; i < masses.size(); ++i) {
        if (density(i) > density(best)) best = i;
    }
    return best;
}

double HistogramDist::max_density() const { return density(argmax()); }

double HistogramDist::total_mass() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

std::vector<double> phase_bin_edges(std::size_t n_bins) {
    std::vector<double> edges(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
        edges[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_bins);
    }
    return edges;
}

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w -= two_pi;
    return w;
}

double angular_distance(double a, double b) {
    const double d = wrap_phase(a - b);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

std::size_t SpectrumSeries::argmax() const {
    if (values.empty()) throw std::logic_error("argmax of empty spectrum");
    return static_cast<std::size_t>(std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
    out.back() = hi;
    return out;
}

SpectrumSeries bin_average(const SpectrumSeries& s, double width, double lo, double hi) {
    if (!(width > 0.0) || !(hi > lo)) throw std::invalid_argument("bin_average: need width > 0 and hi > lo");
    const auto n_win = static_cast<std::size_t>(std::floor((hi - lo) / width + 1e-9));
    std::vector<double> sum(n_win, 0.0);
    std::vector<std::size_t> count(n_win, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double w = s.omegas[i];
        if (w < lo || w >= lo + width * static_cast<double>(n_win)) continue;
        auto k = static_cast<std::size_t>(std::floor((w - lo) / width));
        if (k >= n_win) k = n_win - 1;
        sum[k] += s.values[i];
        ++count[k];
    }
    SpectrumSeries out;
    out.method = s.method;
    for (std::size_t k = 0; k < n_win; ++k) {
        if (count[k] == 0) continue;
        out.omegas.push_back(lo + width * (static_cast<double>(k) + 0.5));
        out.values.push_back(sum[k] / static_cast<double>(count[k]));
    }
    return out;
}

PhaseHistogramBuilder::PhaseHistogramBuilder(std::size_t n_bins, HistogramDomain domain)
    : n_bins_(n_bins), domain_(domain), counts_(n_bins, 0.0) {
    if (n_bins < 8) throw std::invalid_argument("PhaseHistogramBuilder: n_bins must be >= 8");
}

void PhaseHistogramBuilder::add_group(const std::vector<double>& phases, std::size_t skipped) {
    skipped_ += skipped;
    if (phases.empty()) return;
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> c(n_bins_, 0.0);
    for (double p : phases) {
        auto b = static_cast<std::size_t>(wrap_phase(p) / two_pi * static_cast<double>(n_bins_));
        if (b >= n_bins_) b = n_bins_ - 1;
        c[b] += 1.0;
    }
    samples_ += phases.size();
    for (std::size_t b = 0; b < n_bins_; ++b) {
        counts_[b] += c[b];
        c[b] /= static_cast<double>(phases.size());
    }
    per_group_.push_back(std::move(c));
}

void PhaseHistogramBuilder::merge(const PhaseHistogramBuilder& other) {
    if (other.n_bins_ != n_bins_) throw std::invalid_argument("PhaseHistogramBuilder::merge: bin count mismatch");
    for (std::size_t b = 0; b < n_bins_; ++b) counts_[b] += other.counts_[b];
    per_group_.insert(per_group_.end(), other.per_group_.begin(), other.per_group_.end());
    samples_ += other.samples_;
    skipped_ += other.skipped_;
}

HistogramDist PhaseHistogramBuilder::finish() const {
    if (samples_ == 0) throw std::invalid_argument("PhaseHistogramBuilder: no samples");
    HistogramDist h;
    h.domain = domain_;
    h.bin_edges = phase_bin_edges(n_bins_);
    h.samples = samples_;
    h.skipped = skipped_;
    h.masses.resize(n_bins_);
    for (std::size_t b = 0; b < n_bins_; ++b) h.masses[b] = counts_[b] / static_cast<double>(samples_);
    const std::size_t m = per_group_.size();
    if (m >= 2) {
        h.std_errors.assign(n_bins_, 0.0);
        for (std::size_t b = 0; b < n_bins_; ++b) {
            double mean = 0.0;
            for (const auto& c : per_group_) mean += c[b];
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (const auto& c : per_group_) var += (c[b] - mean) * (c[b] - mean);
            var /= static_cast<double>(m - 1);
            h.std_errors[b] = std::sqrt(var / static_cast<double>(m));
        }
    }
    return h;
}

}  // namespace qsync
