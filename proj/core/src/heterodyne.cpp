#include "qsync/heterodyne.hpp"

#include "qsync/parallel.hpp"
#include "qsync/random.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

namespace qsync::hetero {

namespace {

using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

Sparse to_sparse(const Matrix& m) {
    Sparse s = m.sparseView(0.0, 0.0);
    s.makeCompressed();
    return s;
}

/// Tr[J rho] = sum_ij J_ij rho_ji.
cplx trace_product(const Sparse& j, const Matrix& rho) {
    cplx acc = 0.0;
    for (Eigen::Index r = 0; r < j.outerSize(); ++r) {
        for (Sparse::InnerIterator it(j, r); it; ++it) acc += it.value() * rho(it.col(), r);
    }
    return acc;
}

void check_channels(const lindblad::Liouvillian& L, const std::vector<MonitoredChannel>& channels) {
    if (channels.empty()) throw std::invalid_argument("evolve_sme: no monitored channel");
    for (const auto& c : channels) {
        c.validate();
        if (c.op.dim() != L.dim()) throw std::invalid_argument("evolve_sme: channel '" + c.label + "' has wrong dimension");
        bool found = false;
        for (const auto& j : L.model().jumps) {
            if (j.op.dim() != c.op.dim()) continue;
            const bool same_op = (j.op.matrix() - c.op.matrix()).cwiseAbs().maxCoeff() <= 1e-12;
            const bool same_rate = std::abs(j.rate - c.rate) <= 1e-12 * std::max(1.0, std::abs(c.rate));
            if (same_op && same_rate) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("evolve_sme: channel '" + c.label +
                                        "' does not match any dissipator (operator and rate) of the model");
        }
    }
}

}  // namespace

void MonitoredChannel::validate() const {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("MonitoredChannel: rate must be > 0");
    if (efficiency != 1.0) throw std::invalid_argument("MonitoredChannel: only unit detection efficiency is supported");
}

void SmeOptions::validate() const {
    if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("SmeOptions: dt and T must be > 0");
    if (store_every < 1) throw std::invalid_argument("SmeOptions: store_every must be >= 1");
    if (positivity_check_every < 1) throw std::invalid_argument("SmeOptions: positivity_check_every must be >= 1");
}

std::size_t HeterodyneRecord::index_at_or_after(double t_min) const {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t_min - 1e-12 * sample_dt) -
                                    times.begin());
}

HeterodyneRecord evolve_sme(const lindblad::Liouvillian& L, const std::vector<MonitoredChannel>& channels,
                            const DensityOperator& rho0, const SmeOptions& opts) {
    opts.validate();
    check_channels(L, channels);
    if (rho0.dim() != L.dim()) throw std::invalid_argument("evolve_sme: state dimension mismatch");

    const std::size_t nc = channels.size();
    std::vector<Sparse> J;
    std::vector<Sparse> J_adj;
    std::vector<double> sqrt_rate;
    for (const auto& c : channels) {
        sqrt_rate.push_back(std::sqrt(c.rate));
        J.push_back(to_sparse(sqrt_rate.back() * c.op.matrix()));
        J_adj.push_back(J.back().adjoint());
    }
    std::vector<Matrix> obs_t;
    for (const auto& o : opts.observables) obs_t.push_back(o.matrix().transpose());

    const auto steps = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
    const std::size_t s = opts.store_every;
    const std::size_t n_samples = steps / s;

    HeterodyneRecord rec;
    rec.seed = opts.seed;
    rec.dt = opts.dt;
    rec.sample_dt = opts.dt * static_cast<double>(s);
    rec.store_every = s;
    for (const auto& c : channels) rec.rates.push_back(c.rate);
    rec.times.reserve(n_samples);
    rec.cond_expectations.assign(nc, {});
    rec.increments.assign(nc, {});
    for (std::size_t c = 0; c < nc; ++c) {
        rec.cond_expectations[c].reserve(n_samples);
        rec.increments[c].reserve(n_samples);
    }
    rec.observables.assign(obs_t.size(), {});

    std::vector<std::size_t> snapshot_steps;
    for (double t : opts.snapshot_times) snapshot_steps.push_back(static_cast<std::size_t>(std::llround(t / opts.dt)));

    Rng rng(opts.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * opts.dt));

    Matrix rho = rho0.matrix();
    Matrix next;
    Matrix m;
    Matrix jm;
    Matrix mj;
    lindblad::Liouvillian::Workspace ws;
    std::vector<cplx> e(nc);
    std::vector<cplx> block_e(nc);
    std::vector<cplx> block_z(nc);
    const double inv_s = 1.0 / static_cast<double>(s);

    auto take_snapshots = [&](std::size_t k) {
        for (std::size_t i = 0; i < snapshot_steps.size(); ++i) {
            if (snapshot_steps[i] == k) {
                rec.snapshots.push_back({static_cast<double>(k) * opts.dt, DensityOperator::unchecked_positivity(Operator(rho))});
            }
        }
    };

    for (std::size_t k = 0; k < n_samples * s; ++k) {
        take_snapshots(k);
        if (k % s == 0) {
            rec.times.push_back(static_cast<double>(k) * opts.dt);
            for (std::size_t o = 0; o < obs_t.size(); ++o) rec.observables[o].push_back(obs_t[o].cwiseProduct(rho).sum());
            std::fill(block_e.begin(), block_e.end(), cplx{0.0, 0.0});
            std::fill(block_z.begin(), block_z.end(), cplx{0.0, 0.0});
        }
        for (std::size_t c = 0; c < nc; ++c) e[c] = trace_product(J[c], rho);

        next = rho;
        L.rk4_step(next, opts.dt, ws);
        for (std::size_t c = 0; c < nc; ++c) {
            const cplx dz{normal(rng), normal(rng)};
            m.noalias() = J[c] * rho;
            m -= e[c] * rho;
            next += std::conj(dz) * m;
            next += dz * m.adjoint();
            // Second-order term (|dZ|^2 - dt) D[J - <J>] rho keeps near-pure
            // states from overshooting into negative eigenvalues.
            const double w = std::norm(dz) - opts.dt;
            jm.noalias() = J_adj[c] * m;
            jm -= std::conj(e[c]) * m;
            mj.noalias() = m * J_adj[c];
            mj -= std::conj(e[c]) * m;
            next += w * mj;
            next -= (0.5 * w) * jm;
            next -= (0.5 * w) * jm.adjoint();
            block_e[c] += e[c] / sqrt_rate[c];
            block_z[c] += dz;
        }

        const double tr = next.trace().real();
        if (std::abs(tr - 1.0) > opts.trace_drift_tolerance || !std::isfinite(tr)) {
            std::ostringstream msg;
            msg << "evolve_sme: trace drift " << std::abs(tr - 1.0) << " at t=" << static_cast<double>(k + 1) * opts.dt
                << " exceeds " << opts.trace_drift_tolerance << " (dt=" << opts.dt << ")";
            throw InvariantViolation(msg.str());
        }
        rho = 0.5 * (next + next.adjoint());
        rho /= tr;

        if ((k + 1) % opts.positivity_check_every == 0) {
            const double lam = min_hermitian_eigenvalue(rho);
            if (lam < opts.min_eigenvalue) {
                std::ostringstream msg;
                msg << "evolve_sme: conditional state eigenvalue " << lam << " at t="
                    << static_cast<double>(k + 1) * opts.dt << "; dt=" << opts.dt << " is too large, try dt <= "
                    << 0.5 * opts.dt;
                throw lindblad::StepSizeError(msg.str());
            }
        }

        if ((k + 1) % s == 0) {
            for (std::size_t c = 0; c < nc; ++c) {
                rec.cond_expectations[c].push_back(block_e[c] * inv_s);
                rec.increments[c].push_back(block_z[c]);
            }
        }
    }
    take_snapshots(n_samples * s);
    return rec;
}

std::vector<std::vector<cplx>> heterodyne_current(const HeterodyneRecord& record) {
    std::vector<std::vector<cplx>> out(record.channels());
    for (std::size_t c = 0; c < record.channels(); ++c) {
        const double g = std::sqrt(record.rates[c]);
        out[c].resize(record.size());
        for (std::size_t j = 0; j < record.size(); ++j) {
            out[c][j] = g * record.cond_expectations[c][j] + record.increments[c][j] / record.sample_dt;
        }
    }
    return out;
}

void run_sme_ensemble(const lindblad::Liouvillian& L, const std::vector<MonitoredChannel>& channels,
                      const DensityOperator& rho0, const SmeOptions& opts, std::size_t n_traj, unsigned threads,
                      const std::function<void(std::size_t, HeterodyneRecord&&)>& sink) {
    parallel_for(
        n_traj,
        [&](std::size_t i) {
            SmeOptions o = opts;
            o.seed = stream_seed(opts.seed, i);
            sink(i, evolve_sme(L, channels, rho0, o));
        },
        threads);
}

std::vector<double> measured_phase_differences(const HeterodyneRecord& record, const PhaseEstimateOptions& opts,
                                               std::size_t* skipped) {
    if (opts.channel_a >= record.channels() || opts.channel_b >= record.channels()) {
        throw std::invalid_argument("measured_phase_distribution: record lacks the requested channels");
    }
    if (opts.tau_f < 0.0) throw std::invalid_argument("measured_phase_distribution: tau_f must be > 0");
    const double tau_f = opts.tau_f > 0.0 ? opts.tau_f : 2.0 / record.rates[opts.channel_a];
    const double w = 1.0 - std::exp(-record.sample_dt / tau_f);
    const auto currents = heterodyne_current(record);
    const auto& ia = currents[opts.channel_a];
    const auto& ib = currents[opts.channel_b];
    std::vector<double> phases;
    cplx fa = 0.0;
    cplx fb = 0.0;
    std::size_t skip = 0;
    for (std::size_t j = 0; j < record.size(); ++j) {
        fa += w * (ia[j] - fa);
        fb += w * (ib[j] - fb);
        if (record.times[j] < opts.t_min) continue;
        if (std::abs(fa) < 1e-12 || std::abs(fb) < 1e-12) {
            ++skip;
            continue;
        }
        phases.push_back(std::arg(fb * std::conj(fa)));
    }
    if (skipped != nullptr) *skipped = skip;
    return phases;
}

HistogramDist measured_phase_distribution(const std::vector<HeterodyneRecord>& records,
                                          const PhaseEstimateOptions& opts) {
    PhaseHistogramBuilder builder(opts.n_bins, HistogramDomain::PhaseDifference);
    for (const auto& r : records) {
        std::size_t skipped = 0;
        const auto phases = measured_phase_differences(r, opts, &skipped);
        builder.add_group(phases, skipped);
    }
    return builder.finish();
}

PeriodogramAccumulator::PeriodogramAccumulator(std::vector<double> omegas, double sample_dt,
                                               std::size_t segment_length)
    : omegas_(std::move(omegas)), sample_dt_(sample_dt), segment_length_(segment_length), sums_(omegas_.size(), 0.0) {
    if (!(sample_dt > 0.0)) throw std::invalid_argument("PeriodogramAccumulator: sample_dt must be > 0");
    if (segment_length < 2) throw std::invalid_argument("PeriodogramAccumulator: segment length must be >= 2");
}

void PeriodogramAccumulator::add(const std::vector<cplx>& current, std::size_t first) {
    const std::size_t available = current.size() > first ? current.size() - first : 0;
    const std::size_t n_seg = available / segment_length_;
    if (n_seg == 0) {
        std::ostringstream msg;
        msg << "measured_spectrum: stationary segment of " << available << " samples is shorter than one periodogram segment ("
            << segment_length_ << " samples)";
        throw std::invalid_argument(msg.str());
    }
    const double norm = sample_dt_ / static_cast<double>(segment_length_);
    constexpr std::size_t kResync = 256;
    for (std::size_t seg = 0; seg < n_seg; ++seg) {
        const cplx* x = current.data() + first + seg * segment_length_;
        for (std::size_t m = 0; m < omegas_.size(); ++m) {
            const double wdt = omegas_[m] * sample_dt_;
            const cplx step = std::polar(1.0, wdt);
            cplx acc = 0.0;
            cplx phase = 1.0;
            for (std::size_t n = 0; n < segment_length_; ++n) {
                if (n % kResync == 0) phase = std::polar(1.0, wdt * static_cast<double>(n));
                acc += x[n] * phase;
                phase *= step;
            }
            sums_[m] += norm * std::norm(acc);
        }
    }
    segments_ += n_seg;
}

void PeriodogramAccumulator::merge(const PeriodogramAccumulator& other) {
    if (other.omegas_ != omegas_ || other.segment_length_ != segment_length_ || other.sample_dt_ != sample_dt_) {
        throw std::invalid_argument("PeriodogramAccumulator::merge: incompatible accumulators");
    }
    for (std::size_t m = 0; m < sums_.size(); ++m) sums_[m] += other.sums_[m];
    segments_ += other.segments_;
}

SpectrumSeries PeriodogramAccumulator::result() const {
    if (segments_ == 0) throw std::logic_error("PeriodogramAccumulator: no segments accumulated");
    SpectrumSeries s;
    s.method = SpectrumMethod::CurrentPeriodogram;
    s.omegas = omegas_;
    s.values.resize(sums_.size());
    for (std::size_t m = 0; m < sums_.size(); ++m) s.values[m] = sums_[m] / static_cast<double>(segments_);
    return s;
}

SpectrumSeries measured_spectrum(const std::vector<HeterodyneRecord>& records, std::size_t channel, double t_min,
                                 double segment_time, const std::vector<double>& omegas) {
    if (records.empty()) throw std::invalid_argument("measured_spectrum: no records");
    const double sdt = records.front().sample_dt;
    const auto n = static_cast<std::size_t>(std::llround(segment_time / sdt));
    PeriodogramAccumulator acc(omegas, sdt, n);
    for (const auto& r : records) {
        if (channel >= r.channels()) throw std::invalid_argument("measured_spectrum: channel out of range");
        acc.add(heterodyne_current(r)[channel], r.index_at_or_after(t_min));
    }
    return acc.result();
}

}  // namespace qsync::hetero
