#include "qsync/classical.hpp"

#include "qsync/parallel.hpp"
#include "qsync/random.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsync::classical {

namespace {

constexpr cplx kI{0.0, 1.0};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::size_t step_count(const IntegrationOptions& opts) {
    return static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
}

cplx vdp_drift(const VdpParams& p, cplx a) {
    return -kI * p.omega * a + 0.5 * p.kappa1 * a - p.kappa2 * std::norm(a) * a;
}

}  // namespace

double VdpParams::r0() const { return std::sqrt(kappa1 / (2.0 * kappa2)); }

void VdpParams::validate() const {
    if (!(kappa1 > 0.0)) throw std::invalid_argument("VdpParams: kappa1 must be > 0");
    if (!(kappa2 > 0.0)) throw std::invalid_argument("VdpParams: kappa2 must be > 0");
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("VdpParams: sigma2 must be >= 0");
    if (!std::isfinite(omega)) throw std::invalid_argument("VdpParams: omega must be finite");
}

void CoupledPhaseParams::validate() const {
    if (!(V >= 0.0)) throw std::invalid_argument("CoupledPhaseParams: V must be >= 0");
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("CoupledPhaseParams: sigma2 must be >= 0");
    if (!std::isfinite(delta)) throw std::invalid_argument("CoupledPhaseParams: delta must be finite");
}

void IntegrationOptions::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("integration: dt must be > 0");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("integration: T must be > 0");
    if (n_traj < 1) throw std::invalid_argument("integration: n_traj must be >= 1");
    if (record_every < 1) throw std::invalid_argument("integration: record_every must be >= 1");
    if (dt > t_final) throw std::invalid_argument("integration: dt exceeds T");
}

std::size_t TrajectoryRecord::index_at_or_after(double t_min) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t_min - 1e-9 * std::max(1.0, sample_dt));
    return static_cast<std::size_t>(std::distance(times.begin(), it));
}

std::vector<TrajectoryRecord> simulate_vdp(const VdpParams& params, cplx alpha0, const IntegrationOptions& opts) {
    params.validate();
    opts.validate();
    if (!finite(alpha0)) throw std::invalid_argument("simulate_vdp: non-finite alpha0");

    const std::size_t steps = step_count(opts);
    const std::size_t n_rec = steps / opts.record_every + 1;
    const double noise = std::sqrt(params.sigma2 * opts.dt);
    const cplx rotation = std::exp(-kI * params.omega * opts.dt);
    std::vector<TrajectoryRecord> out(opts.n_traj);

    parallel_for(
        opts.n_traj,
        [&](std::size_t i) {
            TrajectoryRecord rec;
            rec.kind = TrajectoryKind::Amplitude;
            rec.seed = stream_seed(opts.seed, i);
            rec.dt = opts.dt;
            rec.sample_dt = opts.dt * static_cast<double>(opts.record_every);
            rec.times.reserve(n_rec);
            rec.amplitudes.reserve(n_rec);
            Rng rng(rec.seed);
            std::normal_distribution<double> gauss(0.0, 1.0);

            cplx a = alpha0;
            rec.times.push_back(0.0);
            rec.amplitudes.push_back(a);
            for (std::size_t k = 1; k <= steps; ++k) {
                cplx next = a + (0.5 * params.kappa1 - params.kappa2 * std::norm(a)) * a * opts.dt;
                if (noise > 0.0) {
                    const double wx = gauss(rng);
                    const double wy = gauss(rng);
                    next += noise * cplx{wx, wy};
                }
                a = rotation * next;
                if (k % opts.record_every == 0) {
                    rec.times.push_back(static_cast<double>(k) * opts.dt);
                    rec.amplitudes.push_back(a);
                }
            }
            out[i] = std::move(rec);
        },
        opts.threads);
    return out;
}

std::vector<cplx> integrate_vdp_rk4(const VdpParams& params, cplx alpha0, double dt, double t_final,
                                    std::size_t record_every) {
    params.validate();
    if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("integrate_vdp_rk4: dt, T must be > 0");
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    std::vector<cplx> out{alpha0};
    cplx a = alpha0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const cplx k1 = vdp_drift(params, a);
        const cplx k2 = vdp_drift(params, a + 0.5 * dt * k1);
        const cplx k3 = vdp_drift(params, a + 0.5 * dt * k2);
        const cplx k4 = vdp_drift(params, a + dt * k3);
        a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (k % record_every == 0) out.push_back(a);
    }
    return out;
}

std::vector<std::array<cplx, 2>> integrate_two_vdp_rk4(const VdpParams& single, double delta, double V, cplx alpha0,
                                                      cplx beta0, double dt, double t_final,
                                                      std::size_t record_every) {
    single.validate();
    if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("integrate_two_vdp_rk4: dt, T must be > 0");
    using State = std::array<cplx, 2>;
    auto rhs = [&](const State& s) -> State {
        const auto [a, b] = s;
        return {-kI * delta * a / 2.0 + single.kappa1 * a / 2.0 - single.kappa2 * std::norm(a) * a + V * (b - a) / 2.0,
                kI * delta * b / 2.0 + single.kappa1 * b / 2.0 - single.kappa2 * std::norm(b) * b + V * (a - b) / 2.0};
    };
    auto axpy = [](const State& s, double h, const State& d) -> State { return {s[0] + h * d[0], s[1] + h * d[1]}; };
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    std::vector<State> out{{alpha0, beta0}};
    State s{alpha0, beta0};
    for (std::size_t k = 1; k <= steps; ++k) {
        const State k1 = rhs(s);
        const State k2 = rhs(axpy(s, 0.5 * dt, k1));
        const State k3 = rhs(axpy(s, 0.5 * dt, k2));
        const State k4 = rhs(axpy(s, dt, k3));
        for (int j = 0; j < 2; ++j) s[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        if (k % record_every == 0) out.push_back(s);
    }
    return out;
}

std::vector<TrajectoryRecord> simulate_coupled_phases(const CoupledPhaseParams& params, std::pair<double, double> phi0,
                                                      const IntegrationOptions& opts) {
    params.validate();
    opts.validate();
    if (!std::isfinite(phi0.first) || !std::isfinite(phi0.second)) {
        throw std::invalid_argument("simulate_coupled_phases: non-finite initial phases");
    }
    const std::size_t steps = step_count(opts);
    const std::size_t n_rec = steps / opts.record_every + 1;
    const double noise = std::sqrt(0.5 * params.sigma2 * opts.dt);
    const double half_delta = 0.5 * params.delta;
    const double half_v = 0.5 * params.V;
    std::vector<TrajectoryRecord> out(opts.n_traj);

    parallel_for(
        opts.n_traj,
        [&](std::size_t i) {
            TrajectoryRecord rec;
            rec.kind = TrajectoryKind::PhasePair;
            rec.seed = stream_seed(opts.seed, i);
            rec.dt = opts.dt;
            rec.sample_dt = opts.dt * static_cast<double>(opts.record_every);
            rec.times.reserve(n_rec);
            rec.phases.reserve(n_rec);
            Rng rng(rec.seed);
            std::normal_distribution<double> gauss(0.0, 1.0);

            double pa = phi0.first;
            double pb = phi0.second;
            rec.times.push_back(0.0);
            rec.phases.push_back({pa, pb});
            for (std::size_t k = 1; k <= steps; ++k) {
                const double s = std::sin(pb - pa);
                double na = pa + (half_delta + half_v * s) * opts.dt;
                double nb = pb + (-half_delta - half_v * s) * opts.dt;
                if (noise > 0.0) {
                    na += noise * gauss(rng);
                    nb += noise * gauss(rng);
                }
                pa = na;
                pb = nb;
                if (k % opts.record_every == 0) {
                    rec.times.push_back(static_cast<double>(k) * opts.dt);
                    rec.phases.push_back({pa, pb});
                }
            }
            out[i] = std::move(rec);
        },
        opts.threads);
    return out;
}

namespace {

double sample_phase(const TrajectoryRecord& r, std::size_t j) {
    if (r.kind == TrajectoryKind::Amplitude) return -std::arg(r.amplitudes[j]);
    return r.phases[j][0] - r.phases[j][1];
}

}  // namespace

HistogramDist histogram_phase(const std::vector<TrajectoryRecord>& trajs, double t_min, std::size_t n_bins) {
    if (trajs.empty()) throw std::invalid_argument("histogram_phase: empty sample set");
    PhaseHistogramBuilder builder(n_bins, trajs.front().kind == TrajectoryKind::Amplitude
                                              ? HistogramDomain::Phase
                                              : HistogramDomain::PhaseDifference);
    std::vector<double> phases;
    for (const auto& r : trajs) {
        phases.clear();
        for (std::size_t j = r.index_at_or_after(t_min); j < r.size(); ++j) phases.push_back(sample_phase(r, j));
        builder.add_group(phases);
    }
    try {
        return builder.finish();
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("histogram_phase: no samples with t >= t_min");
    }
}

HistogramDist histogram_xy(const std::vector<TrajectoryRecord>& trajs, double t_snapshot, const XYGrid& grid) {
    if (trajs.empty()) throw std::invalid_argument("histogram_xy: empty sample set");
    if (grid.nx == 0 || grid.np == 0 || !(grid.x_max > grid.x_min) || !(grid.p_max > grid.p_min)) {
        throw std::invalid_argument("histogram_xy: invalid grid");
    }
    HistogramDist h;
    h.domain = HistogramDomain::XYPlane;
    h.bin_edges = linspace(grid.x_min, grid.x_max, grid.nx + 1);
    h.bin_edges_p = linspace(grid.p_min, grid.p_max, grid.np + 1);
    h.masses.assign(grid.nx * grid.np, 0.0);
    const double hx = (grid.x_max - grid.x_min) / static_cast<double>(grid.nx);
    const double hp = (grid.p_max - grid.p_min) / static_cast<double>(grid.np);
    for (const auto& r : trajs) {
        if (r.kind != TrajectoryKind::Amplitude) throw std::invalid_argument("histogram_xy: needs amplitude records");
        if (r.times.empty() || t_snapshot < r.times.front() - 0.5 * r.sample_dt ||
            t_snapshot > r.times.back() + 0.5 * r.sample_dt) {
            throw std::out_of_range("histogram_xy: t_snapshot outside recorded range");
        }
        const auto j = static_cast<std::size_t>(
            std::clamp<long long>(std::llround((t_snapshot - r.times.front()) / r.sample_dt), 0,
                                  static_cast<long long>(r.size()) - 1));
        const cplx a = r.amplitudes[j];
        const double fx = std::floor((a.real() - grid.x_min) / hx);
        const double fp = std::floor((a.imag() - grid.p_min) / hp);
        if (fx < 0.0 || fp < 0.0 || fx >= static_cast<double>(grid.nx) || fp >= static_cast<double>(grid.np)) {
            ++h.skipped;
            continue;
        }
        h.masses[static_cast<std::size_t>(fx) * grid.np + static_cast<std::size_t>(fp)] += 1.0;
        ++h.samples;
    }
    if (h.samples == 0) throw std::invalid_argument("histogram_xy: no samples inside the grid");
    for (auto& m : h.masses) m /= static_cast<double>(h.samples);
    return h;
}

namespace {

SpectrumSeries transform_correlation(const std::vector<cplx>& g, double dtau, const std::vector<double>& omegas) {
    SpectrumSeries s;
    s.method = SpectrumMethod::FftOfCorrelation;
    s.omegas = omegas;
    s.values.resize(omegas.size());
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        const cplx step = std::exp(-kI * omegas[m] * dtau);
        cplx phase = step;
        cplx acc = 0.0;
        for (std::size_t k = 1; k < g.size(); ++k) {
            acc += g[k] * phase;
            phase *= step;
        }
        s.values[m] = dtau * (g[0].real() + 2.0 * acc.real());
    }
    return s;
}

}  // namespace

std::vector<SpectrumSeries> classical_spectrum(const std::vector<TrajectoryRecord>& trajs, double t_min, double max_lag,
                                               const std::vector<double>& omegas) {
    if (trajs.empty()) throw std::invalid_argument("classical_spectrum: empty sample set");
    if (!(max_lag > 0.0)) throw std::invalid_argument("classical_spectrum: max_lag must be > 0");
    const TrajectoryKind kind = trajs.front().kind;
    const double sdt = trajs.front().sample_dt;
    const auto lags = static_cast<std::size_t>(std::llround(max_lag / sdt));
    const std::size_t n_series = kind == TrajectoryKind::Amplitude ? 1 : 2;

    std::vector<std::vector<cplx>> g(n_series, std::vector<cplx>(lags + 1, 0.0));
    std::vector<double> weight(lags + 1, 0.0);
    std::vector<cplx> z;
    for (const auto& r : trajs) {
        if (r.kind != kind || std::abs(r.sample_dt - sdt) > 1e-12 * sdt) {
            throw std::invalid_argument("classical_spectrum: records must share kind and sampling");
        }
        const std::size_t j0 = r.index_at_or_after(t_min);
        const std::size_t n = r.size() - j0;
        if (n <= lags) throw std::invalid_argument("classical_spectrum: stationary segment shorter than max lag");
        for (std::size_t s = 0; s < n_series; ++s) {
            z.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                if (kind == TrajectoryKind::Amplitude) {
                    z[j] = r.amplitudes[j0 + j];
                } else {
                    // e^{-i phi} plays the role of the amplitude.
                    z[j] = std::exp(-kI * r.phases[j0 + j][s]);
                }
            }
            for (std::size_t k = 0; k <= lags; ++k) {
                cplx acc = 0.0;
                for (std::size_t j = 0; j + k < n; ++j) acc += std::conj(z[j + k]) * z[j];
                g[s][k] += acc;
                if (s == 0) weight[k] += static_cast<double>(n - k);
            }
        }
    }
    std::vector<SpectrumSeries> out;
    for (std::size_t s = 0; s < n_series; ++s) {
        for (std::size_t k = 0; k <= lags; ++k) g[s][k] /= weight[k];
        out.push_back(transform_correlation(g[s], sdt, omegas));
    }
    return out;
}

double observed_frequency_difference(const std::vector<TrajectoryRecord>& trajs, double t_min) {
    if (trajs.empty()) throw std::invalid_argument("observed_frequency_difference: empty sample set");
    double acc = 0.0;
    for (const auto& r : trajs) {
        if (r.kind != TrajectoryKind::PhasePair) {
            throw std::invalid_argument("observed_frequency_difference: needs phase-pair records");
        }
        const std::size_t j0 = r.index_at_or_after(t_min);
        if (j0 + 1 >= r.size()) throw std::invalid_argument("observed_frequency_difference: t_min beyond record");
        const auto& first = r.phases[j0];
        const auto& last = r.phases.back();
        const double span = r.times.back() - r.times[j0];
        acc += ((last[0] - last[1]) - (first[0] - first[1])) / span;
    }
    return acc / static_cast<double>(trajs.size());
}

namespace {

struct LorentzResidual : Eigen::DenseFunctor<double> {
    const std::vector<double>* w;
    const std::vector<double>* y;
    LorentzResidual(const std::vector<double>& w_, const std::vector<double>& y_)
        : Eigen::DenseFunctor<double>(3, static_cast<int>(w_.size())), w(&w_), y(&y_) {}
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        const double hw = 0.5 * p(2);
        for (std::size_t i = 0; i < w->size(); ++i) {
            const double u = ((*w)[i] - p(1)) / hw;
            f(static_cast<Eigen::Index>(i)) = p(0) / (1.0 + u * u) - (*y)[i];
        }
        return 0;
    }
};

}  // namespace

LorentzianFit fit_lorentzian(const SpectrumSeries& s, double floor_fraction) {
    if (s.size() < 4) throw std::invalid_argument("fit_lorentzian: too few points");
    const std::size_t peak = s.argmax();
    const double top = s.values[peak];
    std::size_t lo = peak;
    std::size_t hi = peak;
    while (lo > 0 && s.values[lo - 1] > floor_fraction * top) --lo;
    while (hi + 1 < s.size() && s.values[hi + 1] > floor_fraction * top) ++hi;
    std::vector<double> w(s.omegas.begin() + static_cast<long>(lo), s.omegas.begin() + static_cast<long>(hi) + 1);
    std::vector<double> y(s.values.begin() + static_cast<long>(lo), s.values.begin() + static_cast<long>(hi) + 1);

    // Initial width from the half-maximum crossings.
    std::size_t a = peak;
    std::size_t b = peak;
    while (a > lo && s.values[a] > 0.5 * top) --a;
    while (b < hi && s.values[b] > 0.5 * top) ++b;
    double width0 = s.omegas[b] - s.omegas[a];
    if (!(width0 > 0.0)) width0 = 2.0 * (s.omegas[1] - s.omegas[0]);

    LorentzianFit fit;
    fit.points = w.size();
    Eigen::VectorXd p(3);
    p << top, s.omegas[peak], width0;
    if (w.size() < 4) {
        fit.amplitude = p(0);
        fit.center = p(1);
        fit.fwhm = p(2);
        return fit;
    }
    LorentzResidual functor(w, y);
    Eigen::NumericalDiff<LorentzResidual> numdiff(functor);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LorentzResidual>> lm(numdiff);
    const auto status = lm.minimize(p);
    fit.amplitude = p(0);
    fit.center = p(1);
    fit.fwhm = std::abs(p(2));
    fit.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall;
    return fit;
}

}  // namespace qsync::classical
