#include "doctest.h"

#include "qsync/heterodyne.hpp"
#include "qsync/random.hpp"

#include <cmath>
#include <numbers>

using namespace qsync;
using namespace qsync::hetero;
using lindblad::Liouvillian;

namespace {

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
};

MeanVar moments(const std::vector<double>& xs) {
    MeanVar m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(xs.size() - 1);
    return m;
}

// Spin scenario: gamma_+ = gamma_-/2, omega = 2 gamma_-, measured on s-.
struct SpinSetup {
    PauliOperators p = pauli_operators();
    Liouvillian L{lindblad::build_spin_model(2.0, 0.5, 1.0)};
    std::vector<MonitoredChannel> channels{MonitoredChannel{pauli_operators().sm, 1.0, 1.0, "s-"}};
    DensityOperator rho0 = DensityOperator::pure(spin_coherent_ket(std::numbers::pi / 2, 0.0));
};

std::vector<std::vector<double>> ensemble_sx(const SpinSetup& s, const SmeOptions& o, std::size_t n) {
    std::vector<std::vector<double>> out(n);
    run_sme_ensemble(s.L, s.channels, s.rho0, o, n, 2, [&](std::size_t i, HeterodyneRecord&& r) {
        for (const auto& v : r.observables[0]) out[i].push_back(v.real());
    });
    return out;
}

}  // namespace

TEST_CASE("channel and option validation") {
    SpinSetup s;
    SmeOptions o;
    o.t_final = 0.01;
    CHECK_THROWS_AS((void)evolve_sme(s.L, {}, s.rho0, o), std::invalid_argument);
    CHECK_THROWS_AS((void)evolve_sme(s.L, {MonitoredChannel{s.p.sm, 0.5, 1.0, "wrong rate"}}, s.rho0, o),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)evolve_sme(s.L, {MonitoredChannel{s.p.sx, 1.0, 1.0, "not a dissipator"}}, s.rho0, o),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)evolve_sme(s.L, {MonitoredChannel{s.p.sm, 1.0, 0.5, "lossy"}}, s.rho0, o),
                    std::invalid_argument);
    CHECK_THROWS_AS(MonitoredChannel({s.p.sm, 0.0, 1.0, "dark"}).validate(), std::invalid_argument);
    SmeOptions bad = o;
    bad.dt = 0.0;
    CHECK_THROWS_AS((void)evolve_sme(s.L, s.channels, s.rho0, bad), std::invalid_argument);
    CHECK_THROWS_AS((void)evolve_sme(s.L, s.channels, DensityOperator::maximally_mixed(3), o), std::invalid_argument);
    CHECK_NOTHROW((void)evolve_sme(s.L, {MonitoredChannel{s.p.sp, 0.5, 1.0, "gain"}}, s.rho0, o));
}

TEST_CASE("records are reproducible from the seed") {
    SpinSetup s;
    SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 0.5;
    o.seed = 42;
    o.store_every = 5;
    o.observables = {s.p.sx};
    const auto a = evolve_sme(s.L, s.channels, s.rho0, o);
    const auto b = evolve_sme(s.L, s.channels, s.rho0, o);
    CHECK(a.increments == b.increments);
    CHECK(a.cond_expectations == b.cond_expectations);
    CHECK(a.size() == 100);
    CHECK(std::abs(a.sample_dt - 5e-3) < 1e-15);
    CHECK(std::abs(a.times[1] - 5e-3) < 1e-15);
    o.seed = 43;
    CHECK(evolve_sme(s.L, s.channels, s.rho0, o).increments != a.increments);

    o.seed = 7;
    std::vector<HeterodyneRecord> one(6), three(6);
    run_sme_ensemble(s.L, s.channels, s.rho0, o, 6, 1, [&](std::size_t i, HeterodyneRecord&& r) { one[i] = std::move(r); });
    run_sme_ensemble(s.L, s.channels, s.rho0, o, 6, 3, [&](std::size_t i, HeterodyneRecord&& r) { three[i] = std::move(r); });
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(one[i].seed == stream_seed(7, i));
        CHECK(one[i].increments == three[i].increments);
    }
}

TEST_CASE("conditional states stay valid and snapshots land on requested times") {
    SpinSetup s;
    SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 2.0;
    o.seed = 3;
    o.snapshot_times = {0.0, 0.5, 1.25};
    const auto r = evolve_sme(s.L, s.channels, s.rho0, o);
    REQUIRE(r.snapshots.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(r.snapshots[k].t - o.snapshot_times[k]) < 1e-9);
        CHECK(std::abs(r.snapshots[k].rho.op().trace() - cplx(1.0, 0.0)) < 1e-12);
        CHECK(r.snapshots[k].rho.min_eigenvalue() > -1e-4);
    }
}

TEST_CASE("oversized steps are reported") {
    SpinSetup s;
    SmeOptions o;
    o.dt = 0.4;
    o.t_final = 400.0;
    o.positivity_check_every = 1;
    CHECK_THROWS_AS((void)evolve_sme(s.L, s.channels, s.rho0, o), InvariantViolation);
}

TEST_CASE("dark channel: pure detector noise") {
    // Pure loss from the vacuum: <a>_m = 0 identically.
    const Liouvillian L(lindblad::build_qvdp_model(1.0, 0.0, 0.0, 1.0, 3));
    const auto f = fock_operators(3);
    SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 40.0;
    o.seed = 11;
    const auto r = evolve_sme(L, {MonitoredChannel{f.a, 1.0, 1.0, "a"}}, DensityOperator::pure(Ket::basis(4, 0)), o);
    const auto current = heterodyne_current(r)[0];
    std::vector<double> re;
    std::vector<double> im;
    for (const auto& c : current) {
        re.push_back(c.real() * std::sqrt(o.dt));
        im.push_back(c.imag() * std::sqrt(o.dt));
    }
    const double n = static_cast<double>(re.size());
    for (const auto& m : {moments(re), moments(im)}) {
        CHECK(std::abs(m.mean) < 5.0 * std::sqrt(0.5 / n));
        CHECK(std::abs(m.var - 0.5) < 5.0 * 0.5 * std::sqrt(2.0 / n));
    }
    for (const auto& e : r.cond_expectations[0]) CHECK(std::abs(e) < 1e-12);

    const auto grid = linspace(-20.0, 20.0, 41);
    const auto spec = measured_spectrum({r}, 0, 0.0, 2.0, grid);
    const double m = 20.0;  // segments
    for (double v : spec.values) CHECK(std::abs(v - 1.0) < 5.0 / std::sqrt(m));
}

TEST_CASE("current decomposition recovers the increments") {
    SpinSetup s;
    SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 20.0;
    o.seed = 5;
    o.store_every = 4;
    const auto r = evolve_sme(s.L, s.channels, s.rho0, o);
    const auto current = heterodyne_current(r)[0];
    std::vector<double> re;
    std::vector<double> im;
    for (std::size_t j = 0; j < r.size(); ++j) {
        const cplx z = current[j] - std::sqrt(r.rates[0]) * r.cond_expectations[0][j];
        CHECK(std::abs(z - r.increments[0][j] / r.sample_dt) < 1e-9);
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    const double n = static_cast<double>(re.size());
    const double var = 1.0 / (2.0 * r.sample_dt);
    for (const auto& m : {moments(re), moments(im)}) {
        CHECK(std::abs(m.mean) < 5.0 * std::sqrt(var / n));
        CHECK(std::abs(m.var - var) < 5.0 * var * std::sqrt(2.0 / n));
    }
}

TEST_CASE("ensemble average converges to the master equation like 1/sqrt(M)") {
    SpinSetup s;
    SmeOptions o;
    o.dt = 1e-3;
    o.t_final = 4.0;
    o.seed = 17;
    o.store_every = 100;
    o.observables = {s.p.sx};

    lindblad::MeOptions me;
    me.dt = 1e-3;
    me.t_final = 4.0;
    me.sample_every = 100;
    std::vector<double> times;
    const auto ex = lindblad::evolve_me_expectations(s.L, s.rho0, me, {s.p.sx}, times);

    const auto trajs = ensemble_sx(s, o, 400);
    const std::size_t n_t = trajs[0].size();
    // RMS over time and over independent batches of the ensemble-mean error.
    auto rms_error = [&](std::size_t m) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t b = 0; b + m <= trajs.size(); b += m) {
            for (std::size_t j = 1; j < n_t; ++j) {
                double mean = 0.0;
                for (std::size_t i = b; i < b + m; ++i) mean += trajs[i][j];
                mean /= static_cast<double>(m);
                acc += (mean - ex[j][0].real()) * (mean - ex[j][0].real());
                ++count;
            }
        }
        return std::sqrt(acc / static_cast<double>(count));
    };
    const double e25 = rms_error(25);
    const double e100 = rms_error(100);
    CHECK(e25 / e100 > 1.5);
    CHECK(e25 / e100 < 2.7);

    std::size_t within = 0;
    for (std::size_t j = 0; j < n_t; ++j) {
        std::vector<double> col;
        for (std::size_t i = 0; i < 100; ++i) col.push_back(trajs[i][j]);
        const auto m = moments(col);
        const double se = std::sqrt(m.var / 100.0);
        within += std::abs(m.mean - ex[j][0].real()) <= 3.0 * se + 1e-12 ? 1 : 0;
    }
    CHECK(static_cast<double>(within) >= 0.9 * static_cast<double>(n_t));
}

TEST_CASE("vanishing measurement rate: backaction shrinks like sqrt(rate)") {
    const auto p = pauli_operators();
    const auto rho0 = DensityOperator::pure(spin_coherent_ket(1.2, 0.3));
    auto deviation = [&](double rate) {
        const Liouvillian L(lindblad::build_spin_model(2.0, 0.5, rate));
        SmeOptions o;
        o.dt = 1e-3;
        o.t_final = 2.0;
        o.seed = 1;
        o.observables = {p.sx, p.sz};
        const auto r = evolve_sme(L, {MonitoredChannel{p.sm, rate, 1.0, "s-"}}, rho0, o);
        lindblad::MeOptions m;
        m.dt = 1e-3;
        m.t_final = 2.0;
        std::vector<double> times;
        const auto ex = lindblad::evolve_me_expectations(L, rho0, m, {p.sx, p.sz}, times);
        double d = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j)
            for (std::size_t k = 0; k < 2; ++k) d = std::max(d, std::abs(r.observables[k][j] - ex[j][k]));
        return d;
    };
    const double d6 = deviation(1e-6);
    const double d12 = deviation(1e-12);
    CHECK(d12 < 1e-5);
    CHECK(d6 / d12 == doctest::Approx(1e3).epsilon(0.05));
}

TEST_CASE("measured phase differences") {
    HeterodyneRecord r;
    r.dt = 0.01;
    r.sample_dt = 0.01;
    r.rates = {1.0, 1.0};
    for (int j = 0; j < 500; ++j) r.times.push_back(0.01 * j);
    r.cond_expectations = {std::vector<cplx>(500, cplx{1.0, 0.0}), std::vector<cplx>(500, std::polar(1.0, 0.7))};
    r.increments = {std::vector<cplx>(500), std::vector<cplx>(500)};

    std::size_t skipped = 0;
    PhaseEstimateOptions o;
    o.t_min = 1.0;
    const auto phases = measured_phase_differences(r, o, &skipped);
    CHECK(phases.size() == 400);
    CHECK(skipped == 0);
    for (double ph : phases) CHECK(std::abs(ph - 0.7) < 1e-12);
    const auto h = measured_phase_distribution({r, r}, o);
    CHECK(std::abs(h.bin_center(h.argmax()) - 0.7) <= 0.5 * (h.bin_edges[1] - h.bin_edges[0]));

    HeterodyneRecord dark = r;
    dark.cond_expectations[0].assign(500, cplx{0.0, 0.0});
    (void)measured_phase_differences(dark, o, &skipped);
    CHECK(skipped == 400);
    CHECK_THROWS_AS((void)measured_phase_distribution({dark}, o), std::invalid_argument);

    PhaseEstimateOptions missing = o;
    missing.channel_b = 2;
    CHECK_THROWS_AS((void)measured_phase_differences(r, missing, &skipped), std::invalid_argument);
}

TEST_CASE("measured phase difference of uncoupled spins is flat") {
    const Liouvillian L(lindblad::build_two_spin_model(0.5, 0.0, 0.5, 1.0));
    const auto ops = lindblad::two_spin_operators();
    const std::vector<MonitoredChannel> ch{{ops.sm_a, 1.0, 1.0, "A"}, {ops.sm_b, 1.0, 1.0, "B"}};
    SmeOptions o;
    o.dt = 2e-3;
    o.t_final = 200.0;
    o.seed = 9;
    o.store_every = 10;
    std::vector<HeterodyneRecord> records(8);
    run_sme_ensemble(L, ch, DensityOperator::maximally_mixed(4), o, 8, 2,
                     [&](std::size_t i, HeterodyneRecord&& r) { records[i] = std::move(r); });
    PhaseEstimateOptions pe;
    pe.t_min = 5.0;
    pe.n_bins = 16;
    const auto h = measured_phase_distribution(records, pe);
    for (std::size_t k = 0; k < h.size(); ++k) CHECK(std::abs(h.masses[k] - 1.0 / 16.0) < 5.0 * h.std_errors[k]);
}

TEST_CASE("periodogram accumulator") {
    const std::vector<double> grid = linspace(-3.0, 3.0, 13);
    std::vector<cplx> tone;
    for (int j = 0; j < 1000; ++j) tone.push_back(std::polar(1.0, -2.0 * 0.05 * j));
    PeriodogramAccumulator all(grid, 0.05, 200);
    all.add(tone);
    all.add(tone, 3);
    CHECK(all.segments() == 9);
    PeriodogramAccumulator a(grid, 0.05, 200);
    PeriodogramAccumulator b(grid, 0.05, 200);
    a.add(tone);
    b.add(tone, 3);
    a.merge(b);
    CHECK(a.segments() == 9);
    const auto ra = a.result();
    const auto rall = all.result();
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(ra.values[k] - rall.values[k]) < 1e-9 * rall.values[k] + 1e-12);
    // A tone e^{-i w t} peaks at +w with height T = N dt.
    CHECK(std::abs(ra.peak_omega() - 2.0) < 1e-12);
    CHECK(ra.values[ra.argmax()] == doctest::Approx(10.0).epsilon(1e-9));

    CHECK_THROWS_AS(all.add(std::vector<cplx>(150)), std::invalid_argument);
    CHECK_THROWS_AS(all.merge(PeriodogramAccumulator(grid, 0.05, 100)), std::invalid_argument);
    CHECK_THROWS_AS((void)PeriodogramAccumulator(grid, 0.05, 200).result(), std::logic_error);
    CHECK_THROWS_AS(PeriodogramAccumulator(grid, 0.0, 200), std::invalid_argument);
}
