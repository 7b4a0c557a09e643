#include "doctest.h"

#include "qsync/parallel.hpp"
#include "qsync/random.hpp"
#include "qsync/series.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

using namespace qsync;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TEST_CASE("phase wrapping and angular distance") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(std::abs(wrap_phase(-0.5) - (kTwoPi - 0.5)) < 1e-15);
    CHECK(std::abs(wrap_phase(7.0 * kTwoPi + 1.0) - 1.0) < 1e-12);
    CHECK(wrap_phase(kTwoPi) < kTwoPi);
    CHECK(std::abs(angular_distance(0.1, kTwoPi - 0.1) - 0.2) < 1e-12);
    CHECK(std::abs(angular_distance(0.0, std::numbers::pi) - std::numbers::pi) < 1e-12);
}

TEST_CASE("phase histogram builder: normalization, errors, merge") {
    PhaseHistogramBuilder a(16, HistogramDomain::Phase);
    PhaseHistogramBuilder b(16, HistogramDomain::Phase);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int g = 0; g < 40; ++g) {
        std::vector<double> phases(500);
        for (auto& p : phases) p = u(rng);
        (g % 2 == 0 ? a : b).add_group(phases, 1);
    }
    a.merge(b);
    const auto h = a.finish();
    CHECK(h.size() == 16);
    CHECK(h.samples == 20000);
    CHECK(h.skipped == 40);
    CHECK(std::abs(h.total_mass() - 1.0) < 1e-12);
    CHECK(h.std_errors.size() == 16);
    double integral = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) integral += h.density(i) * h.bin_measure(i);
    CHECK(std::abs(integral - 1.0) < 1e-12);
    // Uniform phases: every bin within 5 standard errors of 1/16.
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(h.masses[i] - 1.0 / 16.0) < 5.0 * h.std_errors[i] + 1e-12);

    CHECK_THROWS_AS(PhaseHistogramBuilder(4, HistogramDomain::Phase), std::invalid_argument);
    PhaseHistogramBuilder empty(8, HistogramDomain::Phase);
    CHECK_THROWS_AS((void)empty.finish(), std::invalid_argument);
    PhaseHistogramBuilder other(9, HistogramDomain::Phase);
    CHECK_THROWS_AS(empty.merge(other), std::invalid_argument);
}

TEST_CASE("phase histogram: point mass lands in its bin") {
    PhaseHistogramBuilder b(8, HistogramDomain::PhaseDifference);
    b.add_group({std::numbers::pi / 6.0, std::numbers::pi / 6.0 + kTwoPi, std::numbers::pi / 6.0 - kTwoPi});
    const auto h = b.finish();
    CHECK(h.argmax() == 0);
    CHECK(h.masses[0] == 1.0);
    CHECK(std::abs(h.bin_center(0) - kTwoPi / 16.0) < 1e-15);
    CHECK(h.std_errors.empty());
}

TEST_CASE("spectrum helpers") {
    const auto grid = linspace(-1.0, 1.0, 5);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front() == -1.0);
    CHECK(grid.back() == 1.0);
    CHECK(std::abs(grid[1] + 0.5) < 1e-15);

    SpectrumSeries s;
    s.omegas = linspace(0.0, 0.99, 100);
    for (double w : s.omegas) s.values.push_back(w < 0.5 ? 1.0 : 3.0);
    CHECK(s.peak_omega() >= 0.5);
    const auto avg = bin_average(s, 0.25, 0.0, 1.0);
    REQUIRE(avg.size() == 4);
    CHECK(std::abs(avg.omegas[0] - 0.125) < 1e-15);
    CHECK(std::abs(avg.values[0] - 1.0) < 1e-15);
    CHECK(std::abs(avg.values[3] - 3.0) < 1e-15);

    const auto sparse = bin_average(s, 0.25, -1.0, 1.0);
    CHECK(sparse.size() == 4);
    CHECK_THROWS_AS((void)bin_average(s, 0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)SpectrumSeries{}.argmax(), std::logic_error);
}

TEST_CASE("stream seeds are distinct and deterministic") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 4; ++s) {
        for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(s, i));
    }
    CHECK(seen.size() == 4000);
    static_assert(stream_seed(1, 2) == stream_seed(1, 2));
    auto r1 = make_stream(42, 3);
    auto r2 = make_stream(42, 3);
    for (int i = 0; i < 10; ++i) CHECK(r1() == r2());
}

TEST_CASE("parallel_for visits every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); }, 4);
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(
                        50,
                        [](std::size_t i) {
                            if (i == 17) throw std::runtime_error("boom");
                        },
                        3),
                    std::runtime_error);
    parallel_for(0, [](std::size_t) { FAIL("must not run"); });
}
