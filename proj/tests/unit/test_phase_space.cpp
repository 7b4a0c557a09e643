#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include "qsync/lindblad.hpp"
#include "qsync/phase_space.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace qsync;
using namespace qsync::phase;
using namespace qsync::testing;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

DensityOperator rotate(const DensityOperator& rho, double theta) {
    Matrix m = rho.matrix();
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(n, k) *= std::exp(kI * theta * static_cast<double>(n - k));
    return DensityOperator(Operator(m));
}

}  // namespace

TEST_CASE("phase grid") {
    const PhaseGrid g(16);
    const auto phis = g.phis();
    REQUIRE(phis.size() == 16);
    CHECK(phis.front() == 0.0);
    CHECK(std::abs(g.spacing() - kTwoPi / 16.0) < 1e-15);
    for (std::size_t j = 1; j < phis.size(); ++j) CHECK(std::abs(phis[j] - phis[j - 1] - g.spacing()) < 1e-14);
    CHECK(phis.back() < kTwoPi);
    CHECK_THROWS_AS(PhaseGrid(7), std::invalid_argument);
}

TEST_CASE("boson Husimi Q: coherent and vacuum states") {
    const int n_max = 30;
    const cplx beta{1.0, 0.5};
    const auto rho = DensityOperator::pure(coherent_ket(beta, n_max).ket);
    const auto xs = linspace(-2.0, 2.0, 21);
    const auto q = husimi_q_boson(rho, xs, xs);
    CHECK(q.kind == SurfaceKind::Plane);
    CHECK_FALSE(q.beyond_truncation);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const cplx alpha{xs[i], xs[j]};
            CHECK(std::abs(q.at(i, j) - std::exp(-std::norm(alpha - beta)) / kPi) < 1e-8);
        }
    }

    const auto vac = husimi_q_boson(DensityOperator::pure(Ket::basis(6, 0)), {0.0}, {0.0});
    CHECK(std::abs(vac.values[0] - 1.0 / kPi) < 1e-15);

    CHECK(std::abs(truncation_radius(25) - 4.0) < 1e-15);
    CHECK(husimi_q_boson(DensityOperator::pure(Ket::basis(11, 0)), {0.0, 5.0}, {0.0}).beyond_truncation);
}

TEST_CASE("boson Husimi Q of the limit-cycle steady state: ring, positivity, normalization") {
    lindblad::SteadyStateOptions o;
    o.method = lindblad::SteadyStateMethod::Integration;
    const auto ss = lindblad::steady_state(lindblad::Liouvillian(lindblad::build_qvdp_model(4.0, 4.0, 0.5, 1.0, 50)), o);

    for (double r : {0.5, 1.5, 1.9, 2.5}) {
        double lo = 1e300;
        double hi = -1e300;
        for (int k = 0; k < 24; ++k) {
            const cplx alpha = std::polar(r, -kTwoPi * k / 24.0);
            const double v = husimi_q_boson(ss.rho, {alpha.real()}, {alpha.imag()}).values[0];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo < 1e-8);
    }

    const auto xs = linspace(-4.0, 4.0, 161);
    const auto q = husimi_q_boson(ss.rho, xs, xs);
    CHECK_FALSE(q.beyond_truncation);
    CHECK(q.min() >= -1e-12);
    CHECK(std::abs(q.integral() - 1.0) < 0.02);
    // The ring: Q at the origin is below Q on the ring.
    CHECK(q.at(80, 80) < husimi_q_boson(ss.rho, {1.9}, {0.0}).values[0]);
}

TEST_CASE("boson phase distribution: closed form against radial quadrature") {
    std::mt19937_64 rng(31);
    const PhaseGrid grid(16);
    for (int trial = 0; trial < 3; ++trial) {
        const auto rho = qsync::testing::random_density(5, rng);
        const auto d = phase_dist_boson(rho, grid);
        REQUIRE(d.size() == 16);
        for (std::size_t j = 0; j < d.size(); ++j) {
            CHECK(std::abs(d.values[j] - boson_phase_oracle(rho.matrix(), d.phis[j])) < 1e-6);
            CHECK(d.values[j] >= -1e-10);
        }
        CHECK(std::abs(d.integral() - 1.0) < 1e-10);
    }
}

TEST_CASE("boson phase distribution: Fock-diagonal states are flat") {
    Matrix m = Matrix::Zero(8, 8);
    for (int n = 0; n < 8; ++n) m(n, n) = (n + 1) / 36.0;
    const auto d = phase_dist_boson(DensityOperator(Operator(m)));
    for (double v : d.values) CHECK(std::abs(v - 1.0 / kTwoPi) < 1e-15);
}

TEST_CASE("boson phase distribution: coherent state peaks at -arg(beta)") {
    const auto rho = DensityOperator::pure(coherent_ket(std::polar(2.0, -kPi / 2.0), 30).ket);
    const auto d = phase_dist_boson(rho, PhaseGrid(64));
    CHECK(std::abs(d.peak_phase() - kPi / 2.0) < 1e-12);
}

TEST_CASE("rotating a bosonic state shifts its phase distribution (property)") {
    std::mt19937_64 rng(4);
    const PhaseGrid grid(32);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rho = qsync::testing::random_density(7, rng);
        const std::size_t k = rng() % 32;
        const double theta = grid.spacing() * static_cast<double>(k);
        const auto base = phase_dist_boson(rho, grid);
        const auto rotated = phase_dist_boson(rotate(rho, theta), grid);
        for (std::size_t j = 0; j < 32; ++j) CHECK(std::abs(rotated.values[j] - base.values[(j + k) % 32]) < 1e-12);
    }
}

TEST_CASE("two-mode phase difference: quadrature oracle and product states") {
    std::mt19937_64 rng(8);
    const auto rho = qsync::testing::random_density(9, rng);
    const PhaseGrid grid(8);
    const auto d = phase_diff_dist_boson(rho, grid);
    for (std::size_t j = 0; j < d.size(); ++j) CHECK(std::abs(d.values[j] - two_mode_phase_oracle(rho.matrix(), 3, d.phis[j])) < 1e-6);
    CHECK(std::abs(d.integral() - 1.0) < 1e-10);

    Matrix a = Matrix::Zero(4, 4);
    Matrix b = Matrix::Zero(4, 4);
    for (int n = 0; n < 4; ++n) {
        a(n, n) = 0.1 * (n + 1);
        b(n, n) = 0.25;
    }
    const auto flat = phase_diff_dist_boson(DensityOperator(tensor(Operator(a), Operator(b))));
    for (double v : flat.values) CHECK(std::abs(v - 1.0 / kTwoPi) < 1e-15);

    // Product of coherent states: peak at phi_A - phi_B.
    const Ket ka = coherent_ket(std::polar(1.5, -1.0), 14).ket;
    const Ket kb = coherent_ket(std::polar(1.5, -0.2), 14).ket;
    const auto pk = phase_diff_dist_boson(DensityOperator::pure(tensor(ka, kb)), PhaseGrid(200));
    CHECK(std::abs(pk.peak_phase() - 0.8) < 0.8 * PhaseGrid(200).spacing() + 1e-12);
}

TEST_CASE("two-mode phase difference of coupled oscillators") {
    lindblad::SteadyStateOptions o;
    o.method = lindblad::SteadyStateMethod::Integration;
    const double k2 = 1.0;
    const double delta = 0.5;
    std::vector<double> peaks;
    PhaseSeries strongest;
    for (double V : {0.0, 1.0, 5.0}) {
        const auto ss = lindblad::steady_state(
            lindblad::Liouvillian(lindblad::build_two_qvdp_model(delta, V * k2, 3.0 * k2, k2, k2, 7)), o);
        const auto d = phase_diff_dist_boson(ss.rho, PhaseGrid(128));
        CHECK(std::abs(d.integral() - 1.0) < 1e-9);
        peaks.push_back(d.max() - 1.0 / kTwoPi);
        strongest = d;
    }
    CHECK(peaks[0] < 1e-9);
    CHECK(peaks[1] > 1e-3);
    CHECK(peaks[2] > peaks[1]);

    const double lo = *std::min_element(strongest.values.begin(), strongest.values.end());
    const double half = 0.5 * (strongest.max() + lo);
    std::size_t above = 0;
    for (double v : strongest.values) above += v >= half ? 1 : 0;
    const double half_width = 0.5 * static_cast<double>(above) * PhaseGrid(128).spacing();
    CHECK(angular_distance(strongest.peak_phase(), std::asin(delta / 5.0)) < half_width);
}

TEST_CASE("spin Husimi Q and phase distribution") {
    const auto thetas = linspace(0.0, kPi, 9);
    const auto phis = PhaseGrid(8).phis();
    const auto mixed = husimi_q_spin(DensityOperator::maximally_mixed(2), thetas, phis);
    CHECK(mixed.kind == SurfaceKind::Sphere);
    for (double v : mixed.values) CHECK(std::abs(v - 1.0 / (4.0 * kPi)) < 1e-15);

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto rho = qsync::testing::random_density(2, rng);
        const auto d = phase_dist_spin(rho, PhaseGrid(16));
        for (std::size_t j = 0; j < d.size(); ++j) CHECK(std::abs(d.values[j] - spin_phase_oracle(rho.matrix(), d.phis[j])) < 1e-8);
        CHECK(std::abs(d.integral() - 1.0) < 1e-12);
        const auto fine = husimi_q_spin(rho, linspace(0.0, kPi, 201), PhaseGrid(64).phis());
        CHECK(fine.min() >= -1e-12);
        CHECK(std::abs(fine.integral() - 1.0) < 0.02);
    }

    const auto ss = lindblad::steady_state(lindblad::Liouvillian(lindblad::build_spin_model(2.0, 0.5, 1.0)));
    for (double v : phase_dist_spin(ss.rho).values) CHECK(std::abs(v - 1.0 / kTwoPi) < 1e-12);

    const auto pointed = phase_dist_spin(DensityOperator::pure(spin_coherent_ket(kPi / 2.0, kPi / 4.0)), PhaseGrid(8));
    CHECK(std::abs(pointed.peak_phase() - kPi / 4.0) < 1e-12);
}

TEST_CASE("two-spin phase difference") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 3; ++trial) {
        const auto rho = qsync::testing::random_density(4, rng);
        const auto d = phase_diff_dist_spins(rho, PhaseGrid(8));
        for (std::size_t j = 0; j < d.size(); ++j)
            CHECK(std::abs(d.values[j] - two_spin_phase_oracle(rho.matrix(), d.phis[j])) < 1e-6);
        CHECK(std::abs(d.integral() - 1.0) < 1e-12);
    }

    const auto flat = phase_diff_dist_spins(DensityOperator::maximally_mixed(4));
    for (double v : flat.values) CHECK(std::abs(v - 1.0 / kTwoPi) < 1e-15);

    // (|01> + |10>)/sqrt(2) has <s+_A s-_B> = 1/2.
    Vector bell = Vector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    const auto peaked = phase_diff_dist_spins(DensityOperator::pure(Ket(bell)));
    CHECK(std::abs(peaked.max() - 1.0 / kTwoPi - kPi / 32.0) < 1e-12);
    CHECK(peaked.peak_phase() == 0.0);

    for (int trial = 0; trial < 50; ++trial) {
        const auto d = phase_diff_dist_spins(qsync::testing::random_density(4, rng, 1));
        CHECK(d.max() <= 1.0 / kTwoPi + kPi / 32.0 + 1e-12);
    }
}
