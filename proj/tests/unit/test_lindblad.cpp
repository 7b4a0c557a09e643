#include "doctest.h"
#include "test_util.hpp"

#include "qsync/lindblad.hpp"

#include <cmath>
#include <numbers>

using namespace qsync;
using namespace qsync::lindblad;
using qsync::testing::max_abs;

namespace {

Matrix vec(const Matrix& m) { return m.reshaped(m.size(), 1); }

Matrix swap_modes(const Matrix& rho, Eigen::Index d) {
    Matrix out(rho.rows(), rho.cols());
    for (Eigen::Index i = 0; i < d * d; ++i) {
        for (Eigen::Index j = 0; j < d * d; ++j) {
            const Eigen::Index is = (i % d) * d + i / d;
            const Eigen::Index js = (j % d) * d + j / d;
            out(is, js) = rho(i, j);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("model builders") {
    const auto m = build_qvdp_model(4.0, 4.0, 0.5, 1.0, 8);
    CHECK(m.dim() == 9);
    CHECK(m.jumps.size() == 3);
    const auto f = fock_operators(8);
    CHECK(max_abs(m.H.matrix() - 4.0 * f.n.matrix()) < 1e-15);
    CHECK(max_abs(m.jumps[0].op.matrix() - f.a_dag.matrix()) == 0.0);
    CHECK(max_abs(m.jumps[1].op.matrix() - (f.a * f.a).matrix()) < 1e-15);
    CHECK(m.jumps[1].rate == 0.5);
    CHECK(m.factor_is_boson == std::vector<bool>{true});

    const auto two = build_two_qvdp_model(0.5, 2.0, 3.0, 1.0, 1.0, 3);
    CHECK(two.dim() == 16);
    CHECK(two.factor_dims.size() == 2);
    const auto ops = two_mode_operators(3);
    CHECK(max_abs(two.H.matrix() - 0.25 * (ops.a_dag * ops.a - ops.b_dag * ops.b).matrix()) < 1e-15);
    CHECK(max_abs(two.jumps[0].op.matrix() - (ops.a - ops.b).matrix()) < 1e-15);
    CHECK(two.jumps[0].rate == 2.0);

    const auto s2 = build_two_spin_model(1.0, 2.0, 0.5, 0.25);
    CHECK(s2.dim() == 4);
    CHECK(s2.jumps.size() == 5);
    const auto sp = two_spin_operators();
    CHECK(max_abs(s2.jumps[0].op.matrix() - (sp.sm_a + sp.sm_b).matrix()) < 1e-15);
    CHECK(max_abs(s2.H.matrix() - 0.25 * (sp.sz_a - sp.sz_b).matrix()) < 1e-15);

    CHECK_THROWS_AS((void)build_qvdp_model(1.0, -1.0, 1.0, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)build_spin_model(1.0, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)build_qvdp_model(1.0, 1.0, 1.0, 1.0, 0), std::invalid_argument);
    LindbladModel bad = build_spin_model(1.0, 1.0, 1.0);
    bad.H = Operator(pauli_operators().sp.matrix());
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("Liouvillian preserves trace and Hermiticity for arbitrary Hermitian inputs") {
    std::mt19937_64 rng(17);
    const std::vector<LindbladModel> models = {
        build_qvdp_model(4.0, 4.0, 0.5, 1.0, 7),
        build_two_qvdp_model(0.5, 2.0, 3.0, 1.0, 1.0, 3),
        build_spin_model(2.0, 0.5, 1.0),
        build_two_spin_model(1.0, 2.0, 0.5, 0.25),
    };
    for (const auto& m : models) {
        const Liouvillian L(m);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix x = qsync::testing::random_hermitian(m.dim(), rng);
            const Matrix y = L.apply(x);
            CHECK(std::abs(y.trace()) <= 1e-10 * x.norm());
            CHECK(max_abs(y - y.adjoint()) <= 1e-10 * x.norm());
        }
    }
}

TEST_CASE("matrix-free action agrees with the explicit superoperator") {
    std::mt19937_64 rng(2);
    for (const auto& m : {build_qvdp_model(1.0, 2.0, 0.3, 0.5, 5), build_two_spin_model(0.7, 1.0, 0.2, 0.4)}) {
        const Liouvillian L(m);
        REQUIRE(L.has_dense_matrix());
        const Matrix S = L.superoperator();
        const Matrix x = qsync::testing::random_matrix(m.dim(), rng);
        CHECK(max_abs(S * vec(x) - vec(L.apply(x))) < 1e-11);
        // Column sums of the superoperator restricted to the identity vanish: Tr L(x) = 0.
        CHECK(max_abs(vec(Matrix::Identity(m.dim(), m.dim())).adjoint() * S) < 1e-12);
    }
    const Liouvillian big(build_qvdp_model(1.0, 1.0, 1.0, 1.0, 70));
    CHECK_FALSE(big.has_dense_matrix());
    CHECK_THROWS_AS((void)big.superoperator(), std::length_error);
}

TEST_CASE("single spin: exact steady state and coherence decay") {
    const double gp = 1.0;
    const double gm = 2.0;
    const double omega = 3.0;
    const Liouvillian L(build_spin_model(omega, gp, gm));
    const auto p = pauli_operators();
    const auto ss = steady_state(L);
    CHECK(ss.method == SteadyStateMethod::NullSpace);
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = gm / (gp + gm);
    expected(1, 1) = gp / (gp + gm);
    CHECK(max_abs(ss.rho.matrix() - expected) < 1e-12);
    CHECK(std::abs(ss.rho.expect(p.sz).real() + 1.0 / 3.0) < 1e-12);
    CHECK(ss.residual < 1e-9);
    CHECK_FALSE(ss.truncation_warning);

    MeOptions o;
    o.dt = 1e-3;
    o.t_final = 3.0;
    o.sample_every = 100;
    std::vector<double> times;
    const auto rho0 = DensityOperator::pure(spin_coherent_ket(std::numbers::pi / 2, 0.4));
    const cplx s0 = rho0.expect(p.sp);
    const auto ex = evolve_me_expectations(L, rho0, o, {p.sp, p.sx}, times);
    REQUIRE(ex.size() == 31);
    for (std::size_t j = 0; j < ex.size(); ++j) {
        const double t = times[j];
        const cplx analytic = s0 * std::exp((kI * omega - 0.5 * (gp + gm)) * t);
        CHECK(std::abs(ex[j][0] - analytic) < 1e-9);
        CHECK(std::abs(ex[j][1] - 2.0 * analytic.real()) < 1e-9);
    }
}

TEST_CASE("spin <sx> is a damped oscillation at omega and trace is conserved") {
    const double gm = 1.0;
    const double gp = 0.5 * gm;
    const double omega = 2.0 * gm;
    const Liouvillian L(build_spin_model(omega, gp, gm));
    MeOptions o;
    o.dt = 1e-3;
    o.t_final = 10.0;
    o.sample_every = 50;
    const auto samples = evolve_me(L, DensityOperator::pure(spin_coherent_ket(std::numbers::pi / 2, 0.0)), o);
    const auto p = pauli_operators();
    for (const auto& s : samples) {
        CHECK(std::abs(s.rho.op().trace() - cplx(1.0, 0.0)) < 1e-9);
        const double expected = std::exp(-0.5 * (gp + gm) * s.t) * std::cos(omega * s.t);
        CHECK(std::abs(s.rho.expect(p.sx).real() - expected) < 1e-9);
    }
}

TEST_CASE("qvdP: extreme quantum limit") {
    const Liouvillian L(build_qvdp_model(1.0, 1.0, 1e3, 0.0, 6));
    const auto ss = steady_state(L);
    Matrix target = Matrix::Zero(7, 7);
    target(0, 0) = 2.0 / 3.0;
    target(1, 1) = 1.0 / 3.0;
    CHECK(trace_distance(ss.rho.op(), Operator(target)) < 1e-3);
}

TEST_CASE("qvdP: phase-symmetric steady state, dual methods, truncation convergence") {
    const double kappa = 1.0;
    const Liouvillian L(build_qvdp_model(4.0 * kappa, 4.0 * kappa, 0.5 * kappa, kappa, 15));
    const auto f = fock_operators(15);

    SteadyStateOptions null_opts;
    null_opts.method = SteadyStateMethod::NullSpace;
    const auto a = steady_state(L, null_opts);
    CHECK(std::abs(a.rho.expect(f.a)) < 1e-10);
    CHECK(a.residual < 1e-9);
    CHECK(a.rho.min_eigenvalue() > -1e-12);

    SteadyStateOptions int_opts;
    int_opts.method = SteadyStateMethod::Integration;
    const auto b = steady_state(L, int_opts);
    CHECK(b.method == SteadyStateMethod::Integration);
    CHECK(b.elapsed_time > 0.0);
    CHECK(trace_distance(a.rho.op(), b.rho.op()) < 1e-8);

    // Doubling a truncation whose top-level population is below 1e-8.
    const auto coarse = steady_state(Liouvillian(build_qvdp_model(4.0 * kappa, 4.0 * kappa, 0.5 * kappa, kappa, 24)), int_opts);
    const auto fine = steady_state(Liouvillian(build_qvdp_model(4.0 * kappa, 4.0 * kappa, 0.5 * kappa, kappa, 48)), int_opts);
    CHECK(coarse.top_population < 1e-8);
    CHECK_FALSE(coarse.truncation_warning);
    const auto fc = fock_operators(24);
    const auto ff = fock_operators(48);
    CHECK(std::abs(fine.rho.expect(ff.n) - coarse.rho.expect(fc.n)) < 1e-6);
    CHECK(std::abs(fine.rho.expect(ff.n * ff.n) - coarse.rho.expect(fc.n * fc.n)) < 1e-6);
    CHECK(fine.top_population < coarse.top_population);
    CHECK(a.truncation_warning);
}

TEST_CASE("qvdP: short-time drift of <a> matches the mean-field right-hand side") {
    const double omega = 2.0;
    const double k1 = 1.0;
    const double k2 = 0.2;
    const double k = 0.3;
    const int n_max = 30;
    const cplx alpha{0.8, 0.3};
    const Liouvillian L(build_qvdp_model(omega, k1, k2, k, n_max));
    const auto rho0 = DensityOperator::pure(coherent_ket(alpha, n_max).ket);
    const auto f = fock_operators(n_max);

    const double h = 1e-4;
    MeOptions o;
    o.dt = h / 10.0;
    o.t_final = h;
    o.sample_every = 10;
    std::vector<double> times;
    const auto ex = evolve_me_expectations(L, rho0, o, {f.a}, times);
    REQUIRE(ex.size() == 2);
    const cplx derivative = (ex[1][0] - ex[0][0]) / h;
    const cplx mean_field =
        (-kI * omega + 0.5 * k1 - 0.5 * k) * alpha - k2 * std::norm(alpha) * alpha;
    CHECK(std::abs(derivative - mean_field) < 1e-3);
}

TEST_CASE("all rates zero: Hamiltonian evolution conserves <n>, steady state is degenerate") {
    const Liouvillian L(build_qvdp_model(1.5, 0.0, 0.0, 0.0, 12));
    const auto f = fock_operators(12);
    MeOptions o;
    o.dt = 1e-3;
    o.t_final = 2.0;
    o.sample_every = 200;
    std::vector<double> times;
    const auto rho0 = DensityOperator::pure(coherent_ket({1.0, 0.5}, 12).ket);
    const double n0 = rho0.expect(f.n).real();
    for (const auto& row : evolve_me_expectations(L, rho0, o, {f.n}, times)) CHECK(std::abs(row[0].real() - n0) < 1e-10);
    CHECK_THROWS_AS((void)steady_state(L), DegenerateSteadyState);
}

TEST_CASE("integration failures carry diagnostics") {
    const Liouvillian L(build_qvdp_model(4.0, 4.0, 0.5, 1.0, 10));
    MeOptions o;
    o.dt = 20.0 * L.stable_dt();
    o.t_final = 200.0 * L.stable_dt();
    const auto rho0 = DensityOperator::maximally_mixed(11);
    try {
        (void)evolve_me(L, rho0, o);
        FAIL("expected StepSizeError");
    } catch (const StepSizeError& e) {
        CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }

    SteadyStateOptions s;
    s.method = SteadyStateMethod::Integration;
    s.max_time = 0.5;
    CHECK_THROWS_AS((void)steady_state(L, s), ConvergenceError);
}

TEST_CASE("two qvdP: product steady state when uncoupled, swap symmetry at zero detuning") {
    const int n = 5;
    const double k2 = 1.0;
    const auto uncoupled = steady_state(Liouvillian(build_two_qvdp_model(0.5, 0.0, 3.0 * k2, k2, k2, n)));
    const auto single_a = steady_state(Liouvillian(build_qvdp_model(0.25, 3.0 * k2, k2, k2, n)));
    const auto single_b = steady_state(Liouvillian(build_qvdp_model(-0.25, 3.0 * k2, k2, k2, n)));
    CHECK(max_abs(uncoupled.rho.matrix() - tensor(single_a.rho.op(), single_b.rho.op()).matrix()) < 1e-8);

    const auto sym = steady_state(Liouvillian(build_two_qvdp_model(0.0, 1.0, 3.0 * k2, k2, k2, 4)));
    CHECK(max_abs(sym.rho.matrix() - swap_modes(sym.rho.matrix(), 5)) < 1e-10);
    const auto ops = two_mode_operators(4);
    CHECK(std::abs(sym.rho.expect(ops.a_dag * ops.b)) > 1e-3);
}

TEST_CASE("two spins: no cross coherence when uncoupled") {
    const auto sp = two_spin_operators();
    const auto ss = steady_state(Liouvillian(build_two_spin_model(1.0, 0.0, 0.5, 1.0)));
    CHECK(std::abs(ss.rho.expect(sp.sp_a * sp.sm_b)) < 1e-10);
    const auto coupled = steady_state(Liouvillian(build_two_spin_model(0.0, 1.0, 0.5, 1.0)));
    CHECK(std::abs(coupled.rho.expect(sp.sp_a * sp.sm_b)) > 1e-3);
}

TEST_CASE("correlation spectrum: zero lag, reality, sum rule, peak position") {
    const double omega = 4.0;
    const Liouvillian L(build_qvdp_model(omega, 4.0, 0.5, 1.0, 15));
    const auto ss = steady_state(L);
    const auto f = fock_operators(15);

    CorrelationOptions o;
    o.tau_max = 20.0;
    o.d_tau = 0.01;
    o.omegas = linspace(omega - 60.0, omega + 60.0, 4801);
    const auto r = correlation_spectrum(L, ss.rho, f.a_dag, f.a, o);
    CHECK(std::abs(r.g[0] - ss.rho.expect(f.n)) < 1e-10);
    CHECK(r.imag_residue < 1e-8);
    CHECK(r.g.size() == 2001);
    CHECK_FALSE(r.tail_flag);
    CHECK(std::abs(r.spectrum.peak_omega() - omega) <= 0.025 + 1e-12);

    double integral = 0.0;
    const double dw = o.omegas[1] - o.omegas[0];
    for (double v : r.spectrum.values) integral += v * dw;
    integral /= 2.0 * std::numbers::pi;
    CHECK(std::abs(integral - ss.rho.expect(f.n).real()) < 0.01 * ss.rho.expect(f.n).real());

    CorrelationOptions short_opts = o;
    short_opts.tau_max = 0.5;
    short_opts.omegas = {omega};
    const auto flagged = correlation_spectrum(L, ss.rho, f.a_dag, f.a, short_opts);
    CHECK(flagged.tail_flag);
    CHECK(flagged.window_rate > 0.0);
}

TEST_CASE("spin correlation spectrum peaks at the level splitting") {
    const double omega = 3.0;
    const Liouvillian L(build_spin_model(omega, 0.5, 1.0));
    const auto ss = steady_state(L);
    const auto p = pauli_operators();
    CorrelationOptions o;
    o.tau_max = 30.0;
    o.d_tau = 0.01;
    o.omegas = linspace(-10.0, 10.0, 401);
    const auto r = correlation_spectrum(L, ss.rho, p.sp, p.sm, o);
    CHECK(std::abs(r.spectrum.peak_omega() - omega) <= 0.05 + 1e-12);
    // Lorentzian of half width (g+ + g-)/2 and weight <s+ s->.
    const double gamma = 0.75;
    const double weight = ss.rho.expect(p.sp * p.sm).real();
    CHECK(std::abs(r.spectrum.values[r.spectrum.argmax()] - 2.0 * weight / gamma) < 0.02 * 2.0 * weight / gamma);
}
