#include "qsync/lindblad.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsync::lindblad {

namespace {

Liouvillian::Sparse to_sparse(const Matrix& m) {
    Liouvillian::Sparse s = m.sparseView(0.0, 0.0);
    s.makeCompressed();
    return s;
}

/// out += x * t
void right_multiply_add(const Matrix& x, const Liouvillian::Sparse& t, Matrix& out) {
    for (Eigen::Index j = 0; j < t.outerSize(); ++j) {
        for (Liouvillian::Sparse::InnerIterator it(t, j); it; ++it) out.col(j) += it.value() * x.col(it.row());
    }
}

/// Upper bound on the spectral norm: sqrt(||M||_1 ||M||_inf).
double norm2_bound(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
    const double ninf = m.cwiseAbs().rowwise().sum().maxCoeff();
    return std::sqrt(n1 * ninf);
}

void check_rate(double r, const char* name) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument(std::string("rate ") + name + " must be finite and >= 0");
    }
}

cplx trace_product(const Matrix& a_transposed, const Matrix& x) { return a_transposed.cwiseProduct(x).sum(); }

}  // namespace

void LindbladModel::validate() const {
    const Eigen::Index d = H.dim();
    if (d < 1) throw std::invalid_argument("LindbladModel: empty Hamiltonian");
    if (H.hermiticity_error() > 1e-12) throw std::invalid_argument("LindbladModel: H is not Hermitian");
    for (const auto& j : jumps) {
        if (j.op.dim() != d) throw std::invalid_argument("LindbladModel: jump '" + j.label + "' has wrong dimension");
        if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) {
            throw std::invalid_argument("LindbladModel: jump '" + j.label + "' has negative or non-finite rate");
        }
    }
    if (factor_dims.size() != factor_is_boson.size()) {
        throw std::invalid_argument("LindbladModel: factor metadata size mismatch");
    }
    if (!factor_dims.empty()) {
        Eigen::Index prod = 1;
        for (auto f : factor_dims) prod *= f;
        if (prod != d) throw std::invalid_argument("LindbladModel: factor dimensions do not multiply to dim");
    }
}

LindbladModel build_qvdp_model(double omega, double kappa1, double kappa2, double kappa, int n_max) {
    check_rate(kappa1, "kappa1");
    check_rate(kappa2, "kappa2");
    check_rate(kappa, "kappa");
    if (!std::isfinite(omega)) throw std::invalid_argument("build_qvdp_model: omega must be finite");
    const auto f = fock_operators(n_max);
    LindbladModel m;
    m.H = omega * f.n;
    m.jumps = {{f.a_dag, kappa1, "gain a^dag"}, {f.a * f.a, kappa2, "two-excitation loss a^2"}, {f.a, kappa, "loss a"}};
    m.factor_dims = {n_max + 1};
    m.factor_is_boson = {true};
    m.validate();
    return m;
}

TwoModeOperators two_mode_operators(int n_max) {
    const auto f = fock_operators(n_max);
    const Operator id = Operator::identity(n_max + 1);
    return {tensor(f.a, id), tensor(f.a_dag, id), tensor(id, f.a), tensor(id, f.a_dag)};
}

LindbladModel build_two_qvdp_model(double delta, double V, double kappa1, double kappa2, double kappa, int n_max) {
    check_rate(V, "V");
    check_rate(kappa1, "kappa1");
    check_rate(kappa2, "kappa2");
    check_rate(kappa, "kappa");
    if (!std::isfinite(delta)) throw std::invalid_argument("build_two_qvdp_model: delta must be finite");
    const auto ops = two_mode_operators(n_max);
    LindbladModel m;
    m.H = (0.5 * delta) * (ops.a_dag * ops.a - ops.b_dag * ops.b);
    m.jumps = {
        {ops.a - ops.b, V, "coupling a-b"},   {ops.a_dag, kappa1, "gain a^dag"},
        {ops.b_dag, kappa1, "gain b^dag"},    {ops.a * ops.a, kappa2, "two-excitation loss a^2"},
        {ops.b * ops.b, kappa2, "two-excitation loss b^2"}, {ops.a, kappa, "loss a"},
        {ops.b, kappa, "loss b"},
    };
    m.factor_dims = {n_max + 1, n_max + 1};
    m.factor_is_boson = {true, true};
    m.validate();
    return m;
}

LindbladModel build_spin_model(double omega, double gamma_plus, double gamma_minus) {
    check_rate(gamma_plus, "gamma_plus");
    check_rate(gamma_minus, "gamma_minus");
    if (!std::isfinite(omega)) throw std::invalid_argument("build_spin_model: omega must be finite");
    const auto p = pauli_operators();
    LindbladModel m;
    m.H = (0.5 * omega) * p.sz;
    m.jumps = {{p.sp, gamma_plus, "gain s+"}, {p.sm, gamma_minus, "loss s-"}};
    m.factor_dims = {2};
    m.factor_is_boson = {false};
    m.validate();
    return m;
}

TwoSpinOperators two_spin_operators() {
    const auto p = pauli_operators();
    const Operator id = Operator::identity(2);
    return {tensor(p.sm, id), tensor(p.sp, id), tensor(p.sz, id), tensor(p.sx, id),
            tensor(id, p.sm), tensor(id, p.sp), tensor(id, p.sz), tensor(id, p.sx)};
}

LindbladModel build_two_spin_model(double delta, double V, double gamma_plus, double gamma_minus) {
    check_rate(V, "V");
    check_rate(gamma_plus, "gamma_plus");
    check_rate(gamma_minus, "gamma_minus");
    if (!std::isfinite(delta)) throw std::invalid_argument("build_two_spin_model: delta must be finite");
    const auto s = two_spin_operators();
    LindbladModel m;
    m.H = (0.25 * delta) * (s.sz_a - s.sz_b);
    m.jumps = {
        {s.sm_a + s.sm_b, V, "coupling s-_A + s-_B"}, {s.sp_a, gamma_plus, "gain s+_A"},
        {s.sp_b, gamma_plus, "gain s+_B"},            {s.sm_a, gamma_minus, "loss s-_A"},
        {s.sm_b, gamma_minus, "loss s-_B"},
    };
    m.factor_dims = {2, 2};
    m.factor_is_boson = {false, false};
    m.validate();
    return m;
}

Liouvillian::Liouvillian(LindbladModel model, LiouvillianOptions opts) : model_(std::move(model)), opts_(opts) {
    model_.validate();
    Matrix h_eff = model_.H.matrix();
    double jump_bound = 0.0;
    for (const auto& j : model_.jumps) {
        if (j.rate == 0.0) continue;
        const Matrix& L = j.op.matrix();
        h_eff -= (0.5 * j.rate) * kI * (L.adjoint() * L);
        const Matrix scaled = std::sqrt(j.rate) * L;
        jumps_.push_back(to_sparse(scaled));
        jumps_t_.push_back(to_sparse(scaled.transpose()));
        jumps_adj_.push_back(to_sparse(scaled.adjoint()));
        const double nb = norm2_bound(scaled);
        jump_bound += nb * nb;
    }
    const Matrix g = -kI * h_eff;
    g_ = to_sparse(g);
    g_t_ = to_sparse(g.transpose());
    g_adj_ = to_sparse(g.adjoint());
    spectral_bound_ = std::max(2.0 * norm2_bound(g) + jump_bound, 1e-12);
}

void Liouvillian::apply(const Matrix& rho, Matrix& out) const {
    // Left products accumulate transposed: (S X)^T = X^T S^T.
    thread_local Matrix rho_t, out_t, v, v_t;
    const Eigen::Index d = rho.rows();
    out.setZero(d, d);
    out_t.setZero(d, d);
    rho_t = rho.transpose();
    right_multiply_add(rho, g_adj_, out);
    right_multiply_add(rho_t, g_t_, out_t);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        v.setZero(d, d);
        right_multiply_add(rho, jumps_adj_[k], v);
        v_t = v.transpose();
        right_multiply_add(v_t, jumps_t_[k], out_t);
    }
    out += out_t.transpose();
}

Matrix Liouvillian::apply(const Matrix& rho) const {
    Matrix out(rho.rows(), rho.cols());
    apply(rho, out);
    return out;
}

Matrix Liouvillian::superoperator() const {
    if (!has_dense_matrix()) {
        throw std::length_error("Liouvillian::superoperator: dimension above the dense-matrix bound");
    }
    const Eigen::Index d = dim();
    const Operator id = Operator::identity(d);
    const Operator g{Matrix(g_)};
    Matrix s = tensor(id, g).matrix() + tensor(Operator(g.matrix().conjugate()), id).matrix();
    for (const auto& j : jumps_) {
        const Matrix jd(j);
        s += tensor(Operator(jd.conjugate()), Operator(jd)).matrix();
    }
    return s;
}

void Liouvillian::rk4_step(Matrix& rho, double dt, Workspace& ws) const {
    apply(rho, ws.k1);
    ws.tmp = rho + (0.5 * dt) * ws.k1;
    apply(ws.tmp, ws.k2);
    ws.tmp = rho + (0.5 * dt) * ws.k2;
    apply(ws.tmp, ws.k3);
    ws.tmp = rho + dt * ws.k3;
    apply(ws.tmp, ws.k4);
    rho += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

namespace {

void check_me_options(const MeOptions& opts) {
    if (!(opts.dt > 0.0) || !(opts.t_final > 0.0)) throw std::invalid_argument("evolve_me: dt and T must be > 0");
    if (opts.sample_every < 1) throw std::invalid_argument("evolve_me: sample_every must be >= 1");
}

DensityOperator validated(const Liouvillian& L, const Matrix& rho, const MeOptions& opts, double t) {
    try {
        return DensityOperator(Operator(rho), opts.tolerances);
    } catch (const InvariantViolation& e) {
        std::ostringstream msg;
        msg << "evolve_me: state invariant violated at t=" << t << " (" << e.what() << "); dt=" << opts.dt
            << ", dt*spectral_bound=" << opts.dt * L.spectral_bound() << ", suggested dt <= " << L.stable_dt();
        throw StepSizeError(msg.str());
    }
}

}  // namespace

std::vector<MeSample> evolve_me(const Liouvillian& L, const DensityOperator& rho0, const MeOptions& opts) {
    check_me_options(opts);
    if (rho0.dim() != L.dim()) throw std::invalid_argument("evolve_me: state dimension mismatch");
    const auto steps = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
    std::vector<MeSample> out;
    out.reserve(steps / opts.sample_every + 1);
    Matrix rho = rho0.matrix();
    Liouvillian::Workspace ws;
    out.push_back({0.0, rho0});
    for (std::size_t k = 1; k <= steps; ++k) {
        L.rk4_step(rho, opts.dt, ws);
        if (k % opts.sample_every == 0) {
            const double t = static_cast<double>(k) * opts.dt;
            out.push_back({t, validated(L, rho, opts, t)});
        }
    }
    return out;
}

std::vector<std::vector<cplx>> evolve_me_expectations(const Liouvillian& L, const DensityOperator& rho0,
                                                      const MeOptions& opts, const std::vector<Operator>& observables,
                                                      std::vector<double>& times) {
    check_me_options(opts);
    if (rho0.dim() != L.dim()) throw std::invalid_argument("evolve_me: state dimension mismatch");
    std::vector<Matrix> obs_t;
    for (const auto& o : observables) obs_t.push_back(o.matrix().transpose());
    const auto steps = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
    std::vector<std::vector<cplx>> out;
    times.clear();
    auto record = [&](const Matrix& rho, double t) {
        std::vector<cplx> row;
        row.reserve(obs_t.size());
        for (const auto& o : obs_t) row.push_back(trace_product(o, rho));
        out.push_back(std::move(row));
        times.push_back(t);
    };
    Matrix rho = rho0.matrix();
    Liouvillian::Workspace ws;
    record(rho, 0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        L.rk4_step(rho, opts.dt, ws);
        if (k % opts.sample_every == 0) {
            const double t = static_cast<double>(k) * opts.dt;
            (void)validated(L, rho, opts, t);
            record(rho, t);
        }
    }
    return out;
}

double top_level_population(const LindbladModel& model, const Matrix& rho) {
    const auto& dims = model.factor_dims;
    double worst = 0.0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
        if (!model.factor_is_boson[f]) continue;
        Eigen::Index stride = 1;
        for (std::size_t g = f + 1; g < dims.size(); ++g) stride *= dims[g];
        const Eigen::Index df = dims[f];
        double pop = 0.0;
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            const Eigen::Index digit = (i / stride) % df;
            if (digit >= df - 2) pop += rho(i, i).real();
        }
        worst = std::max(worst, pop);
    }
    return worst;
}

namespace {

Matrix hermitize_normalize(Matrix rho) {
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return rho;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

SteadyState finish(const Liouvillian& L, Matrix rho, SteadyStateMethod method, const SteadyStateOptions& opts,
                   double elapsed) {
    rho = hermitize_normalize(std::move(rho));
    SteadyState out;
    out.rho = DensityOperator(Operator(rho));
    out.method = method;
    out.residual = max_abs(L.apply(rho));
    out.top_population = top_level_population(L.model(), rho);
    out.truncation_warning = out.top_population > opts.truncation_threshold;
    out.elapsed_time = elapsed;
    return out;
}

SteadyState null_space_steady_state(const Liouvillian& L, const SteadyStateOptions& opts) {
    const Eigen::Index d = L.dim();
    const Matrix s = L.superoperator();
    Eigen::FullPivLU<Matrix> lu(s);
    lu.setThreshold(1e-11);
    const Eigen::Index kernel_dim = lu.dimensionOfKernel();
    if (kernel_dim != 1) {
        std::ostringstream msg;
        msg << "steady_state: null space of the Liouvillian has dimension " << kernel_dim << " (expected 1)";
        throw DegenerateSteadyState(msg.str());
    }
    Vector v = lu.kernel().col(0);
    // The rows of the superoperator are linearly dependent (trace preservation),
    // so one of them can be swapped for Tr rho = 1.
    Matrix constrained = s;
    const Eigen::Index row = 0;
    constrained.row(row).setZero();
    for (Eigen::Index i = 0; i < d; ++i) constrained(row, i * d + i) = 1.0;
    Vector rhs = Vector::Zero(d * d);
    rhs(row) = 1.0;
    Eigen::PartialPivLU<Matrix> plu(constrained);
    Vector refined = plu.solve(rhs);
    if (refined.allFinite()) v = refined;
    Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
    return finish(L, std::move(rho), SteadyStateMethod::NullSpace, opts, 0.0);
}

SteadyState integrated_steady_state(const Liouvillian& L, const SteadyStateOptions& opts) {
    const Eigen::Index d = L.dim();
    const double dt = opts.dt > 0.0 ? opts.dt : L.stable_dt();
    const auto check_every = static_cast<std::size_t>(std::max<long long>(1, std::llround(0.25 / dt)));
    Matrix rho = Matrix::Identity(d, d) / static_cast<double>(d);
    Matrix deriv(d, d);
    Liouvillian::Workspace ws;
    double t = 0.0;
    std::size_t step = 0;
    while (t < opts.max_time) {
        L.rk4_step(rho, dt, ws);
        t += dt;
        ++step;
        if (step % check_every == 0) {
            L.apply(rho, deriv);
            if (max_abs(deriv) < opts.tolerance) {
                return finish(L, std::move(rho), SteadyStateMethod::Integration, opts, t);
            }
        }
    }
    std::ostringstream msg;
    msg << "steady_state: integration did not reach max|L(rho)| < " << opts.tolerance << " within t=" << opts.max_time;
    throw ConvergenceError(msg.str());
}

}  // namespace

SteadyState steady_state(const Liouvillian& L, const SteadyStateOptions& opts) {
    switch (opts.method) {
        case SteadyStateMethod::NullSpace: return null_space_steady_state(L, opts);
        case SteadyStateMethod::Integration: return integrated_steady_state(L, opts);
        case SteadyStateMethod::Auto:
            return L.has_dense_matrix() ? null_space_steady_state(L, opts) : integrated_steady_state(L, opts);
    }
    throw std::logic_error("steady_state: unknown method");
}

CorrelationResult correlation_spectrum(const Liouvillian& L, const DensityOperator& rho_ss, const Operator& A,
                                       const Operator& B, const CorrelationOptions& opts) {
    if (!(opts.tau_max > 0.0) || !(opts.d_tau > 0.0)) {
        throw std::invalid_argument("correlation_spectrum: tau_max and d_tau must be > 0");
    }
    if (A.dim() != L.dim() || B.dim() != L.dim() || rho_ss.dim() != L.dim()) {
        throw std::invalid_argument("correlation_spectrum: dimension mismatch");
    }
    const auto lags = static_cast<std::size_t>(std::llround(opts.tau_max / opts.d_tau));
    const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(opts.d_tau / (L.stable_dt()))));
    const double h = opts.d_tau / static_cast<double>(sub);

    CorrelationResult res;
    res.d_tau = opts.d_tau;
    res.g.reserve(lags + 1);
    const Matrix at = A.matrix().transpose();
    Matrix x = B.matrix() * rho_ss.matrix();
    Liouvillian::Workspace ws;
    res.g.push_back(trace_product(at, x));
    for (std::size_t k = 1; k <= lags; ++k) {
        for (std::size_t s = 0; s < sub; ++s) L.rk4_step(x, h, ws);
        res.g.push_back(trace_product(at, x));
    }

    std::vector<cplx> g = res.g;
    const double g0 = std::abs(g.front());
    const double tail = std::abs(g.back());
    if (g0 > 0.0 && tail / g0 > 0.05) {
        res.tail_flag = true;
        res.window_rate = std::log(tail / (0.05 * g0)) / opts.tau_max;
        for (std::size_t k = 0; k < g.size(); ++k) g[k] *= std::exp(-res.window_rate * opts.d_tau * static_cast<double>(k));
    }

    res.spectrum.method = SpectrumMethod::FftOfCorrelation;
    res.spectrum.omegas = opts.omegas;
    res.spectrum.values.resize(opts.omegas.size());
    double peak = 0.0;
    for (std::size_t m = 0; m < opts.omegas.size(); ++m) {
        const cplx step = std::exp(-kI * opts.omegas[m] * opts.d_tau);
        cplx phase = step;
        cplx acc = 0.0;
        for (std::size_t k = 1; k < g.size(); ++k) {
            acc += g[k] * phase;
            phase *= step;
        }
        // g0 + sum_k (g_k e^{-iwt} + g_k^* e^{+iwt}); only Im g0 survives as imaginary part.
        res.spectrum.values[m] = opts.d_tau * (g[0].real() + 2.0 * acc.real());
        peak = std::max(peak, std::abs(res.spectrum.values[m]));
    }
    res.imag_residue = peak > 0.0 ? opts.d_tau * std::abs(g[0].imag()) / peak : 0.0;
    return res;
}

}  // namespace qsync::lindblad
