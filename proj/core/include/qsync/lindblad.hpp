#pragma once

// Unconditional open-system dynamics
//   d rho/dt = -i[H, rho] + sum_k rate_k D[L_k] rho,
//   D[o] rho = o rho o^dag - (o^dag o rho + rho o^dag o) / 2,
// with fixed-step RK4 integration, steady states and two-time correlation
// spectra via the quantum regression theorem.

#include "qsync/linalg.hpp"
#include "qsync/series.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace qsync::lindblad {

struct Jump {
    Operator op;
    double rate = 0.0;
    std::string label;
};

/// Hamiltonian (rad/time) plus rate-weighted jump operators. `factor_dims`
/// lists the tensor factors of the Hilbert space and `factor_is_boson` marks
/// truncated Fock factors, which the steady-state truncation check inspects.
struct LindbladModel {
    Operator H;
    std::vector<Jump> jumps;
    std::vector<Eigen::Index> factor_dims;
    std::vector<bool> factor_is_boson;

    [[nodiscard]] Eigen::Index dim() const noexcept { return H.dim(); }
    /// Throws std::invalid_argument unless H is Hermitian within 1e-12,
    /// every rate is >= 0 and every operator matches the dimension.
    void validate() const;
};

/// H = omega a^dag a; jumps (a^dag, kappa1), (a^2, kappa2), (a, kappa).
[[nodiscard]] LindbladModel build_qvdp_model(double omega, double kappa1, double kappa2, double kappa, int n_max);

/// Two oscillators in the frame of their mean frequency:
/// H = (delta/2)(a^dag a - b^dag b); jumps (a - b, V) and, per mode,
/// (a^dag, kappa1), (a^2, kappa2), (a, kappa).
[[nodiscard]] LindbladModel build_two_qvdp_model(double delta, double V, double kappa1, double kappa2, double kappa,
                                                 int n_max);

/// H = (omega/2) sz; jumps (s+, gamma_plus), (s-, gamma_minus).
[[nodiscard]] LindbladModel build_spin_model(double omega, double gamma_plus, double gamma_minus);

/// H = (delta/4)(sz_A - sz_B); jumps (s-_A + s-_B, V), (s+_A, g+), (s+_B, g+),
/// (s-_A, g-), (s-_B, g-).
[[nodiscard]] LindbladModel build_two_spin_model(double delta, double V, double gamma_plus, double gamma_minus);

struct TwoModeOperators {
    Operator a, a_dag, b, b_dag;
};

/// a (x) 1 and 1 (x) b on two modes truncated at n_max each.
[[nodiscard]] TwoModeOperators two_mode_operators(int n_max);

struct TwoSpinOperators {
    Operator sm_a, sp_a, sz_a, sx_a;
    Operator sm_b, sp_b, sz_b, sx_b;
};

[[nodiscard]] TwoSpinOperators two_spin_operators();

struct LiouvillianOptions {
    /// Largest Hilbert dimension for which the explicit dim^2 x dim^2 matrix
    /// is available.
    Eigen::Index dense_matrix_max_dim = 64;
};

/// Right-hand side of the master equation,
///   L(rho) = G rho + rho G^dag + sum_k J_k rho J_k^dag,
/// with G = -i (H - (i/2) sum rate L^dag L) and J = sqrt(rate) L. The
/// operators are kept in compressed column form and every product is
/// evaluated as a right multiplication (left ones through transposes), so one
/// application costs O(nnz * dim) with contiguous column updates.
class Liouvillian {
public:
    using Sparse = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

    explicit Liouvillian(LindbladModel model, LiouvillianOptions opts = {});

    [[nodiscard]] const LindbladModel& model() const noexcept { return model_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return model_.dim(); }

    /// out = L(rho). out must not alias rho.
    void apply(const Matrix& rho, Matrix& out) const;
    [[nodiscard]] Matrix apply(const Matrix& rho) const;
    [[nodiscard]] Operator apply(const Operator& rho) const { return Operator(apply(rho.matrix())); }

    [[nodiscard]] bool has_dense_matrix() const noexcept { return dim() <= opts_.dense_matrix_max_dim; }
    /// Column-major vectorized superoperator; throws std::length_error above
    /// the configured dimension bound.
    [[nodiscard]] Matrix superoperator() const;

    /// Upper estimate of the magnitude of the Liouvillian spectrum.
    [[nodiscard]] double spectral_bound() const noexcept { return spectral_bound_; }
    /// RK4 step with |z| <= 2.5 for every Liouvillian eigenvalue z * dt,
    /// inside the stability region of the method.
    [[nodiscard]] double stable_dt() const noexcept { return 2.5 / spectral_bound_; }

    struct Workspace {
        Matrix k1, k2, k3, k4, tmp;
    };
    /// One classical fourth-order Runge-Kutta step of size dt, in place.
    void rk4_step(Matrix& rho, double dt, Workspace& ws) const;

private:
    LindbladModel model_;
    LiouvillianOptions opts_;
    Sparse g_;        // G
    Sparse g_t_;      // G^T
    Sparse g_adj_;    // G^dag
    std::vector<Sparse> jumps_;      // J
    std::vector<Sparse> jumps_t_;    // J^T
    std::vector<Sparse> jumps_adj_;  // J^dag
    double spectral_bound_ = 1.0;
};

class StepSizeError : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};

struct MeOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    /// Keep every k-th step (plus t = 0).
    std::size_t sample_every = 1;
    Tolerances tolerances{};
};

struct MeSample {
    double t = 0.0;
    DensityOperator rho;
};

/// Fixed-step RK4 integration from rho0. Each sample is validated as a
/// DensityOperator; a violation throws StepSizeError carrying dt and the
/// step's stability ratio.
[[nodiscard]] std::vector<MeSample> evolve_me(const Liouvillian& L, const DensityOperator& rho0, const MeOptions& opts);

/// Same integration, recording Tr[O rho] for each observable at each sample
/// instead of full states. Result is [sample][observable]; times go to `times`.
[[nodiscard]] std::vector<std::vector<cplx>> evolve_me_expectations(const Liouvillian& L, const DensityOperator& rho0,
                                                                    const MeOptions& opts,
                                                                    const std::vector<Operator>& observables,
                                                                    std::vector<double>& times);

enum class SteadyStateMethod { Auto, NullSpace, Integration };

struct SteadyStateOptions {
    SteadyStateMethod method = SteadyStateMethod::Auto;
    /// Convergence threshold on max |L(rho)| for the integration path.
    double tolerance = 1e-10;
    /// Integration path gives up after this much simulated time.
    double max_time = 1e4;
    /// Step for the integration path; 0 selects stable_dt().
    double dt = 0.0;
    /// Top-two-level population above which the truncation flag is raised.
    double truncation_threshold = 1e-8;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateSteadyState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SteadyState {
    DensityOperator rho;
    SteadyStateMethod method = SteadyStateMethod::NullSpace;
    double residual = 0.0;  ///< max |L(rho)|
    double top_population = 0.0;
    bool truncation_warning = false;
    double elapsed_time = 0.0;  ///< simulated time used by the integration path
};

/// Unique stationary state. Auto uses the null space of the explicit
/// superoperator when available, long-time integration from the maximally
/// mixed state otherwise. A null space of dimension > 1 throws
/// DegenerateSteadyState; non-convergence throws ConvergenceError.
[[nodiscard]] SteadyState steady_state(const Liouvillian& L, const SteadyStateOptions& opts = {});

/// Largest population in the top two Fock levels of any bosonic factor.
[[nodiscard]] double top_level_population(const LindbladModel& model, const Matrix& rho);

struct CorrelationOptions {
    double tau_max = 10.0;
    double d_tau = 0.01;
    std::vector<double> omegas;
};

struct CorrelationResult {
    SpectrumSeries spectrum;
    std::vector<cplx> g;  ///< g(k d_tau), k = 0..K
    double d_tau = 0.0;
    /// |g(tau_max)| / |g(0)| exceeded 0.05.
    bool tail_flag = false;
    /// Rate of the exponential taper applied when tail_flag is set (0 otherwise).
    double window_rate = 0.0;
    /// max |Im S| / max |S| before discarding the imaginary part.
    double imag_residue = 0.0;
};

/// g(tau) = Tr[A e^{L tau}(B rho_ss)] for tau in [0, tau_max], extended by
/// g(-tau) = g(tau)* (valid for A = B^dag), and
/// S(w) = sum_k d_tau g(tau_k) e^{-i w tau_k}.
[[nodiscard]] CorrelationResult correlation_spectrum(const Liouvillian& L, const DensityOperator& rho_ss,
                                                     const Operator& A, const Operator& B,
                                                     const CorrelationOptions& opts);

}  // namespace qsync::lindblad
