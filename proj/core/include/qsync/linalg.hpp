#pragma once

// Dense complex operators and states on truncated bosonic and spin-1/2
// Hilbert spaces. Basis index n is the Fock occupation (0 = vacuum); for a
// spin, index 0 is |0> (ground) and index 1 is |1> (excited). Multi-mode
// spaces are ordered A (x) B, with B the fast index.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsync {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix m);

    static Operator zero(Eigen::Index dim);
    static Operator identity(Eigen::Index dim);

    [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
    [[nodiscard]] cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    [[nodiscard]] Operator adjoint() const { return Operator(m_.adjoint()); }
    [[nodiscard]] cplx trace() const { return m_.trace(); }
    /// max |A - A^dagger| over entries.
    [[nodiscard]] double hermiticity_error() const;
    [[nodiscard]] double max_abs() const;

    Operator& operator+=(const Operator& o);
    Operator& operator-=(const Operator& o);
    Operator& operator*=(cplx s);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Operator a, cplx s) { return a *= s; }
    friend Operator operator*(cplx s, Operator a) { return a *= s; }
    friend Operator operator*(Operator a, double s) { return a *= cplx{s, 0.0}; }
    friend Operator operator*(double s, Operator a) { return a *= cplx{s, 0.0}; }

private:
    Matrix m_;
};

[[nodiscard]] Operator commutator(const Operator& a, const Operator& b);

class Ket {
public:
    Ket() = default;
    explicit Ket(Vector amplitudes);

    static Ket basis(Eigen::Index dim, Eigen::Index index);

    [[nodiscard]] Eigen::Index dim() const noexcept { return v_.size(); }
    [[nodiscard]] const Vector& amplitudes() const noexcept { return v_; }
    [[nodiscard]] double norm() const { return v_.norm(); }
    /// |psi><psi|
    [[nodiscard]] Operator projector() const;
    /// <psi|A|psi>
    [[nodiscard]] cplx expect(const Operator& a) const;

private:
    Vector v_;
};

struct Tolerances {
    double trace = 1e-9;
    double hermiticity = 1e-9;
    /// Smallest eigenvalue allowed (numerical positivity slack).
    double min_eigenvalue = -1e-8;
};

class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A validated density operator: Hermitian, unit trace, positive semidefinite
/// within the stored tolerances. Construction throws InvariantViolation.
class DensityOperator {
public:
    DensityOperator() = default;
    explicit DensityOperator(Operator op, Tolerances tol = {});

    /// Wraps without the eigenvalue check (trace and Hermiticity still checked).
    static DensityOperator unchecked_positivity(Operator op, Tolerances tol = {});
    static DensityOperator maximally_mixed(Eigen::Index dim);
    static DensityOperator pure(const Ket& psi);

    [[nodiscard]] Eigen::Index dim() const noexcept { return op_.dim(); }
    [[nodiscard]] const Operator& op() const noexcept { return op_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return op_.matrix(); }
    [[nodiscard]] const Tolerances& tolerances() const noexcept { return tol_; }
    [[nodiscard]] cplx expect(const Operator& a) const;
    [[nodiscard]] double min_eigenvalue() const;

private:
    DensityOperator(Operator op, Tolerances tol, bool check_positivity);
    Operator op_;
    Tolerances tol_;
};

/// Smallest eigenvalue of the Hermitian part of m.
[[nodiscard]] double min_hermitian_eigenvalue(const Matrix& m);

/// (1/2) ||a - b||_1 for Hermitian a, b.
[[nodiscard]] double trace_distance(const Operator& a, const Operator& b);

struct FockOperators {
    Operator a;
    Operator a_dag;
    Operator n;
};

/// Ladder operators on levels 0..n_max (dimension n_max + 1).
[[nodiscard]] FockOperators fock_operators(int n_max);

struct PauliOperators {
    Operator sx, sy, sz, sp, sm;
};

[[nodiscard]] PauliOperators pauli_operators();

/// Kronecker product A (x) B.
[[nodiscard]] Operator tensor(const Operator& a, const Operator& b);
[[nodiscard]] Ket tensor(const Ket& a, const Ket& b);

struct CoherentKet {
    Ket ket;
    /// Weight of the untruncated coherent state beyond n_max.
    double truncated_weight = 0.0;
    bool truncation_warning = false;
};

inline constexpr double kCoherentTruncationThreshold = 1e-6;

/// |alpha> on levels 0..n_max, renormalized after truncation.
[[nodiscard]] CoherentKet coherent_ket(cplx alpha, int n_max);

/// Truncated, unnormalized coherent amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!).
[[nodiscard]] Vector coherent_amplitudes(cplx alpha, int n_max);

/// exp(-i phi sz/2) exp(-i theta sy/2) |1>.
[[nodiscard]] Ket spin_coherent_ket(double theta, double phi);

}  // namespace qsync
