#include "qsync/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace qsync {

Operator::Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
        throw std::invalid_argument("Operator: matrix must be square");
    }
}

Operator Operator::zero(Eigen::Index dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::identity(Eigen::Index dim) { return Operator(Matrix::Identity(dim, dim)); }

double Operator::hermiticity_error() const {
    if (m_.size() == 0) return 0.0;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double Operator::max_abs() const {
    if (m_.size() == 0) return 0.0;
    return m_.cwiseAbs().maxCoeff();
}

Operator& Operator::operator+=(const Operator& o) {
    m_ += o.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& o) {
    m_ -= o.m_;
    return *this;
}

Operator& Operator::operator*=(cplx s) {
    m_ *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b) { return Operator(a.m_ * b.m_); }

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Ket::Ket(Vector amplitudes) : v_(std::move(amplitudes)) {}

Ket Ket::basis(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim) throw std::out_of_range("Ket::basis: index outside dimension");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return Ket(std::move(v));
}

Operator Ket::projector() const { return Operator(v_ * v_.adjoint()); }

cplx Ket::expect(const Operator& a) const { return v_.dot(a.matrix() * v_); }

double min_hermitian_eigenvalue(const Matrix& m) {
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

DensityOperator::DensityOperator(Operator op, Tolerances tol) : DensityOperator(std::move(op), tol, true) {}

DensityOperator::DensityOperator(Operator op, Tolerances tol, bool check_positivity)
    : op_(std::move(op)), tol_(tol) {
    const double tr_err = std::abs(op_.trace() - 1.0);
    if (tr_err > tol_.trace) {
        std::ostringstream msg;
        msg << "DensityOperator: |Tr rho - 1| = " << tr_err << " exceeds " << tol_.trace;
        throw InvariantViolation(msg.str());
    }
    const double herm = op_.hermiticity_error();
    if (herm > tol_.hermiticity) {
        std::ostringstream msg;
        msg << "DensityOperator: hermiticity error " << herm << " exceeds " << tol_.hermiticity;
        throw InvariantViolation(msg.str());
    }
    if (check_positivity) {
        const double ev = min_hermitian_eigenvalue(op_.matrix());
        if (ev < tol_.min_eigenvalue) {
            std::ostringstream msg;
            msg << "DensityOperator: smallest eigenvalue " << ev << " below " << tol_.min_eigenvalue;
            throw InvariantViolation(msg.str());
        }
    }
}

DensityOperator DensityOperator::unchecked_positivity(Operator op, Tolerances tol) {
    return DensityOperator(std::move(op), tol, false);
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
    return DensityOperator(Operator(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

DensityOperator DensityOperator::pure(const Ket& psi) {
    const double nrm = psi.norm();
    if (nrm == 0.0) throw std::invalid_argument("DensityOperator::pure: zero ket");
    const Vector v = psi.amplitudes() / nrm;
    return DensityOperator(Operator(v * v.adjoint()));
}

cplx DensityOperator::expect(const Operator& a) const {
    // Tr[A rho] without forming the product.
    return (a.matrix().transpose().cwiseProduct(op_.matrix())).sum();
}

double DensityOperator::min_eigenvalue() const { return min_hermitian_eigenvalue(op_.matrix()); }

double trace_distance(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    const Matrix d = a.matrix() - b.matrix();
    const Matrix h = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

FockOperators fock_operators(int n_max) {
    if (n_max < 1) throw std::invalid_argument("fock_operators: n_max must be >= 1");
    const Eigen::Index dim = n_max + 1;
    Matrix a = Matrix::Zero(dim, dim);
    for (Eigen::Index n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    Matrix ad = a.adjoint();
    Matrix num = ad * a;
    return {Operator(std::move(a)), Operator(std::move(ad)), Operator(std::move(num))};
}

PauliOperators pauli_operators() {
    Matrix sp = Matrix::Zero(2, 2);
    sp(1, 0) = 1.0;  // |1><0|
    Matrix sm = sp.adjoint();
    Matrix sz = Matrix::Zero(2, 2);
    sz(1, 1) = 1.0;
    sz(0, 0) = -1.0;
    Matrix sx = sp + sm;
    Matrix sy = -kI * (sp - sm);
    return {Operator(sx), Operator(sy), Operator(sz), Operator(sp), Operator(sm)};
}

Operator tensor(const Operator& a, const Operator& b) {
    const Matrix& A = a.matrix();
    const Matrix& B = b.matrix();
    const Eigen::Index na = A.rows();
    const Eigen::Index nb = B.rows();
    Matrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) {
            out.block(i * nb, j * nb, nb, nb) = A(i, j) * B;
        }
    }
    return Operator(std::move(out));
}

Ket tensor(const Ket& a, const Ket& b) {
    const Vector& A = a.amplitudes();
    const Vector& B = b.amplitudes();
    Vector out(A.size() * B.size());
    for (Eigen::Index i = 0; i < A.size(); ++i) {
        out.segment(i * B.size(), B.size()) = A(i) * B;
    }
    return Ket(std::move(out));
}

Vector coherent_amplitudes(cplx alpha, int n_max) {
    if (n_max < 0) throw std::invalid_argument("coherent_amplitudes: n_max must be >= 0");
    Vector v(n_max + 1);
    const double r2 = std::norm(alpha);
    cplx term = std::exp(-0.5 * r2);
    v(0) = term;
    for (int n = 1; n <= n_max; ++n) {
        term *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = term;
    }
    return v;
}

CoherentKet coherent_ket(cplx alpha, int n_max) {
    if (n_max < 1) throw std::invalid_argument("coherent_ket: n_max must be >= 1");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw std::invalid_argument("coherent_ket: non-finite amplitude");
    }
    Vector v = coherent_amplitudes(alpha, n_max);
    // Poisson tail beyond n_max, summed term by term for accuracy at small weights.
    const double r2 = std::norm(alpha);
    double tail = 0.0;
    if (r2 > 0.0) {
        double log_p = -r2 + n_max * std::log(r2) - std::lgamma(n_max + 1.0);
        for (int n = n_max + 1; n < n_max + 2000; ++n) {
            log_p += std::log(r2) - std::log(static_cast<double>(n));
            const double p = std::exp(log_p);
            tail += p;
            if (n > r2 && p < 1e-18 * (tail + 1e-300)) break;
            if (n > r2 && p < 1e-300) break;
        }
    }
    const double nrm = v.norm();
    if (nrm == 0.0) throw std::invalid_argument("coherent_ket: amplitude far beyond truncation");
    v /= nrm;
    CoherentKet out;
    out.ket = Ket(std::move(v));
    out.truncated_weight = tail;
    out.truncation_warning = tail > kCoherentTruncationThreshold;
    return out;
}

Ket spin_coherent_ket(double theta, double phi) {
    if (theta < 0.0 || theta > M_PI) throw std::invalid_argument("spin_coherent_ket: theta outside [0, pi]");
    Vector v(2);
    v(0) = std::sin(0.5 * theta) * std::exp(kI * (0.5 * phi));
    v(1) = std::cos(0.5 * theta) * std::exp(-kI * (0.5 * phi));
    return Ket(std::move(v));
}

}  // namespace qsync
