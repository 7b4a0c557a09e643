#include "qsync/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsync::phase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Gamma((n+m)/2 + 1) / (2 pi sqrt(n! m!)), evaluated in log space.
double radial_weight(Eigen::Index n, Eigen::Index m) {
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    const double log_w = std::lgamma(0.5 * (dn + dm) + 1.0) - 0.5 * (std::lgamma(dn + 1.0) + std::lgamma(dm + 1.0));
    return std::exp(log_w) / kTwoPi;
}

Eigen::MatrixXd radial_weights(Eigen::Index d) {
    Eigen::MatrixXd w(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) w(n, m) = radial_weight(n, m);
    }
    return w;
}

/// Evaluates sum_k c_k e^{i k phi}, k = -K..K, keeping the real part.
PhaseSeries evaluate_fourier(const std::vector<cplx>& coeffs, const PhaseGrid& grid) {
    const auto K = static_cast<long>(coeffs.size() / 2);
    PhaseSeries out;
    out.phis = grid.phis();
    out.values.resize(out.phis.size());
    for (std::size_t j = 0; j < out.phis.size(); ++j) {
        cplx acc = 0.0;
        for (long k = -K; k <= K; ++k) {
            acc += coeffs[static_cast<std::size_t>(k + K)] * std::exp(kI * (static_cast<double>(k) * out.phis[j]));
        }
        out.values[j] = acc.real();
    }
    return out;
}

PhaseSeries first_harmonic(double mean, cplx c, double scale, const PhaseGrid& grid) {
    PhaseSeries out;
    out.phis = grid.phis();
    out.values.resize(out.phis.size());
    for (std::size_t j = 0; j < out.phis.size(); ++j) {
        out.values[j] = mean + scale * (c * std::exp(-kI * out.phis[j])).real();
    }
    return out;
}

}  // namespace

PhaseGrid::PhaseGrid(std::size_t n) : n_phi(n) {
    if (n < 8) throw std::invalid_argument("PhaseGrid: n_phi must be >= 8");
}

std::vector<double> PhaseGrid::phis() const {
    std::vector<double> p(n_phi);
    for (std::size_t j = 0; j < n_phi; ++j) p[j] = spacing() * static_cast<double>(j);
    return p;
}

double PhaseGrid::spacing() const { return kTwoPi / static_cast<double>(n_phi); }

std::size_t PhaseSeries::argmax() const {
    if (values.empty()) throw std::out_of_range("PhaseSeries::argmax: empty");
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double PhaseSeries::max() const { return values.at(argmax()); }

double PhaseSeries::integral() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s * kTwoPi / static_cast<double>(values.size());
}

double QSurface::integral() const {
    if (axis1.size() < 2 || axis2.size() < 2) return 0.0;
    const double d1 = (axis1.back() - axis1.front()) / static_cast<double>(axis1.size() - 1);
    const double d2 = (axis2.back() - axis2.front()) / static_cast<double>(axis2.size() - 1);
    double s = 0.0;
    for (std::size_t i = 0; i < axis1.size(); ++i) {
        const double w1 = kind == SurfaceKind::Sphere ? std::sin(axis1[i]) : 1.0;
        for (std::size_t j = 0; j < axis2.size(); ++j) s += w1 * at(i, j);
    }
    return s * d1 * d2;
}

double QSurface::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

double truncation_radius(int n_max) { return 0.8 * std::sqrt(static_cast<double>(n_max)); }

QSurface husimi_q_boson(const DensityOperator& rho, const std::vector<double>& xs, const std::vector<double>& ps) {
    const int n_max = static_cast<int>(rho.dim()) - 1;
    if (n_max < 1) throw std::invalid_argument("husimi_q_boson: need at least two Fock levels");
    QSurface q;
    q.kind = SurfaceKind::Plane;
    q.axis1 = xs;
    q.axis2 = ps;
    q.values.resize(xs.size() * ps.size());
    const double r_valid = truncation_radius(n_max);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            const cplx alpha{xs[i], ps[j]};
            if (std::abs(alpha) > r_valid) q.beyond_truncation = true;
            const Vector c = coherent_amplitudes(alpha, n_max);
            q.values[i * ps.size() + j] = c.dot(rho.matrix() * c).real() / std::numbers::pi;
        }
    }
    return q;
}

std::vector<cplx> phase_coefficients_boson(const DensityOperator& rho) {
    const Eigen::Index d = rho.dim();
    const Eigen::MatrixXd w = radial_weights(d);
    std::vector<cplx> c(static_cast<std::size_t>(2 * d - 1), cplx{0.0, 0.0});
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
            c[static_cast<std::size_t>(n - m + d - 1)] += rho.matrix()(n, m) * w(n, m);
        }
    }
    return c;
}

PhaseSeries phase_dist_boson(const DensityOperator& rho, const PhaseGrid& grid) {
    return evaluate_fourier(phase_coefficients_boson(rho), grid);
}

PhaseSeries phase_diff_dist_boson(const DensityOperator& rho_two_mode, const PhaseGrid& grid) {
    const Eigen::Index D = rho_two_mode.dim();
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(D))));
    if (d * d != D || d < 2) throw std::invalid_argument("phase_diff_dist_boson: dimension is not a square of a mode size");
    const Eigen::MatrixXd w = radial_weights(d);
    const Matrix& r = rho_two_mode.matrix();
    std::vector<cplx> c(static_cast<std::size_t>(2 * d - 1), cplx{0.0, 0.0});
    for (Eigen::Index na = 0; na < d; ++na) {
        for (Eigen::Index ma = 0; ma < d; ++ma) {
            const Eigen::Index k = na - ma;
            for (Eigen::Index nb = 0; nb < d; ++nb) {
                const Eigen::Index mb = nb + k;
                if (mb < 0 || mb >= d) continue;
                c[static_cast<std::size_t>(k + d - 1)] += r(na * d + nb, ma * d + mb) * w(na, ma) * w(nb, mb);
            }
        }
    }
    for (auto& v : c) v *= kTwoPi;
    return evaluate_fourier(c, grid);
}

QSurface husimi_q_spin(const DensityOperator& rho, const std::vector<double>& thetas, const std::vector<double>& phis) {
    if (rho.dim() != 2) throw std::invalid_argument("husimi_q_spin: expected a single spin");
    QSurface q;
    q.kind = SurfaceKind::Sphere;
    q.axis1 = thetas;
    q.axis2 = phis;
    q.values.resize(thetas.size() * phis.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        for (std::size_t j = 0; j < phis.size(); ++j) {
            const Vector psi = spin_coherent_ket(thetas[i], phis[j]).amplitudes();
            q.values[i * phis.size() + j] = psi.dot(rho.matrix() * psi).real() / kTwoPi;
        }
    }
    return q;
}

PhaseSeries phase_dist_spin(const DensityOperator& rho, const PhaseGrid& grid) {
    if (rho.dim() != 2) throw std::invalid_argument("phase_dist_spin: expected a single spin");
    const cplx sp = rho.expect(pauli_operators().sp);
    return first_harmonic(1.0 / kTwoPi, sp, 0.25, grid);
}

PhaseSeries phase_diff_dist_spins(const DensityOperator& rho_two_spin, const PhaseGrid& grid) {
    if (rho_two_spin.dim() != 4) throw std::invalid_argument("phase_diff_dist_spins: expected two spins");
    const auto p = pauli_operators();
    const cplx c = rho_two_spin.expect(tensor(p.sp, p.sm));
    return first_harmonic(1.0 / kTwoPi, c, std::numbers::pi / 16.0, grid);
}

}  // namespace qsync::phase
