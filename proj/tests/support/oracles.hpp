#pragma once

// Quadrature reference values for the phase distributions, integrating the
// Husimi functions directly instead of using their closed forms.

#include "qsync/linalg.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace qsync::testing {

// Normalized (untruncated-series) coherent amplitudes <n|alpha>, n = 0..n_max.
inline Vector coherent_column(cplx alpha, Eigen::Index dim) {
    Vector c(dim);
    cplx term = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index n = 0; n < dim; ++n) {
        c(n) = term;
        term *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return c;
}

inline Vector spin_column(double theta, double phi) { return spin_coherent_ket(theta, phi).amplitudes(); }

// Q(phi) = int_0^inf r dr <r e^{-i phi}|rho|r e^{-i phi}> / pi.
inline double boson_phase_oracle(const Matrix& rho, double phi) {
    auto f = [&](double r) {
        const Vector c = coherent_column(std::polar(r, -phi), rho.rows());
        return r * (c.adjoint() * rho * c)(0, 0).real() / std::numbers::pi;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

inline double spin_phase_oracle(const Matrix& rho, double phi) {
    auto f = [&](double theta) {
        const Vector c = spin_column(theta, phi);
        return std::sin(theta) * (c.adjoint() * rho * c)(0, 0).real() / (2.0 * std::numbers::pi);
    };
    return boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, std::numbers::pi);
}

// Integrates both polar angles by Gauss-Legendre and the total phase by the
// periodic trapezoid rule, exact for the trigonometric degree involved.
inline double two_spin_phase_oracle(const Matrix& rho, double phi_ab) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    constexpr int n_total = 16;
    auto over_theta_b = [&](double theta_a, double phi_b_index) {
        const double phi_b = (2.0 * std::numbers::pi) * phi_b_index / n_total;
        const Vector a = spin_column(theta_a, phi_ab + phi_b);
        return GL::integrate(
            [&](double theta_b) {
                Vector ab(4);
                const Vector b = spin_column(theta_b, phi_b);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) ab(i * 2 + j) = a(i) * b(j);
                return std::sin(theta_b) * (ab.adjoint() * rho * ab)(0, 0).real();
            },
            0.0, std::numbers::pi);
    };
    double total = 0.0;
    for (int k = 0; k < n_total; ++k) {
        total += GL::integrate([&](double theta_a) { return std::sin(theta_a) * over_theta_b(theta_a, k); }, 0.0, std::numbers::pi);
    }
    return total * ((2.0 * std::numbers::pi) / n_total) / ((2.0 * std::numbers::pi) * (2.0 * std::numbers::pi));
}

// Joint radial and total-phase integration of the two-mode Husimi function.
inline double two_mode_phase_oracle(const Matrix& rho, Eigen::Index d, double phi_ab) {
    using GL = boost::math::quadrature::gauss<double, 30>;
    constexpr int n_total = 16;
    constexpr double r_max = 7.0;
    double total = 0.0;
    for (int k = 0; k < n_total; ++k) {
        const double phi_b = (2.0 * std::numbers::pi) * k / n_total;
        total += GL::integrate(
            [&](double ra) {
                const Vector a = coherent_column(std::polar(ra, -(phi_ab + phi_b)), d);
                return ra * GL::integrate(
                                [&](double rb) {
                                    const Vector b = coherent_column(std::polar(rb, -phi_b), d);
                                    Vector ab(d * d);
                                    for (Eigen::Index i = 0; i < d; ++i)
                                        for (Eigen::Index j = 0; j < d; ++j) ab(i * d + j) = a(i) * b(j);
                                    return rb * (ab.adjoint() * rho * ab)(0, 0).real();
                                },
                                0.0, r_max);
            },
            0.0, r_max);
    }
    return total * ((2.0 * std::numbers::pi) / n_total) / (std::numbers::pi * std::numbers::pi);
}

}  // namespace qsync::testing
