#pragma once

// Husimi-Q distributions and phase / phase-difference distributions for
// truncated bosonic modes and spins-1/2. Phases follow phi = -arg(alpha);
// spin azimuths follow the spin_coherent_ket parameterization.

#include "qsync/linalg.hpp"

#include <cstddef>
#include <vector>

namespace qsync::phase {

/// Uniform grid phi_j = 2*pi*j/n on [0, 2*pi).
struct PhaseGrid {
    std::size_t n_phi = 64;

    explicit PhaseGrid(std::size_t n = 64);
    [[nodiscard]] std::vector<double> phis() const;
    [[nodiscard]] double spacing() const;
};

/// Phase distribution sampled on a PhaseGrid.
struct PhaseSeries {
    std::vector<double> phis;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::size_t argmax() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double peak_phase() const { return phis.at(argmax()); }
    /// Rectangle rule over the periodic grid; exact for trigonometric
    /// polynomials of degree below n_phi.
    [[nodiscard]] double integral() const;
};

enum class SurfaceKind { Plane, Sphere };

/// Q sampled on a product grid. Plane: axis1 = x, axis2 = p with
/// alpha = x + i p. Sphere: axis1 = theta, axis2 = phi. Values are row-major
/// with axis1 the slow index.
struct QSurface {
    SurfaceKind kind = SurfaceKind::Plane;
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<double> values;
    /// Plane only: some grid point has |alpha| > 0.8 sqrt(n_max).
    bool beyond_truncation = false;

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * axis2.size() + j]; }
    /// Riemann sum with the plane measure dx dp, or sin(theta) dtheta dphi.
    [[nodiscard]] double integral() const;
    [[nodiscard]] double min() const;
};

/// Largest |alpha| for which truncated coherent states are trusted.
[[nodiscard]] double truncation_radius(int n_max);

/// <alpha|rho|alpha>/pi with truncated coherent kets, alpha = x + i p.
[[nodiscard]] QSurface husimi_q_boson(const DensityOperator& rho, const std::vector<double>& xs,
                                      const std::vector<double>& ps);

/// Fourier coefficients c_k (k = -n_max..n_max, stored at k + n_max) of
/// Q(phi) = sum_k c_k e^{i k phi} for a single mode.
[[nodiscard]] std::vector<cplx> phase_coefficients_boson(const DensityOperator& rho);

/// Radially integrated Husimi-Q of one mode.
[[nodiscard]] PhaseSeries phase_dist_boson(const DensityOperator& rho, const PhaseGrid& grid = PhaseGrid{});

/// Q(phi_AB) of two modes of equal dimension, with the total phase
/// integrated out.
[[nodiscard]] PhaseSeries phase_diff_dist_boson(const DensityOperator& rho_two_mode,
                                                const PhaseGrid& grid = PhaseGrid{});

/// <theta,phi|rho|theta,phi>/(2 pi) for a single spin.
[[nodiscard]] QSurface husimi_q_spin(const DensityOperator& rho, const std::vector<double>& thetas,
                                     const std::vector<double>& phis);

/// 1/(2 pi) + (1/4) Re[<s+> e^{-i phi}].
[[nodiscard]] PhaseSeries phase_dist_spin(const DensityOperator& rho, const PhaseGrid& grid = PhaseGrid{});

/// 1/(2 pi) + (pi/16) Re[<s+_A s-_B> e^{-i phi_AB}].
[[nodiscard]] PhaseSeries phase_diff_dist_spins(const DensityOperator& rho_two_spin,
                                                const PhaseGrid& grid = PhaseGrid{});

}  // namespace qsync::phase
