#pragma once

#include <cmath>

#include "qclass/errors.hpp"

namespace qclass {

/// Physicality tolerance for det comparisons. Closed-form flows are exact and
/// the ODE integration tolerance is tighter than this.
inline constexpr double kPhysTol = 1e-9;

/// Coefficients of the quadratic form of a zero-mean Gaussian Wigner function,
///   W(x, p) ~ exp(-alpha x^2 - beta p^2 - 2 gamma x p).
/// Units: hbar = 1; a coherent state is (1, 1, 0). The determinant
/// alpha*beta - gamma^2 equals the squared purity and is bounded by 1 for
/// physical states (Heisenberg), 0 on the degenerate boundary.
struct GaussianShape {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;

    double det() const noexcept { return alpha * beta - gamma * gamma; }
};

/// Second moments of the state: dispersions and the symmetrized covariance
/// C_xp = <xp + px>/2 - <x><p>.
struct Moments {
    double dx;
    double dp;
    double cxp;
};

enum class Physicality {
    ProperPure,  // |det - 1| <= tol
    ProperMixed, // 0 < det < 1
    Degenerate,  // det <= tol or alpha <= tol (improper thermal starts)
    Unphysical,  // det > 1 + tol, or negative alpha/beta
};

enum class OverlapKind {
    PurifiedModulus,  // |<psi_a|psi_b>| after det-normalizing both states
    MixedNormalized,  // Tr(rho_a rho_b) / sqrt(P_a P_b), no purification
};

/// Purity P = sqrt(alpha*beta - gamma^2). Throws InvalidStateError when the
/// discriminant is below -kPhysTol; clamps tiny negatives to zero.
double purity(const GaussianShape& shape);

/// Dispersions and covariance from inverting the 2x2 quadratic form:
///   dx = sqrt(beta/(2 det)), dp = sqrt(alpha/(2 det)), cxp = -gamma/(2 det).
/// Requires det > 0 strictly.
Moments moments(const GaussianShape& shape);

/// Rebuilds the quadratic form from second moments (inverse of moments()).
GaussianShape shape_from_moments(const Moments& m);

/// Scales the shape by 1/sqrt(det) so the result is pure (det = 1) with the
/// same dispersion ratios and tilt. Requires det > 0.
GaussianShape purify(const GaussianShape& shape);

/// Overlap of two Gaussian states. The default purifies both inputs and
/// returns the pure-state modulus |<psi_a|psi_b>| = (2/sqrt(det(Ma+Mb)))^(1/2);
/// MixedNormalized returns Tr(rho_a rho_b)/sqrt(P_a P_b) for comparison.
double overlap(const GaussianShape& a, const GaussianShape& b,
               OverlapKind kind = OverlapKind::PurifiedModulus);

Physicality classify(const GaussianShape& shape) noexcept;

const char* to_string(Physicality p) noexcept;

} // namespace qclass
