#pragma once

#include "qclass/gaussian.hpp"

namespace qclass::osc {

/// Continuous-monitoring scheme for the damped oscillator: efficiencies of
/// the two quadrature channels. eta_x + eta_y <= 1 (total efficiency).
struct OscScheme {
    double eta_x = 0.0;
    double eta_y = 0.0;

    double eta() const noexcept { return eta_x + eta_y; }
};

/// Bath descriptor; n is the Bose occupation at the oscillator frequency,
/// n = 0 is the zero-temperature bath.
struct OscBath {
    double n = 0.0;
};

/// Scheme from the one-parameter family s in [0, 1]:
///   eta_x = eta cos^2(s pi/2), eta_y = eta sin^2(s pi/2).
/// s = 0 is x-homodyne, s = 0.5 heterodyne. Throws std::invalid_argument for
/// out-of-range inputs.
OscScheme scheme_from_s(double eta, double s);

void validate(const OscScheme& scheme);

/// Closed-form conditional covariance flow from (alpha0, beta0), gamma = 0:
///   alpha(t) = (e^t [a0(1-ex) + ex] - (1-a0) ex) / (e^t [a0(1-ex) + ex] + (1-a0)(1-ex))
/// and the same for beta with (beta0, eta_y). Time in units of the
/// spontaneous-emission time. Degenerate alpha0 = 0 is handled by the
/// algebraic form directly.
GaussianShape conditional_shape(double alpha0, double beta0, const OscScheme& scheme, double t);

/// Finite-temperature flow: the zero-T closed form applies to the rescaled
/// variables (1+2n) alpha, (1+2n) beta. Stationary state is 1/(1+2n) in both.
/// Requires a physical initial state (alpha0 beta0 <= 1 within tolerance).
GaussianShape conditional_shape_finite_T(double alpha0, double beta0, const OscBath& bath,
                                         const OscScheme& scheme, double t);

/// Initial purity gain rate dP/dt at t = 0 from a degenerate thermal start:
/// sqrt(eta_x eta_y). Maximal for heterodyne splitting.
double initial_purity_gain_rate(const OscScheme& scheme);

/// Pure squeezed state (e^xi, e^-xi, 0) for the predictability-sieve family.
GaussianShape sieve_state_from_xi(double xi);

} // namespace qclass::osc
