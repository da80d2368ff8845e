#include "qclass/oscillator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qclass::osc {

namespace {

constexpr double kExpOverflowGuard = 700.0; // e^t saturates the Moebius flow long before this

// One component of the conditional flow. Valid for any a0 >= 0 (the
// denominator equals 1 at t = 0 and grows monotonically).
double flow_component(double a0, double ex, double t) {
    const double k = a0 * (1.0 - ex) + ex;
    if (t > kExpOverflowGuard) {
        return k > 0.0 ? 1.0 : 0.0;
    }
    const double et = std::exp(t);
    return (et * k - (1.0 - a0) * ex) / (et * k + (1.0 - a0) * (1.0 - ex));
}

} // namespace

void validate(const OscScheme& scheme) {
    if (scheme.eta_x < 0.0 || scheme.eta_y < 0.0 || scheme.eta_x > 1.0 || scheme.eta_y > 1.0 ||
        scheme.eta_x + scheme.eta_y > 1.0 + 1e-12) {
        throw std::invalid_argument("OscScheme: require eta_x, eta_y >= 0 and eta_x + eta_y <= 1");
    }
}

OscScheme scheme_from_s(double eta, double s) {
    if (eta < 0.0 || eta > 1.0 || s < 0.0 || s > 1.0) {
        throw std::invalid_argument("scheme_from_s: require eta in [0,1] and s in [0,1]");
    }
    const double cs = std::cos(s * std::numbers::pi / 2.0);
    const double sn = std::sin(s * std::numbers::pi / 2.0);
    return OscScheme{eta * cs * cs, eta * sn * sn};
}

GaussianShape conditional_shape(double alpha0, double beta0, const OscScheme& scheme, double t) {
    validate(scheme);
    if (alpha0 < 0.0 || beta0 < 0.0 || t < 0.0) {
        throw std::invalid_argument("conditional_shape: require alpha0, beta0, t >= 0");
    }
    return GaussianShape{flow_component(alpha0, scheme.eta_x, t),
                         flow_component(beta0, scheme.eta_y, t), 0.0};
}

GaussianShape conditional_shape_finite_T(double alpha0, double beta0, const OscBath& bath,
                                         const OscScheme& scheme, double t) {
    if (bath.n < 0.0) {
        throw std::invalid_argument("OscBath: require n >= 0");
    }
    if (alpha0 < 0.0 || beta0 < 0.0 || alpha0 * beta0 > 1.0 + kPhysTol) {
        throw InvalidStateError("conditional_shape_finite_T: initial state unphysical, "
                                "alpha0*beta0 = " +
                                std::to_string(alpha0 * beta0));
    }
    const double scale = 1.0 + 2.0 * bath.n;
    const GaussianShape rescaled =
        conditional_shape(scale * alpha0, scale * beta0, scheme, t);
    return GaussianShape{rescaled.alpha / scale, rescaled.beta / scale, 0.0};
}

double initial_purity_gain_rate(const OscScheme& scheme) {
    validate(scheme);
    return std::sqrt(scheme.eta_x * scheme.eta_y);
}

GaussianShape sieve_state_from_xi(double xi) {
    return GaussianShape{std::exp(xi), std::exp(-xi), 0.0};
}

} // namespace qclass::osc
