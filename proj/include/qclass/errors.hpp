#pragma once

#include <stdexcept>
#include <string>

namespace qclass {

/// A state violates the Gaussian physicality invariants (negative discriminant).
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation requires det > 0 but the state is on the degenerate boundary.
class DegenerateStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Measurement scheme sits on the singular manifold of a closed form.
class SingularSchemeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integration failed (step underflow); carries the time reached.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t_reached)
        : std::runtime_error(what), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

/// Bisection bracket does not straddle a sign change.
class NoSignChangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver did not converge within its horizon.
class NoConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qclass
