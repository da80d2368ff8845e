#pragma once

#include <optional>
#include <vector>

#include "qclass/gaussian.hpp"
#include "qclass/numerics.hpp"

namespace qclass::qbm {

/// Measurement scheme for the monitored free particle: total efficiency eta,
/// noise-correlation parameter r in [-1, 1] (r = 0 heterodyne, r = 1
/// homodyne), and homodyne angle phi. Channel efficiencies are
/// eta_x = eta(1+r)/2 and eta_y = eta(1-r)/2.
struct QbmScheme {
    double eta = 1.0;
    double r = 1.0;
    double phi = 0.0;
};

struct ChannelEfficiencies {
    double eta_x;
    double eta_y;
};

/// Bath in rescaled units (damping rate, mass, k_B, hbar all unity). The
/// model is a high-temperature approximation; T = 1 is the lowest value used.
struct QbmBath {
    double temperature = 1e4;
};

/// Scale convention for the two-parameter initial-state family
/// (squeeze A, tilt C): alpha0 = 4T*A or alpha0 = sqrt(4T)*A, gamma0 = C,
/// beta0 = (1 + C^2)/alpha0 (pure by construction).
enum class SieveScale { FourT, SqrtFourT };

struct SieveCoords {
    double squeeze; // A > 0
    double tilt;    // C
    SieveScale scale = SieveScale::FourT;
};

/// High-temperature stationary coefficients: alpha_ss = A_ss sqrt(4T),
/// beta_ss = B_ss / sqrt(4T), gamma_ss = C_ss.
struct StationaryHighT {
    double a_ss;
    double b_ss;
    double c_ss;
};

struct Derivatives {
    double dalpha;
    double dbeta;
    double dgamma;
};

void validate(const QbmScheme& scheme);
void validate(const QbmBath& bath);

ChannelEfficiencies channel_efficiencies(const QbmScheme& scheme);

/// Time derivatives of (alpha, beta, gamma) under conditional evolution.
Derivatives drift(const GaussianShape& shape, const QbmScheme& scheme, const QbmBath& bath);

/// Unconditional stationary thermal state (0, 1/2T, 0).
GaussianShape thermal_state(const QbmBath& bath);

GaussianShape sieve_state(const SieveCoords& coords, const QbmBath& bath);

/// Closed-form high-T stationary solution at full efficiency. Singular when
/// 1 + r cos(2 phi) <= 0 (y-homodyne manifold); throws SingularSchemeError.
StationaryHighT stationary_high_T(double r, double phi);

/// d(P^2)/dt at t = 0 from the thermal state at full efficiency:
/// 1 + r cos(2 phi), independent of T.
double initial_purity_sq_gain_rate(const QbmScheme& scheme);

/// Initial unconditional purity loss rate from the conditional stationary
/// state, to leading order at high T: sqrt(T) * B_ss.
double initial_purity_loss_rate(double r, double phi, const QbmBath& bath);

/// Dense trajectory of covariance shapes. Integration runs in the scaled
/// variables (alpha/sqrt(4T), beta*sqrt(4T), gamma) against scaled time
/// tau = t*sqrt(4T); the interface is in unscaled units.
class QbmTrajectory {
public:
    QbmTrajectory(num::DenseTrajectory traj, double time_scale);

    double t_end() const noexcept;
    GaussianShape shape_at(double t) const;
    double purity_at(double t) const;

    /// Accepted integration step times in unscaled units.
    const std::vector<double>& step_times() const noexcept { return step_times_; }

    const num::DenseTrajectory& scaled() const noexcept { return traj_; }
    double time_scale() const noexcept { return time_scale_; }

private:
    num::DenseTrajectory traj_;
    double time_scale_; // sqrt(4T): tau = t * time_scale_
    std::vector<double> step_times_;
};

/// Integrates the covariance ODEs from shape0 to t_end (unscaled time).
/// Default tolerances: rtol 1e-9, atol 1e-12, initial step 1e-3 in scaled
/// time. Throws IntegrationError on step underflow.
QbmTrajectory evolve(const GaussianShape& shape0, const QbmScheme& scheme, const QbmBath& bath,
                     double t_end, std::optional<num::IntegratorConfig> cfg = std::nullopt);

struct StationaryOptions {
    double tau_max = 200.0;        // relaxation horizon in scaled time
    double tol_window = 1e-10;     // relative change per unit tau over a window
    double window = 5.0;           // comparison window in scaled time
    double tol_residual = 1e-12;   // scaled drift residual after Newton polish
};

/// Conditional stationary state: integrate from the thermal state until the
/// relative change per unit scaled time falls below tolerance, then polish
/// with a damped Newton iteration on the scaled drift. Throws
/// NoConvergenceError when the horizon is exhausted.
GaussianShape stationary_numeric(const QbmScheme& scheme, const QbmBath& bath,
                                 const StationaryOptions& opts = {});

/// Scaled drift residual (da/dtau, db/dtau, dc/dtau) at a shape; used for
/// fixed-point tests.
std::array<double, 3> scaled_drift(const GaussianShape& shape, const QbmScheme& scheme,
                                   const QbmBath& bath);

} // namespace qclass::qbm
