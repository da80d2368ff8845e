#include "qclass/qbm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qclass::qbm {

namespace {

// Scaled system: u = (a, b, c) = (alpha/s, beta*s, gamma), tau = t*s with
// s = sqrt(4T), eps = 1/s. Exact change of variables, keeps every term
// order-one at high temperature.
struct ScaledSystem {
    double ex, ey;   // channel efficiencies
    double sp, cp;   // sin phi, cos phi
    double eps;

    ScaledSystem(const QbmScheme& scheme, const QbmBath& bath) {
        const auto eff = channel_efficiencies(scheme);
        ex = eff.eta_x;
        ey = eff.eta_y;
        sp = std::sin(scheme.phi);
        cp = std::cos(scheme.phi);
        eps = 1.0 / std::sqrt(4.0 * bath.temperature);
    }

    std::array<double, 3> rhs(const std::array<double, 3>& u) const {
        const double a = u[0], b = u[1], c = u[2];
        const double A1 = c * sp - (1.0 - eps * a) * cp;
        const double A2 = c * cp + (1.0 - eps * a) * sp;
        const double B1 = b * sp + eps * (c * cp - sp);
        const double B2 = -b * cp + eps * (c * sp + cp);
        return {-eps * eps * a * a - c * c + ex * A1 * A1 + ey * A2 * A2,
                -b * b - eps * eps * c * c + 2.0 * eps * b - 2.0 * c + ex * B1 * B1 +
                    ey * B2 * B2,
                -eps * eps * a * c - b * c + eps * c - a + ex * A1 * B1 - ey * A2 * B2};
    }
};

std::array<double, 3> to_scaled(const GaussianShape& shape, double s) {
    return {shape.alpha / s, shape.beta * s, shape.gamma};
}

GaussianShape from_scaled(const std::array<double, 3>& u, double s) {
    return GaussianShape{u[0] * s, u[1] / s, u[2]};
}

// Solves the 3x3 system J x = g by Gaussian elimination with partial
// pivoting; returns false on a vanishing pivot.
bool solve3(std::array<std::array<double, 3>, 3> J, std::array<double, 3> g,
            std::array<double, 3>& x) {
    std::array<int, 3> perm = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row) {
            if (std::abs(J[perm[row]][col]) > std::abs(J[perm[piv]][col])) piv = row;
        }
        std::swap(perm[col], perm[piv]);
        const double p = J[perm[col]][col];
        if (std::abs(p) < 1e-300) return false;
        for (int row = col + 1; row < 3; ++row) {
            const double f = J[perm[row]][col] / p;
            for (int k = col; k < 3; ++k) J[perm[row]][k] -= f * J[perm[col]][k];
            g[perm[row]] -= f * g[perm[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double acc = g[perm[col]];
        for (int k = col + 1; k < 3; ++k) acc -= J[perm[col]][k] * x[k];
        x[col] = acc / J[perm[col]][col];
    }
    return true;
}

double inf_norm(const std::array<double, 3>& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

} // namespace

void validate(const QbmScheme& scheme) {
    if (scheme.eta < 0.0 || scheme.eta > 1.0 || scheme.r < -1.0 || scheme.r > 1.0) {
        throw std::invalid_argument("QbmScheme: require eta in [0,1] and r in [-1,1]");
    }
}

void validate(const QbmBath& bath) {
    if (!(bath.temperature > 0.0)) {
        throw std::invalid_argument("QbmBath: require T > 0");
    }
}

ChannelEfficiencies channel_efficiencies(const QbmScheme& scheme) {
    validate(scheme);
    return ChannelEfficiencies{scheme.eta * (1.0 + scheme.r) / 2.0,
                               scheme.eta * (1.0 - scheme.r) / 2.0};
}

Derivatives drift(const GaussianShape& shape, const QbmScheme& scheme, const QbmBath& bath) {
    validate(bath);
    const double s = std::sqrt(4.0 * bath.temperature);
    const ScaledSystem sys(scheme, bath);
    const auto du = sys.rhs(to_scaled(shape, s));
    // d alpha/dt = s^2 da/dtau, d beta/dt = db/dtau, d gamma/dt = s dc/dtau.
    return Derivatives{du[0] * s * s, du[1], du[2] * s};
}

std::array<double, 3> scaled_drift(const GaussianShape& shape, const QbmScheme& scheme,
                                   const QbmBath& bath) {
    validate(bath);
    const double s = std::sqrt(4.0 * bath.temperature);
    const ScaledSystem sys(scheme, bath);
    return sys.rhs(to_scaled(shape, s));
}

GaussianShape thermal_state(const QbmBath& bath) {
    validate(bath);
    return GaussianShape{0.0, 1.0 / (2.0 * bath.temperature), 0.0};
}

GaussianShape sieve_state(const SieveCoords& coords, const QbmBath& bath) {
    validate(bath);
    if (!(coords.squeeze > 0.0)) {
        throw std::invalid_argument("sieve_state: require A > 0");
    }
    const double scale = coords.scale == SieveScale::FourT
                             ? 4.0 * bath.temperature
                             : std::sqrt(4.0 * bath.temperature);
    const double alpha0 = scale * coords.squeeze;
    const double gamma0 = coords.tilt;
    return GaussianShape{alpha0, (1.0 + gamma0 * gamma0) / alpha0, gamma0};
}

StationaryHighT stationary_high_T(double r, double phi) {
    if (r < -1.0 || r > 1.0) {
        throw std::invalid_argument("stationary_high_T: require r in [-1,1]");
    }
    const double cos2phi = std::cos(2.0 * phi);
    const double sin2phi = std::sin(2.0 * phi);
    const double denom = 1.0 + r * cos2phi;
    if (denom <= 1e-12) {
        throw SingularSchemeError("stationary_high_T: singular at 1 + r cos(2 phi) <= 0");
    }
    const double c = -(r * sin2phi + std::sqrt(1.0 + 2.0 * r * cos2phi + r * r)) / denom;
    const double b = std::sqrt(-4.0 * c / denom);
    const double a = -(b * c / 2.0) * denom - (b / 2.0) * r * sin2phi;
    return StationaryHighT{a, b, c};
}

double initial_purity_sq_gain_rate(const QbmScheme& scheme) {
    validate(scheme);
    if (std::abs(scheme.eta - 1.0) > 1e-12) {
        throw std::invalid_argument("initial_purity_sq_gain_rate: defined at full efficiency");
    }
    return 1.0 + scheme.r * std::cos(2.0 * scheme.phi);
}

double initial_purity_loss_rate(double r, double phi, const QbmBath& bath) {
    validate(bath);
    return std::sqrt(bath.temperature) * stationary_high_T(r, phi).b_ss;
}

QbmTrajectory::QbmTrajectory(num::DenseTrajectory traj, double time_scale)
    : traj_(std::move(traj)), time_scale_(time_scale) {
    step_times_.reserve(traj_.step_times().size());
    for (double tau : traj_.step_times()) step_times_.push_back(tau / time_scale_);
}

double QbmTrajectory::t_end() const noexcept { return traj_.t_end() / time_scale_; }

GaussianShape QbmTrajectory::shape_at(double t) const {
    std::array<double, 3> u;
    traj_.sample(t * time_scale_, u);
    return from_scaled(u, time_scale_);
}

double QbmTrajectory::purity_at(double t) const {
    std::array<double, 3> u;
    traj_.sample(t * time_scale_, u);
    const double det = u[0] * u[1] - u[2] * u[2]; // scale-invariant
    return std::sqrt(std::max(det, 0.0));
}

QbmTrajectory evolve(const GaussianShape& shape0, const QbmScheme& scheme, const QbmBath& bath,
                     double t_end, std::optional<num::IntegratorConfig> cfg) {
    validate(scheme);
    validate(bath);
    if (t_end < 0.0) {
        throw std::invalid_argument("evolve: require t_end >= 0");
    }
    const double s = std::sqrt(4.0 * bath.temperature);
    const ScaledSystem sys(scheme, bath);

    num::IntegratorConfig config;
    if (cfg) {
        config = *cfg;
        config.t_max = t_end * s;
    } else {
        config.rtol = 1e-9;
        config.atol = 1e-12;
        config.h_init = 1e-3;
        config.t_max = t_end * s;
    }

    const auto u0 = to_scaled(shape0, s);
    auto rhs = [&sys](double, std::span<const double> y, std::span<double> dydt) {
        const auto du = sys.rhs({y[0], y[1], y[2]});
        dydt[0] = du[0];
        dydt[1] = du[1];
        dydt[2] = du[2];
    };
    num::DenseTrajectory traj = num::integrate(rhs, u0, config);
    return QbmTrajectory(std::move(traj), s);
}

GaussianShape stationary_numeric(const QbmScheme& scheme, const QbmBath& bath,
                                 const StationaryOptions& opts) {
    validate(scheme);
    validate(bath);
    const double s = std::sqrt(4.0 * bath.temperature);
    const ScaledSystem sys(scheme, bath);

    // Relaxation stage: integrate from the thermal state, watching the
    // relative change per unit scaled time over a trailing window.
    auto rhs = [&sys](double, std::span<const double> y, std::span<double> dydt) {
        const auto du = sys.rhs({y[0], y[1], y[2]});
        dydt[0] = du[0];
        dydt[1] = du[1];
        dydt[2] = du[2];
    };
    num::IntegratorConfig config;
    config.rtol = 1e-12;
    config.atol = 1e-14;
    config.h_init = 1e-3;

    std::array<double, 3> u = to_scaled(thermal_state(bath), s);
    bool settled = false;
    double tau_done = 0.0;
    while (tau_done < opts.tau_max && !settled) {
        config.t_max = std::min(opts.window, opts.tau_max - tau_done);
        const std::vector<double> start(u.begin(), u.end());
        num::DenseTrajectory seg = num::integrate(rhs, start, config);
        std::array<double, 3> u_next;
        seg.sample(seg.t_end(), u_next);
        double rel = 0.0;
        for (int i = 0; i < 3; ++i) {
            rel = std::max(rel, std::abs(u_next[i] - u[i]) /
                                    (config.t_max * (std::abs(u_next[i]) + 1e-12)));
        }
        u = u_next;
        tau_done += seg.t_end();
        settled = rel < opts.tol_window;
    }

    // Newton polish with finite-difference Jacobian, damped steps. The
    // relaxation stage only has to land inside the basin; slow modes (the
    // thermal-rate relaxation near the y-homodyne manifold) finish here.
    auto g = sys.rhs(u);
    for (int iter = 0; iter < 60 && inf_norm(g) > opts.tol_residual; ++iter) {
        std::array<std::array<double, 3>, 3> J;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6 * std::max(std::abs(u[j]), 1e-3);
            auto up = u, um = u;
            up[j] += h;
            um[j] -= h;
            const auto gp = sys.rhs(up);
            const auto gm = sys.rhs(um);
            for (int i = 0; i < 3; ++i) J[i][j] = (gp[i] - gm[i]) / (2.0 * h);
        }
        std::array<double, 3> step;
        if (!solve3(J, g, step)) break;
        double damping = 1.0;
        bool improved = false;
        for (int halvings = 0; halvings < 12; ++halvings) {
            std::array<double, 3> u_try = {u[0] - damping * step[0], u[1] - damping * step[1],
                                           u[2] - damping * step[2]};
            const auto g_try = sys.rhs(u_try);
            if (inf_norm(g_try) < inf_norm(g)) {
                u = u_try;
                g = g_try;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved) break;
    }
    // Reject non-convergence and unphysical Newton roots (the polynomial
    // system has spurious solutions off the physical manifold; the flow
    // itself never leaves it).
    const double det = u[0] * u[1] - u[2] * u[2];
    const bool physical =
        u[0] >= -1e-10 && u[1] >= -1e-10 && det >= -1e-10 && det <= 1.0 + 1e-9;
    if (inf_norm(g) > 1e-10 || !physical) {
        throw NoConvergenceError("stationary_numeric: no physical fixed point reached within "
                                 "the horizon (tau = " +
                                 std::to_string(opts.tau_max) +
                                 "), residual = " + std::to_string(inf_norm(g)));
    }
    return from_scaled(u, s);
}

} // namespace qclass::qbm
