#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "qclass/numerics.hpp"
#include "qclass/qbm.hpp"

using namespace qclass;
using namespace qclass::qbm;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTiltedPhi = 1.35 * kPi / 2.0;

// Stationary states at full-efficiency homodyne (r = 1), solved to residual
// ~1e-12 with an independent integrator (frozen reference values).
struct FrozenRow {
    double temperature, phi, alpha, beta, gamma;
};
constexpr FrozenRow kFrozenStationary[] = {
    {1.0, 0.0, 1.5381745, 0.8002425902, -0.4805338162},
    {1.0, kTiltedPhi, 1.0591657, 0.9561782447, -0.1129213894},
    {1e2, 0.0, 26.38553, 0.07079912164, -0.9317040034},
    {1e2, kTiltedPhi, 14.472192, 0.07415489201, -0.2705250755},
    {1e4, 0.0, 280.85327, 0.007071156201, -0.9929538441},
    {1e4, kTiltedPhi, 149.64516, 0.007209981683, -0.2809606171},
    {1e6, 0.0, 2826.4282, 0.0007071068696, -0.9992931431},
    {1e6, kTiltedPhi, 1501.5124, 0.0007189288871, -0.2819231658},
};

} // namespace

TEST_CASE("channel efficiencies") {
    const auto het = channel_efficiencies(QbmScheme{0.8, 0.0, 1.0});
    CHECK(het.eta_x == doctest::Approx(0.4));
    CHECK(het.eta_y == doctest::Approx(0.4));

    const auto hom = channel_efficiencies(QbmScheme{0.8, 1.0, 0.0});
    CHECK(hom.eta_x == doctest::Approx(0.8));
    CHECK(hom.eta_y == doctest::Approx(0.0));

    const auto anti = channel_efficiencies(QbmScheme{0.8, -1.0, 0.0});
    CHECK(anti.eta_x == doctest::Approx(0.0));
    CHECK(anti.eta_y == doctest::Approx(0.8));

    CHECK_THROWS_AS(channel_efficiencies(QbmScheme{1.2, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(channel_efficiencies(QbmScheme{0.5, 1.5, 0.0}), std::invalid_argument);
}

TEST_CASE("thermal state") {
    const QbmBath bath{1e6};
    const auto th = thermal_state(bath);
    CHECK(th.alpha == 0.0);
    CHECK(th.beta == doctest::Approx(5e-7));
    CHECK(th.gamma == 0.0);
    CHECK(purity(th) == doctest::Approx(0.0));
}

TEST_CASE("drift fixed points and invariant subspace") {
    for (double temperature : {1.0, 1e2, 1e6}) {
        const QbmBath bath{temperature};
        // unmonitored thermal state is exactly stationary
        const auto d0 = drift(thermal_state(bath), QbmScheme{0.0, 1.0, 0.0}, bath);
        CHECK(std::abs(d0.dalpha) < 1e-12);
        CHECK(std::abs(d0.dbeta) < 1e-12);
        CHECK(std::abs(d0.dgamma) < 1e-12);

        // y-homodyne leaves alpha and gamma frozen at the thermal values
        for (double eta : {0.3, 1.0}) {
            const auto d = drift(thermal_state(bath), QbmScheme{eta, 1.0, kPi / 2.0}, bath);
            CHECK(std::abs(d.dalpha) < 1e-12);
            CHECK(std::abs(d.dgamma) < 1e-12);
            CHECK(d.dbeta > 0.0);
        }
        // ... and the whole {alpha = 0, gamma = 0} plane is invariant
        for (double beta : {0.1 / temperature, 1.0 / (2.0 * temperature), 3.0 / temperature}) {
            const auto d =
                drift(GaussianShape{0.0, beta, 0.0}, QbmScheme{0.7, 1.0, kPi / 2.0}, bath);
            CHECK(std::abs(d.dalpha) < 1e-12);
            CHECK(std::abs(d.dgamma) < 1e-12);
        }
    }
}

TEST_CASE("scaled drift residual at the closed-form stationary point") {
    const QbmBath bath{1e6};
    const double s = std::sqrt(4.0 * bath.temperature);
    for (double phi : {0.0, kTiltedPhi}) {
        const auto ss = stationary_high_T(1.0, phi);
        const GaussianShape shape{ss.a_ss * s, ss.b_ss / s, ss.c_ss};
        const auto res = scaled_drift(shape, QbmScheme{1.0, 1.0, phi}, bath);
        for (double component : res) {
            CHECK(std::abs(component) < 2e-3);     // frozen magnitude ~1.4e-3
            CHECK(std::abs(component) < 1e-3 * s); // stated residual bound
        }
    }
}

TEST_CASE("sieve states") {
    const QbmBath bath{1e4};
    const auto eigen = sieve_state(SieveCoords{1.0, 0.0, SieveScale::FourT}, bath);
    CHECK(eigen.alpha == doctest::Approx(4e4));
    CHECK(eigen.beta == doctest::Approx(1.0 / 4e4));
    CHECK(eigen.gamma == 0.0);

    const double s = std::sqrt(4.0 * bath.temperature);
    const auto tilted = sieve_state(SieveCoords{1.75, 1.75, SieveScale::SqrtFourT}, bath);
    CHECK(tilted.alpha == doctest::Approx(1.75 * s));
    CHECK(tilted.beta * s == doctest::Approx(2.32).epsilon(0.002));
    CHECK(tilted.gamma == doctest::Approx(1.75));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> a_dist(0.1, 4.0);
    std::uniform_real_distribution<double> c_dist(-3.0, 3.0);
    for (int i = 0; i < 40; ++i) {
        const SieveCoords coords{a_dist(rng), c_dist(rng),
                                 i % 2 ? SieveScale::FourT : SieveScale::SqrtFourT};
        CHECK(purity(sieve_state(coords, bath)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sieve_state(SieveCoords{0.0, 0.0, SieveScale::FourT}, bath),
                    std::invalid_argument);
}

TEST_CASE("high-T closed form") {
    const auto xhom = stationary_high_T(1.0, 0.0);
    CHECK(xhom.a_ss == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(xhom.b_ss == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(xhom.c_ss == doctest::Approx(-1.0).epsilon(1e-14));

    for (double phi : {0.0, 0.4, 1.1, 2.8}) {
        const auto het = stationary_high_T(0.0, phi);
        CHECK(het.a_ss == doctest::Approx(1.0));
        CHECK(het.b_ss == doctest::Approx(2.0));
        CHECK(het.c_ss == doctest::Approx(-1.0));
    }

    const auto tilted = stationary_high_T(1.0, kTiltedPhi);
    CHECK(tilted.a_ss == doctest::Approx(0.751).epsilon(0.014));
    CHECK(tilted.b_ss == doctest::Approx(1.437).epsilon(0.007));
    CHECK(tilted.c_ss == doctest::Approx(-0.282).epsilon(0.036));

    // the closed-form stationary state is pure: A B - C^2 = 1
    for (double r : {0.2, 0.6, 1.0}) {
        for (double phi : {0.0, 0.5, 1.2, 2.0, 3.0}) {
            const auto ss = stationary_high_T(r, phi);
            CHECK(ss.a_ss * ss.b_ss - ss.c_ss * ss.c_ss == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(stationary_high_T(1.0, kPi / 2.0), SingularSchemeError);
}

TEST_CASE("evolve preserves unmonitored thermal state") {
    const QbmBath bath{1e4};
    const auto traj = evolve(thermal_state(bath), QbmScheme{0.0, 1.0, 0.0}, bath, 0.5);
    for (double t : {0.0, 0.1, 0.3, 0.5}) {
        const auto s = traj.shape_at(t);
        CHECK(std::abs(s.alpha) < 1e-8);
        CHECK(std::abs(s.beta - thermal_state(bath).beta) < 1e-8);
        CHECK(std::abs(s.gamma) < 1e-8);
    }
}

TEST_CASE("y-homodyne never purifies the thermal state") {
    const QbmBath bath{1e2};
    const auto traj = evolve(thermal_state(bath), QbmScheme{1.0, 1.0, kPi / 2.0}, bath, 20.0);
    for (double t = 0.0; t <= 20.0; t += 0.5) {
        CHECK(traj.purity_at(t) < 0.01);
    }
}

TEST_CASE("long-time evolution reaches the stationary row at T = 1e6") {
    const QbmBath bath{1e6};
    const QbmScheme scheme{1.0, 1.0, 0.0};
    const double t_long = 40.0 / std::sqrt(4.0 * bath.temperature);
    const auto end = evolve(thermal_state(bath), scheme, bath, t_long).shape_at(t_long);
    CHECK(end.alpha == doctest::Approx(2826.4282).epsilon(0.01));
    CHECK(end.beta == doctest::Approx(0.0007071068696).epsilon(0.01));
    CHECK(end.gamma == doctest::Approx(-0.9992931431).epsilon(0.01));
}

TEST_CASE("stationary_numeric matches the frozen reference rows") {
    for (const auto& row : kFrozenStationary) {
        const auto ss = stationary_numeric(QbmScheme{1.0, 1.0, row.phi}, QbmBath{row.temperature});
        CHECK(ss.alpha == doctest::Approx(row.alpha).epsilon(1e-3));
        CHECK(ss.beta == doctest::Approx(row.beta).epsilon(1e-3));
        CHECK(ss.gamma == doctest::Approx(row.gamma).epsilon(1e-3));
        // full-efficiency conditioning purifies completely
        CHECK(purity(ss) == doctest::Approx(1.0).epsilon(1e-9));
        // residual at the solution
        const auto res = scaled_drift(ss, QbmScheme{1.0, 1.0, row.phi}, QbmBath{row.temperature});
        CHECK(std::abs(res[0]) < 1e-11);
        CHECK(std::abs(res[1]) < 1e-11);
        CHECK(std::abs(res[2]) < 1e-11);
    }
}

TEST_CASE("stationary_numeric agrees with the scaled closed form at T = 1e6") {
    const QbmBath bath{1e6};
    const double s = std::sqrt(4.0 * bath.temperature);
    // 5 x 8 scheme grid avoiding the singular y-homodyne manifold
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        for (double phi : {0.0, 0.35, 0.7, 1.05, 1.95, 2.3, 2.65, 3.0}) {
            const auto numeric = stationary_numeric(QbmScheme{1.0, r, phi}, bath);
            const auto closed = stationary_high_T(r, phi);
            CHECK(numeric.alpha == doctest::Approx(closed.a_ss * s).epsilon(0.01));
            CHECK(numeric.beta == doctest::Approx(closed.b_ss / s).epsilon(0.01));
            CHECK(numeric.gamma == doctest::Approx(closed.c_ss).epsilon(0.01));
        }
    }
}

TEST_CASE("stationary state at T = 1 matches the reference row within 2%") {
    const auto ss = stationary_numeric(QbmScheme{1.0, 1.0, 0.0}, QbmBath{1.0});
    CHECK(ss.alpha == doctest::Approx(1.53).epsilon(0.02));
    CHECK(ss.beta == doctest::Approx(0.8002).epsilon(0.02));
    CHECK(ss.gamma == doctest::Approx(-0.480).epsilon(0.02));
}

TEST_CASE("low-precision reference cells are truncations of the solution") {
    // The T = 1e2 tilted reference row carries alpha at two significant
    // figures; the solver value truncates to it but sits 3.4% above.
    const auto ss = stationary_numeric(QbmScheme{1.0, 1.0, kTiltedPhi}, QbmBath{1e2});
    CHECK(std::floor(ss.alpha) == doctest::Approx(14.0));
    CHECK(ss.beta == doctest::Approx(0.0741).epsilon(0.02));
    CHECK(ss.gamma == doctest::Approx(-0.270).epsilon(0.02));
}

TEST_CASE("stationary_numeric degenerate and unmonitored schemes") {
    const QbmBath bath{1e4};
    // Fully-efficient y-homodyne has no stationary point: inside the
    // invariant plane the momentum coefficient obeys d beta/dt = 1/(4T)
    // exactly and grows without bound.
    const auto d = drift(GaussianShape{0.0, 3.0 / bath.temperature, 0.0},
                         QbmScheme{1.0, 1.0, kPi / 2.0}, bath);
    CHECK(d.dbeta == doctest::Approx(1.0 / (4.0 * bath.temperature)).epsilon(1e-12));
    CHECK_THROWS_AS(stationary_numeric(QbmScheme{1.0, 1.0, kPi / 2.0}, bath),
                    NoConvergenceError);

    // at partial efficiency the plane holds a degenerate fixed point:
    // beta_ss = (1 + 1/sqrt(1 - eta))/(4T) from the reduced quadratic
    const double eta = 0.5;
    const auto deg = stationary_numeric(QbmScheme{eta, 1.0, kPi / 2.0}, bath);
    CHECK(std::abs(deg.alpha) < 1e-9);
    CHECK(std::abs(deg.gamma) < 1e-9);
    CHECK(purity(deg) == doctest::Approx(0.0));
    const double beta_expected =
        (1.0 + 1.0 / std::sqrt(1.0 - eta)) / (4.0 * bath.temperature);
    CHECK(deg.beta == doctest::Approx(beta_expected).epsilon(1e-8));

    // eta = 0: the thermal state itself
    const auto th = stationary_numeric(QbmScheme{0.0, 1.0, 0.0}, bath);
    CHECK(th.alpha == doctest::Approx(0.0));
    CHECK(th.beta == doctest::Approx(thermal_state(bath).beta));
}

TEST_CASE("initial purity-squared gain rate") {
    CHECK(initial_purity_sq_gain_rate(QbmScheme{1.0, 0.0, 0.9}) == doctest::Approx(1.0));
    CHECK(initial_purity_sq_gain_rate(QbmScheme{1.0, 1.0, 0.0}) == doctest::Approx(2.0));
    CHECK(initial_purity_sq_gain_rate(QbmScheme{1.0, 1.0, kPi / 2.0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(initial_purity_sq_gain_rate(QbmScheme{0.5, 1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("gain rate matches finite differences of evolve, independent of T") {
    const std::array<std::pair<double, double>, 6> pairs = {{{1.0, 0.0},
                                                             {1.0, kPi / 3.0},
                                                             {0.0, 0.7},
                                                             {0.5, 1.0},
                                                             {-1.0, kPi / 2.0},
                                                             {0.3, 2.0}}};
    for (double temperature : {1e2, 1e6}) {
        const QbmBath bath{temperature};
        const double s = std::sqrt(4.0 * temperature);
        for (const auto& [r, phi] : pairs) {
            const QbmScheme scheme{1.0, r, phi};
            const double h = 1e-6 / s; // small in scaled time
            const auto traj = evolve(thermal_state(bath), scheme, bath, h);
            const double p2 = std::pow(traj.purity_at(h), 2);
            const double expected = initial_purity_sq_gain_rate(scheme);
            if (expected > 1e-9) {
                CHECK(p2 / h == doctest::Approx(expected).epsilon(1e-3));
            } else {
                CHECK(p2 / h < 1e-6);
            }
        }
    }
}

TEST_CASE("initial purity loss rate") {
    const QbmBath hot{1e6};
    CHECK(initial_purity_loss_rate(1.0, 0.0, hot) ==
          doctest::Approx(1000.0 * std::sqrt(2.0)).epsilon(1e-12));

    // ratio between the tilted optimum and x-homodyne is T-independent
    for (double temperature : {1e2, 1e4, 1e6}) {
        const QbmBath bath{temperature};
        const double ratio = initial_purity_loss_rate(1.0, 5.0 * kPi / 6.0, bath) /
                             initial_purity_loss_rate(1.0, 0.0, bath);
        CHECK(ratio == doctest::Approx(0.877).epsilon(1e-3));
    }

    // the loss rate is minimized at phi = 5 pi/6 over the homodyne family
    num::GridSpec spec;
    spec.axes = {num::GridAxis{kPi / 2.0 + 0.05, kPi, 200}};
    spec.refine_levels = 3;
    const auto res = num::grid_argopt(
        [&](std::span<const double> phi) {
            return initial_purity_loss_rate(1.0, phi[0], hot);
        },
        spec, num::OptSense::Minimize);
    CHECK(res.argopt[0] == doctest::Approx(5.0 * kPi / 6.0).epsilon(0.008));

    CHECK_THROWS_AS(initial_purity_loss_rate(1.0, kPi / 2.0, hot), SingularSchemeError);
}

TEST_CASE("physicality is preserved along random trajectories") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> r_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> phi_dist(0.0, kPi);
    for (int i = 0; i < 60; ++i) {
        const double temperature = (i % 2 == 0) ? 1e2 : 1e4;
        const QbmBath bath{temperature};
        const QbmScheme scheme{uni(rng), r_dist(rng), phi_dist(rng)};
        const GaussianShape start =
            (i % 3 == 0) ? thermal_state(bath)
                         : sieve_state(SieveCoords{0.2 + 3.0 * uni(rng), 2.0 * r_dist(rng),
                                                   SieveScale::SqrtFourT},
                                       bath);
        const double t_end = 10.0 / std::sqrt(4.0 * temperature);
        const auto traj = evolve(start, scheme, bath, t_end);
        for (double t : traj.step_times()) {
            const double det = traj.shape_at(t).det();
            CHECK(det >= -1e-7);
            CHECK(det <= 1.0 + 1e-7);
        }
    }
}

TEST_CASE("purity is invariant under phi -> phi + pi") {
    const QbmBath bath{1e4};
    for (double phi : {0.2, 1.0, 2.0}) {
        const auto a = evolve(thermal_state(bath), QbmScheme{1.0, 0.8, phi}, bath, 0.02);
        const auto b = evolve(thermal_state(bath), QbmScheme{1.0, 0.8, phi + kPi}, bath, 0.02);
        for (double t : {0.002, 0.01, 0.02}) {
            CHECK(a.purity_at(t) == doctest::Approx(b.purity_at(t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("scaled integration equals direct integration of the raw equations") {
    const QbmBath bath{1e2};
    const QbmScheme scheme{1.0, 1.0, 0.7};
    const double t_end = 0.15;

    // reference: integrate the unscaled covariance equations directly
    num::IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    cfg.t_max = t_end;
    cfg.h_init = 1e-4;
    const auto th = thermal_state(bath);
    const double y0[] = {th.alpha, th.beta, th.gamma};
    auto raw = num::integrate(
        [&](double, std::span<const double> y, std::span<double> d) {
            const auto dv = drift(GaussianShape{y[0], y[1], y[2]}, scheme, bath);
            d[0] = dv.dalpha;
            d[1] = dv.dbeta;
            d[2] = dv.dgamma;
        },
        y0, cfg);

    const auto traj = evolve(th, scheme, bath, t_end);
    for (double t : {0.03, 0.08, 0.15}) {
        const auto direct = raw.sample(t);
        const auto scaled = traj.shape_at(t);
        CHECK(scaled.alpha == doctest::Approx(direct[0]).epsilon(1e-6));
        CHECK(scaled.beta == doctest::Approx(direct[1]).epsilon(1e-6));
        CHECK(scaled.gamma == doctest::Approx(direct[2]).epsilon(1e-6));
    }
}
