#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qclass/errors.hpp"
#include "qclass/outcome.hpp"

namespace qclass::num {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = std::numeric_limits<double>::infinity();
    double t_max = 50.0;
};

/// Dense solution of an ODE on [0, t_end()]: accepted Dormand-Prince 4(5)
/// steps plus the standard order-4 interpolant on each step.
class DenseTrajectory {
public:
    std::size_t dimension() const noexcept { return dim_; }
    double t_end() const noexcept { return step_times_.empty() ? 0.0 : step_times_.back(); }

    /// Accepted step endpoints, starting at t = 0.
    const std::vector<double>& step_times() const noexcept { return step_times_; }

    /// Interpolated state at t (clamped to [0, t_end]).
    void sample(double t, std::span<double> out) const;
    std::vector<double> sample(double t) const;

private:
    friend DenseTrajectory integrate(const Rhs&, std::span<const double>, const IntegratorConfig&);

    std::size_t dim_ = 0;
    std::vector<double> step_times_; // size n_steps + 1
    std::vector<double> y0_;         // initial state, for zero-length horizons
    // Interpolation coefficients per step, 5 blocks of dim_ values each.
    std::vector<double> rcont_;
};

/// Adaptive Dormand-Prince 4(5) integration from t = 0 to cfg.t_max with
/// dense output. Throws IntegrationError on step underflow, reporting the
/// time reached.
DenseTrajectory integrate(const Rhs& rhs, std::span<const double> y0, const IntegratorConfig& cfg);

/// Bisection for a sign-changing scalar map on [lo, hi]; returns the midpoint
/// of the final bracket of width <= tol. Throws NoSignChangeError.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

enum class CrossingDirection { Any, Upward, Downward };

/// Locates the first t in scan_times' span where value(t) crosses level in the
/// given direction, bracketing on consecutive scan points and bisecting the
/// bracket to time_tol. If the start already satisfies the crossing (at or
/// past the level in the crossing direction) returns Finite(0). Returns
/// NotReached(horizon) when no crossing occurs up to the last scan time.
CriterionOutcome first_crossing(const std::function<double(double)>& value,
                                std::span<const double> scan_times, double level,
                                CrossingDirection dir = CrossingDirection::Any,
                                double time_tol = 1e-8);

/// Convenience overload scanning n+1 uniform points on [t0, t1].
CriterionOutcome first_crossing(const std::function<double(double)>& value, double t0, double t1,
                                std::size_t n, double level,
                                CrossingDirection dir = CrossingDirection::Any,
                                double time_tol = 1e-8);

struct GridAxis {
    double lo;
    double hi;
    std::size_t count; // >= 2
};

struct GridSpec {
    std::vector<GridAxis> axes;
    int refine_levels = 0; // local re-grid passes, factor-5 zoom each
};

enum class OptSense { Minimize, Maximize };

struct GridOptResult {
    std::vector<double> argopt;                     // refined optimum location
    double value = 0.0;                             // refined optimum value
    std::vector<std::vector<double>> grid;          // per-axis coarse grid values
    std::vector<double> surface;                    // coarse values, lexicographic order
    bool found = false;                             // false if every value was NaN
};

/// Coarse scan over the grid, then refine_levels passes of re-gridding around
/// the incumbent with a factor-5 zoom (clamped to the original bounds). NaN
/// values are kept in the surface but never become the incumbent. Ties are
/// broken toward lexicographically smallest coordinates; the incumbent never
/// gets worse across refinement levels.
GridOptResult grid_argopt(const std::function<double(std::span<const double>)>& f,
                          const GridSpec& spec, OptSense sense);

/// Grid values of one axis (count points from lo to hi inclusive).
std::vector<double> axis_points(const GridAxis& axis);

} // namespace qclass::num
