#include "qclass/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace qclass::num {

namespace {

// Dormand-Prince 4(5) coefficients (DOPRI5 tableau with FSAL).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace

void DenseTrajectory::sample(double t, std::span<double> out) const {
    if (rcont_.empty()) {
        std::copy(y0_.begin(), y0_.end(), out.begin());
        return;
    }
    const std::size_t n_steps = step_times_.size() - 1;
    t = std::clamp(t, step_times_.front(), step_times_.back());
    auto it = std::upper_bound(step_times_.begin(), step_times_.end(), t);
    std::size_t idx = static_cast<std::size_t>(std::distance(step_times_.begin(), it));
    idx = (idx == 0) ? 0 : idx - 1;
    if (idx >= n_steps) idx = n_steps - 1;

    const double h = step_times_[idx + 1] - step_times_[idx];
    const double theta = (t - step_times_[idx]) / h;
    const double theta1 = 1.0 - theta;
    const double* rc = rcont_.data() + idx * 5 * dim_;
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = rc[i] +
                 theta * (rc[dim_ + i] +
                          theta1 * (rc[2 * dim_ + i] +
                                    theta * (rc[3 * dim_ + i] + theta1 * rc[4 * dim_ + i])));
    }
}

std::vector<double> DenseTrajectory::sample(double t) const {
    std::vector<double> out(dim_);
    sample(t, out);
    return out;
}

DenseTrajectory integrate(const Rhs& rhs, std::span<const double> y0, const IntegratorConfig& cfg) {
    const std::size_t n = y0.size();
    DenseTrajectory traj;
    traj.dim_ = n;
    traj.step_times_.push_back(0.0);
    traj.y0_.assign(y0.begin(), y0.end());

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    double t = 0.0;
    double h = std::clamp(cfg.h_init, cfg.h_min, cfg.h_max);
    rhs(t, y, k1);

    const double t_edge = 4.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, std::abs(cfg.t_max));
    bool last_rejected = false;
    while (t < cfg.t_max) {
        if (cfg.t_max - t <= t_edge) break;
        h = std::min(h, cfg.t_max - t);
        if (h < cfg.h_min && t + h < cfg.t_max) {
            throw IntegrationError("integrate: step size underflow", t);
        }

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / static_cast<double>(n));

        if (err <= 1.0) {
            // Accept: store dense-output coefficients for this step.
            const std::size_t base = traj.rcont_.size();
            traj.rcont_.resize(base + 5 * n);
            double* rc = traj.rcont_.data() + base;
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                rc[i] = y[i];
                rc[n + i] = ydiff;
                rc[2 * n + i] = bspl;
                rc[3 * n + i] = ydiff - h * k7[i] - bspl;
                rc[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                     d6 * k6[i] + d7 * k7[i]);
            }
            t += h;
            traj.step_times_.push_back(t);
            y.swap(ynew);
            k1.swap(k7); // FSAL

            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
            const double facmax = last_rejected ? 1.0 : 10.0;
            h = std::clamp(h * std::clamp(fac, 0.2, facmax), cfg.h_min, cfg.h_max);
            last_rejected = false;
        } else {
            h = std::clamp(h * std::max(0.2, 0.9 * std::pow(err, -0.2)), cfg.h_min, cfg.h_max);
            if (h <= cfg.h_min) {
                throw IntegrationError("integrate: step size underflow", t);
            }
            last_rejected = true;
        }
    }
    return traj;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NoSignChangeError("bisect: f(lo) and f(hi) have the same sign");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

bool crossed(double before, double after, double level, CrossingDirection dir) {
    switch (dir) {
    case CrossingDirection::Upward: return before < level && after >= level;
    case CrossingDirection::Downward: return before > level && after <= level;
    case CrossingDirection::Any:
        return (before < level && after >= level) || (before > level && after <= level);
    }
    return false;
}

bool already_past(double v0, double level, CrossingDirection dir) {
    switch (dir) {
    case CrossingDirection::Upward: return v0 >= level;
    case CrossingDirection::Downward: return v0 <= level;
    case CrossingDirection::Any: return v0 == level;
    }
    return false;
}

} // namespace

CriterionOutcome first_crossing(const std::function<double(double)>& value,
                                std::span<const double> scan_times, double level,
                                CrossingDirection dir, double time_tol) {
    if (scan_times.empty()) return CriterionOutcome::not_reached(0.0);
    double prev_t = scan_times.front();
    double prev_v = value(prev_t);
    if (already_past(prev_v, level, dir)) return CriterionOutcome::finite(0.0);

    for (std::size_t i = 1; i < scan_times.size(); ++i) {
        const double cur_t = scan_times[i];
        const double cur_v = value(cur_t);
        if (crossed(prev_v, cur_v, level, dir)) {
            double lo = prev_t, hi = cur_t;
            while (hi - lo > time_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                if (crossed(prev_v, value(mid), level, dir)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return CriterionOutcome::finite(0.5 * (lo + hi));
        }
        prev_t = cur_t;
        prev_v = cur_v;
    }
    return CriterionOutcome::not_reached(scan_times.back());
}

CriterionOutcome first_crossing(const std::function<double(double)>& value, double t0, double t1,
                                std::size_t n, double level, CrossingDirection dir,
                                double time_tol) {
    std::vector<double> ts(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
    }
    return first_crossing(value, ts, level, dir, time_tol);
}

std::vector<double> axis_points(const GridAxis& axis) {
    std::vector<double> pts(axis.count);
    for (std::size_t i = 0; i < axis.count; ++i) {
        pts[i] = axis.lo + (axis.hi - axis.lo) * static_cast<double>(i) /
                               static_cast<double>(axis.count - 1);
    }
    return pts;
}

namespace {

struct Incumbent {
    std::vector<double> at;
    double value = 0.0;
    bool found = false;
};

bool better(double candidate, double incumbent, OptSense sense) {
    return sense == OptSense::Maximize ? candidate > incumbent : candidate < incumbent;
}

// Lexicographic scan of one grid level; strict improvement keeps the first
// (lex-smallest) point among ties.
void scan_level(const std::function<double(std::span<const double>)>& f,
                const std::vector<std::vector<double>>& grids, OptSense sense, Incumbent& inc,
                std::vector<double>* surface) {
    const std::size_t n_axes = grids.size();
    std::vector<std::size_t> idx(n_axes, 0);
    std::vector<double> point(n_axes);
    for (;;) {
        for (std::size_t a = 0; a < n_axes; ++a) point[a] = grids[a][idx[a]];
        const double v = f(point);
        if (surface) surface->push_back(v);
        if (!std::isnan(v) && (!inc.found || better(v, inc.value, sense))) {
            inc.found = true;
            inc.value = v;
            inc.at = point;
        }
        // advance odometer, last axis fastest
        std::size_t a = n_axes;
        while (a > 0) {
            --a;
            if (++idx[a] < grids[a].size()) break;
            idx[a] = 0;
            if (a == 0) return;
        }
    }
}

} // namespace

GridOptResult grid_argopt(const std::function<double(std::span<const double>)>& f,
                          const GridSpec& spec, OptSense sense) {
    GridOptResult res;
    res.grid.reserve(spec.axes.size());
    for (const auto& ax : spec.axes) res.grid.push_back(axis_points(ax));

    Incumbent inc;
    scan_level(f, res.grid, sense, inc, &res.surface);
    if (!inc.found) {
        res.found = false;
        return res;
    }

    for (int level = 0; level < spec.refine_levels; ++level) {
        std::vector<std::vector<double>> grids;
        grids.reserve(spec.axes.size());
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            const double full = spec.axes[a].hi - spec.axes[a].lo;
            const double span = full / std::pow(5.0, level + 1);
            double lo = std::max(spec.axes[a].lo, inc.at[a] - 0.5 * span);
            double hi = std::min(spec.axes[a].hi, lo + span);
            lo = std::max(spec.axes[a].lo, hi - span);
            grids.push_back(axis_points(GridAxis{lo, hi, spec.axes[a].count}));
        }
        scan_level(f, grids, sense, inc, nullptr);
    }

    res.argopt = inc.at;
    res.value = inc.value;
    res.found = true;
    return res;
}

} // namespace qclass::num
