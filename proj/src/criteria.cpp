#include "qclass/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

namespace qclass::criteria {

namespace {

constexpr double kOscHorizon = 50.0;   // spontaneous-emission times
constexpr double kQbmTauHorizon = 200.0; // scaled time

const osc::OscScheme& as_osc(const SchemeDescriptor& scheme) {
    if (const auto* s = std::get_if<osc::OscScheme>(&scheme)) return *s;
    throw std::invalid_argument("oscillator model requires an OscScheme descriptor");
}

const qbm::QbmScheme& as_qbm(const SchemeDescriptor& scheme) {
    if (const auto* s = std::get_if<qbm::QbmScheme>(&scheme)) return *s;
    throw std::invalid_argument("monitored-particle model requires a QbmScheme descriptor");
}

double occupation_of(const ModelKind& kind) {
    if (std::holds_alternative<OscillatorT0>(kind)) return 0.0;
    return std::get<OscillatorFiniteT>(kind).n;
}

void require_untilted(const GaussianShape& shape) {
    if (shape.gamma != 0.0) {
        throw std::invalid_argument("oscillator states carry no cross term (gamma must be 0)");
    }
}

std::vector<double> uniform_times(double t_end, std::size_t n) {
    std::vector<double> ts(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        ts[i] = t_end * static_cast<double>(i) / static_cast<double>(n);
    }
    return ts;
}

} // namespace

ModelHandle ModelHandle::oscillator_t0() { return ModelHandle(ModelKind(OscillatorT0{})); }

ModelHandle ModelHandle::oscillator_finite_t(double n) {
    if (n < 0.0) throw std::invalid_argument("oscillator_finite_t: require n >= 0");
    return ModelHandle(ModelKind(OscillatorFiniteT{n}));
}

ModelHandle ModelHandle::qbm_high_t(double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("qbm_high_t: require T > 0");
    return ModelHandle(ModelKind(QbmHighT{temperature}));
}

bool ModelHandle::is_qbm() const noexcept { return std::holds_alternative<QbmHighT>(kind_); }

double ModelHandle::horizon() const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        return kQbmTauHorizon / std::sqrt(4.0 * q->temperature);
    }
    return kOscHorizon;
}

GaussianShape ModelHandle::thermal_start() const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        return qbm::thermal_state(qbm::QbmBath{q->temperature});
    }
    // Degenerate high-temperature start; the finite-T flow rescales by 1+2n,
    // so divide to keep the scaled start at a fixed small value.
    const double n = occupation_of(kind_);
    return GaussianShape{1e-8 / (1.0 + 2.0 * n), 1e-8 / (1.0 + 2.0 * n), 0.0};
}

PurityCurve ModelHandle::purity_trajectory(const GaussianShape& start,
                                           const SchemeDescriptor& scheme, Flow flow) const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        qbm::QbmScheme sch = as_qbm(scheme);
        if (flow == Flow::Unconditional) sch.eta = 0.0;
        const qbm::QbmBath bath{q->temperature};
        auto traj = std::make_shared<qbm::QbmTrajectory>(
            qbm::evolve(start, sch, bath, horizon()));
        PurityCurve curve;
        curve.t_end = traj->t_end();
        curve.scan_times = traj->step_times();
        curve.value = [traj](double t) { return traj->purity_at(t); };
        return curve;
    }

    require_untilted(start);
    osc::OscScheme sch = as_osc(scheme);
    osc::validate(sch);
    if (flow == Flow::Unconditional) sch = osc::OscScheme{0.0, 0.0};
    const osc::OscBath bath{occupation_of(kind_)};
    const double a0 = start.alpha, b0 = start.beta;
    PurityCurve curve;
    curve.t_end = kOscHorizon;
    curve.scan_times = uniform_times(kOscHorizon, 4000);
    curve.value = [a0, b0, bath, sch](double t) {
        return purity(osc::conditional_shape_finite_T(a0, b0, bath, sch, t));
    };
    return curve;
}

double ModelHandle::unconditional_purity_at(const GaussianShape& start, double t) const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        const qbm::QbmBath bath{q->temperature};
        const qbm::QbmScheme off{0.0, 1.0, 0.0};
        return qbm::evolve(start, off, bath, t).purity_at(t);
    }
    require_untilted(start);
    const osc::OscBath bath{occupation_of(kind_)};
    return purity(osc::conditional_shape_finite_T(start.alpha, start.beta, bath,
                                                  osc::OscScheme{0.0, 0.0}, t));
}

GaussianShape ModelHandle::conditional_stationary(const SchemeDescriptor& scheme) const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        return qbm::stationary_numeric(as_qbm(scheme), qbm::QbmBath{q->temperature});
    }
    osc::validate(as_osc(scheme));
    const double inv = 1.0 / (1.0 + 2.0 * occupation_of(kind_));
    return GaussianShape{inv, inv, 0.0};
}

bool ModelHandle::is_unconditional_fixed_point(const GaussianShape& shape) const {
    if (const auto* q = std::get_if<QbmHighT>(&kind_)) {
        const auto res = qbm::scaled_drift(shape, qbm::QbmScheme{0.0, 1.0, 0.0},
                                           qbm::QbmBath{q->temperature});
        return std::max({std::abs(res[0]), std::abs(res[1]), std::abs(res[2])}) <= 1e-12;
    }
    const double scale = 1.0 + 2.0 * occupation_of(kind_);
    return shape.gamma == 0.0 && std::abs(scale * shape.alpha - 1.0) <= 1e-12 &&
           std::abs(scale * shape.beta - 1.0) <= 1e-12;
}

double ModelHandle::purity_asymptote() const {
    if (std::holds_alternative<QbmHighT>(kind_)) return 1.0;
    return 1.0 / (1.0 + 2.0 * occupation_of(kind_));
}

double default_purification_target(const ModelHandle& model, const GaussianShape& start) {
    return 0.5 * (purity(start) + model.purity_asymptote());
}

CriterionOutcome purification_time(const ModelHandle& model, const SchemeDescriptor& scheme,
                                   const GaussianShape& start, double target) {
    if (purity(start) >= target) {
        throw std::invalid_argument("purification_time: start purity already at or above target");
    }
    const PurityCurve curve = model.purity_trajectory(start, scheme, Flow::Conditional);
    return num::first_crossing(curve.value, curve.scan_times, target,
                               num::CrossingDirection::Upward);
}

CriterionOutcome efficiency_threshold_fixed_time(
    const ModelHandle& model, const std::function<SchemeDescriptor(double)>& scheme_of_eta,
    const GaussianShape& start, double p_thr, double t_thr) {
    auto purity_at_thr = [&](double eta) {
        const PurityCurve curve =
            model.purity_trajectory(start, scheme_of_eta(eta), Flow::Conditional);
        return curve.value(t_thr);
    };
    if (purity_at_thr(1.0) < p_thr) {
        return CriterionOutcome::not_attainable();
    }
    if (purity_at_thr(0.0) >= p_thr) {
        return CriterionOutcome::finite(0.0);
    }
    const double eta =
        num::bisect([&](double e) { return purity_at_thr(e) - p_thr; }, 0.0, 1.0, 1e-6);
    return CriterionOutcome::finite(eta);
}

CriterionOutcome efficiency_threshold_asymptotic(const ModelHandle& model, double r, double phi,
                                                 double p_thr) {
    const auto* q = std::get_if<QbmHighT>(&model.kind());
    if (q == nullptr) {
        throw std::invalid_argument(
            "efficiency_threshold_asymptotic: defined for the monitored-particle model");
    }
    if (!(p_thr > 0.0 && p_thr < 1.0)) {
        throw std::invalid_argument("efficiency_threshold_asymptotic: require p_thr in (0,1)");
    }
    const qbm::QbmBath bath{q->temperature};
    auto stationary_purity = [&](double eta) {
        return purity(qbm::stationary_numeric(qbm::QbmScheme{eta, r, phi}, bath));
    };
    try {
        if (stationary_purity(1.0) < p_thr) {
            return CriterionOutcome::not_attainable();
        }
    } catch (const NoConvergenceError&) {
        // No stationary point at full efficiency (y-homodyne manifold):
        // the threshold cannot be certified.
        return CriterionOutcome::not_attainable();
    }
    const double eta =
        num::bisect([&](double e) { return stationary_purity(e) - p_thr; }, 0.0, 1.0, 1e-6);
    return CriterionOutcome::finite(eta);
}

CriterionOutcome purity_loss_time(const ModelHandle& model, const SchemeDescriptor& scheme,
                                  double target) {
    GaussianShape stationary;
    try {
        stationary = model.conditional_stationary(scheme);
    } catch (const NoConvergenceError&) {
        // No stationary point under this scheme; prepare with a long
        // conditioning stage and take the state at the horizon instead.
        const auto* q = std::get_if<QbmHighT>(&model.kind());
        if (q == nullptr) throw;
        const qbm::QbmBath bath{q->temperature};
        stationary = qbm::evolve(model.thermal_start(), as_qbm(scheme), bath, model.horizon())
                         .shape_at(model.horizon());
    }
    if (purity(stationary) <= target) {
        return CriterionOutcome::finite(0.0);
    }
    const PurityCurve curve = model.purity_trajectory(stationary, scheme, Flow::Unconditional);
    const CriterionOutcome crossing = num::first_crossing(
        curve.value, curve.scan_times, target, num::CrossingDirection::Downward);
    if (crossing.status == CriterionOutcome::Status::NotReached &&
        model.is_unconditional_fixed_point(stationary)) {
        return CriterionOutcome::infinite();
    }
    return crossing;
}

SieveResult predictability_sieve(const ModelHandle& model, const StateGrid& states, double t) {
    auto purity_of = [&](std::span<const double> coords) {
        const GaussianShape s0 = states.state_at(coords);
        if (std::abs(purity(s0) - 1.0) > 1e-6) {
            throw InvalidStateError("predictability_sieve: grid states must be pure");
        }
        return model.unconditional_purity_at(s0, t);
    };
    const num::GridOptResult opt = num::grid_argopt(purity_of, states.grid,
                                                    num::OptSense::Maximize);
    SieveResult res;
    res.axis_names = states.axis_names;
    res.grids = opt.grid;
    res.purities = opt.surface;
    res.argmax = opt.argopt;
    res.max_purity = opt.value;
    return res;
}

num::OptSense sense_of(CriterionId id) noexcept {
    return id == CriterionId::PurityLossTime ? num::OptSense::Maximize
                                             : num::OptSense::Minimize;
}

unsigned sweep_workers(std::size_t points) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (const char* env = std::getenv("QCLASS_WORKERS")) {
        const long requested = std::strtol(env, nullptr, 10);
        if (requested >= 1) workers = static_cast<unsigned>(requested);
    }
    return static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(points, 1)));
}

SweepResult scheme_sweep(CriterionId id, const ModelHandle& model, const SweepAxis& axis,
                         const FixedSweepParams& params) {
    SweepResult res;
    res.axis_name = axis.name;
    res.points = num::axis_points(axis.axis);
    res.values.assign(res.points.size(), CriterionOutcome::not_attainable());
    res.sense = sense_of(id);

    const GaussianShape start = params.start.value_or(model.thermal_start());

    auto eval_point = [&](std::size_t i) -> CriterionOutcome {
        const double x = res.points[i];
        switch (id) {
        case CriterionId::PurificationTime:
            return purification_time(model, axis.scheme_at(x, params.eta), start, params.target);
        case CriterionId::EfficiencyThresholdFixedTime:
            return efficiency_threshold_fixed_time(
                model, [&](double eta) { return axis.scheme_at(x, eta); }, start, params.p_thr,
                params.t_thr);
        case CriterionId::EfficiencyThresholdAsymptotic: {
            const auto scheme = as_qbm(axis.scheme_at(x, 1.0));
            return efficiency_threshold_asymptotic(model, scheme.r, scheme.phi, params.p_thr);
        }
        case CriterionId::PurityLossTime:
            return purity_loss_time(model, axis.scheme_at(x, params.eta), params.target);
        }
        return CriterionOutcome::not_attainable();
    };

    const unsigned workers = sweep_workers(res.points.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run_range = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < res.points.size(); i += stride) {
            try {
                res.values[i] = eval_point(i);
            } catch (const NoConvergenceError&) {
                res.values[i] = CriterionOutcome::not_attainable();
            } catch (const SingularSchemeError&) {
                res.values[i] = CriterionOutcome::not_attainable();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run_range, w, workers);
        }
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Argopt over comparable outcomes (Finite, or Infinite ranked as +inf);
    // ties keep the smallest grid coordinate.
    const bool maximize = res.sense == num::OptSense::Maximize;
    for (std::size_t i = 0; i < res.values.size(); ++i) {
        const auto& v = res.values[i];
        double key;
        if (v.status == CriterionOutcome::Status::Finite) {
            key = v.value;
        } else if (v.status == CriterionOutcome::Status::Infinite) {
            key = std::numeric_limits<double>::infinity();
        } else {
            continue;
        }
        if (!res.argopt) {
            res.argopt = i;
            continue;
        }
        const auto& best = res.values[*res.argopt];
        const double best_key = best.status == CriterionOutcome::Status::Infinite
                                    ? std::numeric_limits<double>::infinity()
                                    : best.value;
        if (maximize ? key > best_key : key < best_key) res.argopt = i;
    }
    return res;
}

} // namespace qclass::criteria
