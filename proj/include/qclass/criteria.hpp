#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qclass/gaussian.hpp"
#include "qclass/numerics.hpp"
#include "qclass/oscillator.hpp"
#include "qclass/outcome.hpp"
#include "qclass/qbm.hpp"

namespace qclass::criteria {

struct OscillatorT0 {};
struct OscillatorFiniteT {
    double n;
};
struct QbmHighT {
    double temperature;
};

using ModelKind = std::variant<OscillatorT0, OscillatorFiniteT, QbmHighT>;
using SchemeDescriptor = std::variant<osc::OscScheme, qbm::QbmScheme>;

enum class Flow { Conditional, Unconditional };

/// Purity as a dense function of time plus the scan points used for event
/// bracketing.
struct PurityCurve {
    std::function<double(double)> value;
    double t_end = 0.0;
    std::vector<double> scan_times;
};

/// Uniform handle over the three models: purity trajectories, conditional
/// stationary states, and fixed-point queries, all against the matching
/// scheme descriptor type.
class ModelHandle {
public:
    static ModelHandle oscillator_t0();
    static ModelHandle oscillator_finite_t(double n);
    static ModelHandle qbm_high_t(double temperature);

    const ModelKind& kind() const noexcept { return kind_; }
    bool is_qbm() const noexcept;

    /// Default integration/evaluation horizon in model time units.
    double horizon() const;

    /// Reference mixed starting state (degenerate thermal).
    GaussianShape thermal_start() const;

    /// Purity along the conditional or unconditional evolution from `start`.
    PurityCurve purity_trajectory(const GaussianShape& start, const SchemeDescriptor& scheme,
                                  Flow flow) const;

    /// Unconditional purity at a single time (cheaper than a full curve for
    /// sieve scans).
    double unconditional_purity_at(const GaussianShape& start, double t) const;

    /// Asymptotic state of the conditional evolution under `scheme`.
    GaussianShape conditional_stationary(const SchemeDescriptor& scheme) const;

    bool is_unconditional_fixed_point(const GaussianShape& shape) const;

    /// Conditional purity asymptote from a thermal start (1 at T = 0 and for
    /// the monitored particle at full efficiency; 1/(1+2n) at finite T).
    double purity_asymptote() const;

private:
    explicit ModelHandle(ModelKind kind) : kind_(kind) {}
    ModelKind kind_;
};

/// Target for purification halfway between the start and the reachable
/// asymptote; reduces to 0.5 for a degenerate start at T = 0.
double default_purification_target(const ModelHandle& model, const GaussianShape& start);

// ---- Criterion evaluations ----------------------------------------------

/// First upward crossing of the conditional purity through `target`.
CriterionOutcome purification_time(const ModelHandle& model, const SchemeDescriptor& scheme,
                                   const GaussianShape& start, double target);

/// Minimal efficiency reaching p_thr at fixed time t_thr, by bisection over
/// eta of the conditional purity; width 1e-6. NotAttainable when even
/// eta = 1 stays below threshold.
CriterionOutcome efficiency_threshold_fixed_time(
    const ModelHandle& model, const std::function<SchemeDescriptor(double)>& scheme_of_eta,
    const GaussianShape& start, double p_thr, double t_thr);

/// Minimal efficiency whose *stationary* conditional purity reaches p_thr
/// (monitored-particle model only).
CriterionOutcome efficiency_threshold_asymptotic(const ModelHandle& model, double r, double phi,
                                                 double p_thr);

/// Conditional stationary state, then unconditional evolution; first downward
/// crossing of purity through `target`. Finite(0) when the stationary purity
/// already sits at or below target; Infinite when the state is an exact
/// unconditional fixed point above target.
CriterionOutcome purity_loss_time(const ModelHandle& model, const SchemeDescriptor& scheme,
                                  double target);

// ---- Sweeps ---------------------------------------------------------------

struct StateGrid {
    num::GridSpec grid;
    std::vector<std::string> axis_names;
    std::function<GaussianShape(std::span<const double>)> state_at;
};

struct SieveResult {
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> grids; // coarse per-axis points
    std::vector<double> purities;           // coarse surface, lexicographic
    std::vector<double> argmax;             // refined optimum coordinates
    double max_purity = 0.0;
};

/// Unconditional purity at time t over a grid of pure initial states;
/// argmax reported after grid refinement. Grid states must be pure.
SieveResult predictability_sieve(const ModelHandle& model, const StateGrid& states, double t);

enum class CriterionId {
    PurificationTime,
    EfficiencyThresholdFixedTime,
    EfficiencyThresholdAsymptotic,
    PurityLossTime,
};

struct SweepAxis {
    num::GridAxis axis;
    std::string name; // "s" for the oscillator family, "phi" for homodyne angle
    /// Scheme at (grid value, efficiency); threshold criteria vary the
    /// efficiency, the others evaluate at FixedSweepParams::eta.
    std::function<SchemeDescriptor(double x, double eta)> scheme_at;
};

struct FixedSweepParams {
    double eta = 1.0;
    double target = 0.5;
    double p_thr = 0.5;
    double t_thr = 2.5;
    std::optional<GaussianShape> start; // default: model thermal start
};

struct SweepResult {
    std::string axis_name;
    std::vector<double> points;
    std::vector<CriterionOutcome> values;
    std::optional<std::size_t> argopt; // empty when no comparable point exists
    num::OptSense sense = num::OptSense::Minimize;
};

/// Evaluates one criterion per grid point; per-point failures become
/// NotAttainable and never abort the sweep. Points evaluate concurrently
/// (QCLASS_WORKERS caps the pool); results assemble in grid order.
SweepResult scheme_sweep(CriterionId id, const ModelHandle& model, const SweepAxis& axis,
                         const FixedSweepParams& params);

num::OptSense sense_of(CriterionId id) noexcept;

/// Worker count for sweeps: min(hardware, grid size), capped by the
/// QCLASS_WORKERS environment variable when set.
unsigned sweep_workers(std::size_t points);

} // namespace qclass::criteria
