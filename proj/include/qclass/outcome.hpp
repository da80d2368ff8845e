#pragma once

namespace qclass {

/// Result of a time/threshold criterion. Finite carries the located value;
/// NotReached carries the horizon that was searched.
struct CriterionOutcome {
    enum class Status { Finite, NotReached, NotAttainable, Infinite };

    Status status = Status::NotAttainable;
    double value = 0.0;

    static CriterionOutcome finite(double v) { return {Status::Finite, v}; }
    static CriterionOutcome not_reached(double horizon) { return {Status::NotReached, horizon}; }
    static CriterionOutcome not_attainable() { return {Status::NotAttainable, 0.0}; }
    static CriterionOutcome infinite() { return {Status::Infinite, 0.0}; }

    bool is_finite() const noexcept { return status == Status::Finite; }
};

inline const char* to_string(CriterionOutcome::Status s) noexcept {
    switch (s) {
    case CriterionOutcome::Status::Finite: return "finite";
    case CriterionOutcome::Status::NotReached: return "not_reached";
    case CriterionOutcome::Status::NotAttainable: return "not_attainable";
    case CriterionOutcome::Status::Infinite: return "infinite";
    }
    return "unknown";
}

} // namespace qclass
