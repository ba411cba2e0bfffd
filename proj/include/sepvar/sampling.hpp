#pragma once

#include "sepvar/expr.hpp"

#include <random>

namespace sepvar {

/// Domain box, trial count, tolerances and seed for probabilistic identity
/// testing. Each trial derives its point from seed + trial index, so verdicts
/// are independent of evaluation order.
struct SamplingPlan {
    std::vector<std::pair<double, double>> box;  // [lo_i, hi_i] per coordinate
    int trials = 32;
    double abs_tol = 1e-9;
    bool rel_scale = true;
    std::uint64_t seed = 0;
    int resample_cap = 100;

    void validate() const;
};

enum class ZeroStatus { IdenticallyZeroExact, ZeroWithinTolerance, Nonzero };

struct ZeroVerdict {
    ZeroStatus status = ZeroStatus::IdenticallyZeroExact;
    std::optional<std::pair<Point, double>> witness;  // point + residual
    int samples_used = 0;

    bool is_zero() const { return status != ZeroStatus::Nonzero; }
};

class ResampleExhausted : public std::runtime_error {
public:
    explicit ResampleExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic per-trial point source. Rational draws keep denominators
/// <= 10^4 so exact arithmetic stays bounded.
class PointSampler {
public:
    PointSampler(const SamplingPlan& plan, int trial_index);
    std::vector<Rational> draw_rational();
    std::vector<double> draw_double();

private:
    const SamplingPlan& plan_;
    std::mt19937_64 rng_;
};

/// Schwartz–Zippel-style zero test. Rational expressions are evaluated at
/// exact rational points: any exact nonzero value is a disproof with witness,
/// all-zero over `trials` points reports IdenticallyZeroExact. Expressions
/// with transcendental nodes fall back to float sampling against abs_tol
/// (scaled by the largest intermediate when rel_scale is set). Evaluation
/// failures trigger a redraw, up to resample_cap per trial.
ZeroVerdict is_identically_zero(const Expr& e, const SamplingPlan& plan);

/// Joint test over a list: every trial evaluates all expressions at one
/// shared point; the residual is the worst entry.
ZeroVerdict is_identically_zero_all(std::span<const Expr> es, const SamplingPlan& plan);

}  // namespace sepvar
