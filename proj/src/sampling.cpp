#include "sepvar/sampling.hpp"

#include <cmath>

namespace sepvar {

void SamplingPlan::validate() const {
    if (trials < 1) throw std::invalid_argument("SamplingPlan: trials must be >= 1");
    if (box.empty()) throw std::invalid_argument("SamplingPlan: box must not be empty");
    for (const auto& [lo, hi] : box)
        if (!(lo < hi)) throw std::invalid_argument("SamplingPlan: box interval needs lo < hi");
}

namespace {
constexpr std::uint64_t kTrialStride = 0x9E3779B97F4A7C15ull;
constexpr long kMaxDenominator = 10000;
}  // namespace

PointSampler::PointSampler(const SamplingPlan& plan, int trial_index)
    : plan_(plan), rng_(plan.seed + kTrialStride * static_cast<std::uint64_t>(trial_index + 1)) {}

std::vector<Rational> PointSampler::draw_rational() {
    std::vector<Rational> p;
    p.reserve(plan_.box.size());
    std::uniform_int_distribution<long> den_dist(2, kMaxDenominator);
    for (const auto& [lo, hi] : plan_.box) {
        long d = den_dist(rng_);
        long num_lo = static_cast<long>(std::ceil(lo * static_cast<double>(d)));
        long num_hi = static_cast<long>(std::floor(hi * static_cast<double>(d)));
        if (num_lo > num_hi) {  // interval narrower than 1/d
            num_lo = num_hi = static_cast<long>(std::llround((lo + hi) / 2 * static_cast<double>(d)));
        }
        std::uniform_int_distribution<long> num_dist(num_lo, num_hi);
        p.emplace_back(num_dist(rng_), d);
    }
    return p;
}

std::vector<double> PointSampler::draw_double() {
    std::vector<double> p;
    p.reserve(plan_.box.size());
    for (const auto& [lo, hi] : plan_.box) {
        std::uniform_real_distribution<double> dist(lo, hi);
        p.push_back(dist(rng_));
    }
    return p;
}

ZeroVerdict is_identically_zero(const Expr& e, const SamplingPlan& plan) {
    return is_identically_zero_all(std::span<const Expr>(&e, 1), plan);
}

ZeroVerdict is_identically_zero_all(std::span<const Expr> es, const SamplingPlan& plan) {
    plan.validate();
    bool rational_path = true;
    for (const auto& e : es)
        if (!e.is_rational_expr()) rational_path = false;

    ZeroVerdict verdict;
    verdict.status = rational_path ? ZeroStatus::IdenticallyZeroExact : ZeroStatus::ZeroWithinTolerance;

    for (int trial = 0; trial < plan.trials; ++trial) {
        PointSampler sampler(plan, trial);
        bool done = false;
        for (int attempt = 0; attempt <= plan.resample_cap && !done; ++attempt) {
            try {
                if (rational_path) {
                    auto coords = sampler.draw_rational();
                    ExactEvaluator ev(coords);
                    for (const auto& e : es) {
                        Rational v = ev.eval(e);
                        if (v != 0) {
                            verdict.status = ZeroStatus::Nonzero;
                            verdict.witness = {Point::rational(coords), v.convert_to<double>()};
                            ++verdict.samples_used;
                            return verdict;
                        }
                    }
                } else {
                    auto coords = sampler.draw_double();
                    FloatEvaluator ev(coords);
                    double worst = 0.0;
                    for (const auto& e : es) worst = std::max(worst, std::abs(ev.eval(e)));
                    double scale = plan.rel_scale ? std::max(1.0, ev.max_intermediate()) : 1.0;
                    double residual = worst / scale;
                    if (residual > plan.abs_tol) {
                        verdict.status = ZeroStatus::Nonzero;
                        verdict.witness = {Point::real(coords), residual};
                        ++verdict.samples_used;
                        return verdict;
                    }
                }
                ++verdict.samples_used;
                done = true;
            } catch (const EvalError&) {
                // singular draw (zero divisor, domain violation): redraw
            }
        }
        if (!done)
            throw ResampleExhausted("zero test: " + std::to_string(plan.resample_cap) +
                                    " consecutive draws hit evaluation failures");
    }
    return verdict;
}

}  // namespace sepvar
