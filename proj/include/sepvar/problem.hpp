#pragma once

#include "sepvar/metric.hpp"
#include "sepvar/septest.hpp"

#include <json.hpp>

namespace sepvar::cli {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Parsed problem file. Exactly one of K / diagonal is present.
struct ProblemFile {
    Chart chart;
    std::optional<TensorField> K;          // full matrix input
    std::optional<std::vector<Expr>> diagonal;
    SamplingPlan plan;
    std::optional<GaugeChoice> gauge;
    std::optional<Point> basepoint;

    TensorField tensor() const;  // K or diag lifted to a matrix
};

ProblemFile load_problem(const json& j);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<double> tol;
    double quad_tol = 1e-10;
    int grid = 10;
};

/// Exit codes: 0 = all questions pass, 1 = some question fails,
/// 2 = indeterminate or error. Each function fills `out` with the report.
int run_check(const json& problem, const Overrides& ov, ordered_json& out);
int run_reconstruct(const json& problem, const Overrides& ov, ordered_json& out);
int run_bracket(const json& tensor_a, const json& tensor_b, ordered_json& out);
int run_oracle(const json& problem, const Overrides& ov, ordered_json& out);

}  // namespace sepvar::cli
