#include "sepvar/problem.hpp"
#include "sepvar/parser.hpp"

#include <cmath>

namespace sepvar::cli {

namespace {

constexpr const char* kSchema = "sepvar/1";

SamplingPlan plan_from(const json& j, int dim) {
    SamplingPlan plan;
    if (j.contains("box")) {
        for (const auto& iv : j.at("box"))
            plan.box.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    } else {
        plan.box.assign(dim, {1.0, 2.0});  // default, off the x_i = x_j diagonal for fixtures
    }
    if (static_cast<int>(plan.box.size()) != dim)
        throw std::invalid_argument("box dimension mismatch");
    plan.seed = j.value("seed", std::uint64_t{0});
    plan.trials = j.value("trials", 32);
    plan.abs_tol = j.value("abs_tol", 1e-9);
    plan.validate();
    return plan;
}

}  // namespace

TensorField ProblemFile::tensor() const {
    if (K) return *K;
    return TensorField::diagonal(chart, *diagonal);
}

ProblemFile load_problem(const json& j) {
    ProblemFile pf;
    int dim = j.at("dim").get<int>();
    if (dim < 2) throw std::invalid_argument("dim must be >= 2");
    pf.chart = Chart::standard(dim);
    if (j.contains("coords")) {
        pf.chart.var_names = j.at("coords").get<std::vector<std::string>>();
        if (static_cast<int>(pf.chart.var_names.size()) != dim)
            throw std::invalid_argument("coords length must equal dim");
    }

    const bool has_matrix = j.contains("K"), has_diag = j.contains("diagonal");
    if (has_matrix == has_diag)
        throw std::invalid_argument("exactly one of \"K\" / \"diagonal\" must be present");

    if (has_matrix) {
        std::vector<std::vector<Expr>> rows;
        for (const auto& row : j.at("K")) {
            std::vector<Expr> r;
            for (const auto& cell : row) r.push_back(parse(cell.get<std::string>(), pf.chart));
            rows.push_back(std::move(r));
        }
        pf.K = TensorField::matrix(pf.chart, std::move(rows));
    } else {
        std::vector<Expr> diag;
        for (const auto& cell : j.at("diagonal")) diag.push_back(parse(cell.get<std::string>(), pf.chart));
        if (static_cast<int>(diag.size()) != dim)
            throw std::invalid_argument("diagonal length must equal dim");
        pf.diagonal = std::move(diag);
    }

    pf.plan = plan_from(j, dim);

    if (j.contains("gauge")) {
        GaugeChoice g;
        const auto& gj = j.at("gauge");
        g.eps = gj.value("eps", std::vector<int>(dim, 1));
        if (gj.contains("ghat"))
            for (const auto& s : gj.at("ghat")) g.ghat.push_back(parse(s.get<std::string>(), pf.chart));
        else
            g.ghat.assign(dim, Expr(Rational(0)));
        g.validate(dim);
        pf.gauge = std::move(g);
    }
    if (j.contains("basepoint")) {
        std::vector<double> b = j.at("basepoint").get<std::vector<double>>();
        if (static_cast<int>(b.size()) != dim)
            throw std::invalid_argument("basepoint dimension mismatch");
        pf.basepoint = Point::real(b);
    }
    return pf;
}

namespace {

ordered_json point_json(const Point& p) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : p.coords) arr.push_back(c.as_double());
    return arr;
}

const char* status_name(ZeroStatus s) {
    switch (s) {
        case ZeroStatus::IdenticallyZeroExact: return "identically_zero_exact";
        case ZeroStatus::ZeroWithinTolerance: return "zero_within_tolerance";
        case ZeroStatus::Nonzero: return "nonzero";
    }
    return "?";
}

ordered_json verdict_json(const Verdict& v) {
    ordered_json q;
    q["verdict"] = v.outcome == QOutcome::Pass    ? "pass"
                   : v.outcome == QOutcome::Fail ? "fail"
                                                 : "indeterminate";
    q["status"] = status_name(v.zero.status);
    q["samples_used"] = v.zero.samples_used;
    if (v.zero.witness) {
        q["witness"] = ordered_json{{"point", point_json(v.zero.witness->first)},
                                    {"residual", v.zero.witness->second}};
    }
    if (!v.detail.empty()) q["detail"] = v.detail;
    if (!v.warnings.empty()) q["warnings"] = v.warnings;
    return q;
}

ordered_json report_json(const TestReport& rep) {
    ordered_json out;
    out["schema"] = kSchema;
    out["command"] = "check";
    out["seed"] = rep.seed;
    out["trials"] = rep.trials;
    ordered_json box = ordered_json::array();
    for (const auto& [lo, hi] : rep.box) box.push_back(ordered_json::array({lo, hi}));
    out["box"] = box;
    out["questions"] = ordered_json{{"q1_discriminant", verdict_json(rep.q1)},
                                    {"q2_haantjes", verdict_json(rep.q2)},
                                    {"q3_weak_nonlinearity", verdict_json(rep.q3)},
                                    {"q4_semihamiltonicity", verdict_json(rep.q4)}};
    out["overall"] = rep.overall ? "pass" : "fail";
    out["notes"] = rep.notes;
    return out;
}

int report_exit_code(const TestReport& rep) {
    if (rep.overall) return 0;
    for (const Verdict* v : {&rep.q1, &rep.q2, &rep.q3, &rep.q4})
        if (v->outcome == QOutcome::Fail) return 1;
    return 2;
}

SamplingPlan apply_overrides(SamplingPlan plan, const Overrides& ov) {
    if (ov.seed) plan.seed = *ov.seed;
    if (ov.trials) plan.trials = *ov.trials;
    if (ov.tol) plan.abs_tol = *ov.tol;
    return plan;
}

}  // namespace

int run_check(const json& problem, const Overrides& ov, ordered_json& out) {
    ProblemFile pf = load_problem(problem);
    SamplingPlan plan = apply_overrides(pf.plan, ov);
    TestReport rep = run_all(pf.tensor(), plan);
    out = report_json(rep);
    return report_exit_code(rep);
}

int run_reconstruct(const json& problem, const Overrides& ov, ordered_json& out) {
    ProblemFile pf = load_problem(problem);
    if (!pf.diagonal) {
        out = ordered_json{{"schema", kSchema},
                           {"command", "reconstruct"},
                           {"error", "reconstruction requires diagonal form"}};
        return 2;
    }
    if (!pf.basepoint) {
        out = ordered_json{{"schema", kSchema},
                           {"command", "reconstruct"},
                           {"error", "no basepoint given; the box does not determine a canonical "
                                     "basepoint, supply \"basepoint\" explicitly"}};
        return 2;
    }
    SamplingPlan plan = apply_overrides(pf.plan, ov);

    ordered_json check_report;
    int check_code = run_check(problem, ov, check_report);
    if (check_code != 0) {
        out = ordered_json{{"schema", kSchema},
                           {"command", "reconstruct"},
                           {"error", "separability check failed; no metric exists"},
                           {"check", check_report}};
        return check_code;
    }

    const int n = pf.chart.dim;
    GaugeChoice gauge = pf.gauge ? *pf.gauge : GaugeChoice::defaults(n);
    MetricField metric =
        reconstruct_metric(*pf.diagonal, pf.chart, gauge, *pf.basepoint, ov.quad_tol, plan);

    // verification at `trials` random points
    double worst = 0.0;
    for (int t = 0; t < plan.trials; ++t) {
        PointSampler sampler(plan, t);
        Point p = Point::real(sampler.draw_double());
        worst = std::max(worst, poisson_residuals(metric, *pf.diagonal, p).max_abs());
    }

    out["schema"] = kSchema;
    out["command"] = "reconstruct";
    out["seed"] = plan.seed;
    out["basepoint"] = point_json(*pf.basepoint);
    ordered_json gaugej;
    gaugej["eps"] = gauge.eps;
    ordered_json ghatj = ordered_json::array();
    for (const auto& g : gauge.ghat) ghatj.push_back(to_string(g, &pf.chart));
    gaugej["ghat"] = ghatj;
    out["gauge"] = gaugej;

    ordered_json omegaj = ordered_json::array();
    for (const auto& row : metric.oneforms()) {
        ordered_json r = ordered_json::array();
        for (const auto& w : row) r.push_back(to_string(w, &pf.chart));
        omegaj.push_back(r);
    }
    out["omega"] = omegaj;

    const int m = ov.grid;
    ordered_json axes = ordered_json::array();
    std::vector<std::vector<double>> grid(n);
    for (int i = 0; i < n; ++i) {
        auto [lo, hi] = plan.box[i];
        ordered_json axis = ordered_json::array();
        for (int s = 0; s < m; ++s) {
            double v = lo + (hi - lo) * (s + 0.5) / m;
            grid[i].push_back(v);
            axis.push_back(v);
        }
        axes.push_back(axis);
    }
    out["axes"] = axes;
    out["grid_shape"] = std::vector<int>(n, m);

    // g_{ii} sampled row-major over the product grid
    ordered_json gvals = ordered_json::array();
    const long total = static_cast<long>(std::pow(m, n));
    std::vector<ordered_json> per_axis(n, ordered_json::array());
    for (long c = 0; c < total; ++c) {
        std::vector<double> x(n);
        long rest = c;
        for (int i = n - 1; i >= 0; --i) {
            x[i] = grid[i][rest % m];
            rest /= m;
        }
        for (int i = 0; i < n; ++i) per_axis[i].push_back(metric.g_lower(i, x));
    }
    for (int i = 0; i < n; ++i) gvals.push_back(per_axis[i]);
    out["g_lower"] = gvals;
    out["poisson_max_residual"] = worst;
    out["verified_points"] = plan.trials;
    return worst < plan.abs_tol ? 0 : 1;
}

namespace {

TensorField tensor_from_json(const json& j, Chart& chart_out) {
    int dim = j.at("dim").get<int>();
    Chart chart = Chart::standard(dim);
    if (j.contains("coords")) chart.var_names = j.at("coords").get<std::vector<std::string>>();
    chart_out = chart;
    int valence = j.value("valence", 1);
    const auto& comps = j.at("components");
    if (valence == 1) {
        std::vector<std::vector<Expr>> rows;
        for (const auto& row : comps) {
            std::vector<Expr> r;
            for (const auto& cell : row) r.push_back(parse(cell.get<std::string>(), chart));
            rows.push_back(std::move(r));
        }
        return TensorField::matrix(chart, std::move(rows));
    }
    if (valence == 2) {
        TensorField t = TensorField::zero(chart, 2, true);
        for (int i = 0; i < dim; ++i)
            for (int jj = 0; jj < dim; ++jj)
                for (int k = jj + 1; k < dim; ++k)
                    t.set(i, jj, k, parse(comps.at(i).at(jj).at(k).get<std::string>(), chart));
        return t;
    }
    throw std::invalid_argument("tensor file valence must be 1 or 2");
}

}  // namespace

int run_bracket(const json& tensor_a, const json& tensor_b, ordered_json& out) {
    Chart ca, cb;
    TensorField A = tensor_from_json(tensor_a, ca);
    TensorField B = tensor_from_json(tensor_b, cb);
    if (!(ca == cb)) {
        out = ordered_json{{"schema", kSchema}, {"command", "bracket"}, {"error", "chart mismatch"}};
        return 2;
    }
    TensorField result = nijenhuis_bracket(A, B);
    out["schema"] = kSchema;
    out["command"] = "bracket";
    out["dim"] = ca.dim;
    out["valence"] = result.valence();
    const int n = ca.dim;
    ordered_json comps = ordered_json::array();
    if (result.valence() == 2) {
        for (int i = 0; i < n; ++i) {
            ordered_json mi = ordered_json::array();
            for (int j = 0; j < n; ++j) {
                ordered_json row = ordered_json::array();
                for (int k = 0; k < n; ++k) row.push_back(to_string(result.at(i, j, k), &ca));
                mi.push_back(row);
            }
            comps.push_back(mi);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            ordered_json mi = ordered_json::array();
            for (int j = 0; j < n; ++j) {
                ordered_json mj = ordered_json::array();
                for (int k = 0; k < n; ++k) {
                    ordered_json row = ordered_json::array();
                    for (int l = 0; l < n; ++l) row.push_back(to_string(result.at(i, j, k, l), &ca));
                    mj.push_back(row);
                }
                mi.push_back(mj);
            }
            comps.push_back(mi);
        }
    }
    out["components"] = comps;
    return 0;
}

int run_oracle(const json& problem, const Overrides& ov, ordered_json& out) {
    ProblemFile pf = load_problem(problem);
    if (!pf.diagonal) {
        out = ordered_json{{"schema", kSchema},
                           {"command", "oracle"},
                           {"error", "oracle requires diagonal form"}};
        return 2;
    }
    SamplingPlan plan = apply_overrides(pf.plan, ov);
    TensorField K = pf.tensor();

    out["schema"] = kSchema;
    out["command"] = "oracle";
    out["seed"] = plan.seed;

    ordered_json tsarev = ordered_json::array();
    bool all_tsarev_zero = true;
    for (const auto& e : oracle_tsarev(*pf.diagonal, pf.chart, plan)) {
        ordered_json entry;
        entry["triple"] = ordered_json::array({e.i + 1, e.j + 1, e.k + 1});
        entry["status"] = status_name(e.verdict.status);
        if (e.verdict.witness) {
            entry["witness"] = ordered_json{{"point", point_json(e.verdict.witness->first)},
                                            {"residual", e.verdict.witness->second}};
            all_tsarev_zero = false;
        }
        tsarev.push_back(entry);
    }
    out["tsarev_residuals"] = tsarev;

    ordered_json selfd = ordered_json::array();
    for (const auto& e : oracle_weak_nonlinearity_diag(*pf.diagonal, pf.chart, plan)) {
        ordered_json entry;
        entry["i"] = e.i + 1;
        entry["expression"] = to_string(e.residual, &pf.chart);
        entry["status"] = status_name(e.verdict.status);
        selfd.push_back(entry);
    }
    out["self_derivatives"] = selfd;

    Verdict q3 = q3_weakly_nonlinear(K, plan);
    Verdict q4 = q4_semihamiltonian(K, plan);
    out["q3_weak_nonlinearity"] = verdict_json(q3);
    out["q4_semihamiltonicity"] = verdict_json(q4);
    out["tsarev_all_zero"] = all_tsarev_zero;
    return (q3.passed() && q4.passed()) ? 0 : 1;
}

}  // namespace sepvar::cli
