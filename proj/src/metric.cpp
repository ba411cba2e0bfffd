#include "sepvar/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sepvar {

GaugeChoice GaugeChoice::defaults(int n) {
    GaugeChoice g;
    g.eps.assign(n, 1);
    g.ghat.assign(n, Expr(Rational(0)));
    return g;
}

namespace {

void collect_vars(const Expr::Node* n, std::vector<bool>& used) {
    if (n->kind == Expr::Kind::Var) {
        if (n->var < static_cast<int>(used.size())) used[n->var] = true;
        return;
    }
    if (n->a) collect_vars(n->a.get(), used);
    if (n->b) collect_vars(n->b.get(), used);
}

double eval_at(const Expr& e, std::span<const double> x) {
    FloatEvaluator ev(std::vector<double>(x.begin(), x.end()));
    return ev.eval(e);
}

}  // namespace

void GaugeChoice::validate(int n) const {
    if (static_cast<int>(eps.size()) != n || static_cast<int>(ghat.size()) != n)
        throw std::invalid_argument("GaugeChoice: size mismatch");
    for (int i = 0; i < n; ++i) {
        if (eps[i] != 1 && eps[i] != -1)
            throw std::invalid_argument("GaugeChoice: eps entries must be +1 or -1");
        std::vector<bool> used(n, false);
        collect_vars(ghat[i].raw(), used);
        for (int j = 0; j < n; ++j)
            if (j != i && used[j])
                throw std::invalid_argument("GaugeChoice: ghat^" + std::to_string(i + 1) +
                                            " may reference only variable " + std::to_string(i + 1));
    }
}

std::vector<std::vector<Expr>> build_oneforms(const std::vector<Expr>& K_diag, const Chart& chart) {
    const int n = chart.dim;
    if (static_cast<int>(K_diag.size()) != n)
        throw std::invalid_argument("build_oneforms: diagonal entry count mismatch");
    std::vector<std::vector<Expr>> omega(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            omega[i][j] = differentiate(K_diag[i], j) / (K_diag[j] - K_diag[i]);
        }
    return omega;
}

ClosednessVerdict check_closed(const std::vector<Expr>& omega, int axis, const Chart& chart,
                               const SamplingPlan& plan) {
    const int n = chart.dim;
    std::vector<Expr> residuals;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            if (j == axis || k == axis) continue;
            residuals.push_back(differentiate(omega[j], k) - differentiate(omega[k], j));
        }
    ClosednessVerdict v;
    if (residuals.empty()) {
        v.closed = true;  // 1-form in at most one variable
        return v;
    }
    v.zero = is_identically_zero_all(residuals, plan);
    v.closed = v.zero.is_zero();
    return v;
}

namespace {

/// Adaptive Simpson with absolute tolerance and interval-halving depth cap.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int depth_cap) {
    auto simpson = [&](double lo, double hi, double flo, double fmid, double fhi) {
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double t,
            int depth) -> double {
        double mid = (lo + hi) / 2;
        double lm = (lo + mid) / 2, rm = (mid + hi) / 2;
        double flm = f(lm), frm = f(rm);
        double left = simpson(lo, mid, flo, flm, fmid);
        double right = simpson(mid, hi, fmid, frm, fhi);
        double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * t) return left + right + delta / 15.0;
        if (depth >= depth_cap)
            throw QuadratureFailure("adaptive Simpson: tolerance not met at depth cap");
        return rec(lo, mid, flo, flm, fmid, left, t / 2, depth + 1) +
               rec(mid, hi, fmid, frm, fhi, right, t / 2, depth + 1);
    };
    if (a == b) return 0.0;
    double fa = f(a), fm = f((a + b) / 2), fb = f(b);
    double whole = simpson(a, b, fa, fm, fb);
    return rec(a, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace

MetricField::MetricField(Chart chart, std::vector<Expr> K_diag, GaugeChoice gauge, Point basepoint,
                         double quad_tol)
    : chart_(std::move(chart)),
      K_diag_(std::move(K_diag)),
      gauge_(std::move(gauge)),
      basepoint_(std::move(basepoint)),
      quad_tol_(quad_tol) {
    const int n = chart_.dim;
    gauge_.validate(n);
    if (static_cast<int>(basepoint_.size()) != n)
        throw std::invalid_argument("MetricField: basepoint dimension mismatch");
    omega_ = build_oneforms(K_diag_, chart_);
    domega_dxi_.assign(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) domega_dxi_[i][j] = differentiate(omega_[i][j], i);
    for (int i = 0; i < n; ++i) dghat_.push_back(differentiate(gauge_.ghat[i], i));
    corruption_.assign(n, 1.0);
}

double MetricField::integrate_polyline(int i, std::span<const double> x,
                                       const std::vector<std::vector<Expr>>& integrand,
                                       bool reversed) const {
    const int n = chart_.dim;
    std::vector<double> cur(n);
    for (int j = 0; j < n; ++j) cur[j] = basepoint_.coords[j].as_double();
    cur[i] = x[i];

    std::vector<int> order;
    for (int j = 0; j < n; ++j)
        if (j != i) order.push_back(j);
    if (reversed) std::reverse(order.begin(), order.end());

    double total = 0.0;
    for (int j : order) {
        const Expr& w = integrand[i][j];
        auto f = [&](double t) {
            cur[j] = t;
            try {
                return eval_at(w, cur);
            } catch (const EvalError& e) {
                throw SingularPath(std::string("singular integrand on path segment: ") + e.what());
            }
        };
        total += adaptive_simpson(f, basepoint_.coords[j].as_double(), x[j], quad_tol_, 40);
        cur[j] = x[j];
    }
    return total;
}

double MetricField::g_exponent(int i, std::span<const double> x) const {
    double ghat = eval_at(gauge_.ghat[i], x);
    return corruption_[i] * (ghat + integrate_polyline(i, x, omega_, false));
}

double MetricField::g_exponent_reversed_path(int i, std::span<const double> x) const {
    double ghat = eval_at(gauge_.ghat[i], x);
    return corruption_[i] * (ghat + integrate_polyline(i, x, omega_, true));
}

double MetricField::dg(int i, int j, std::span<const double> x) const {
    if (i != j) return corruption_[i] * eval_at(omega_[i][j], x);
    return corruption_[i] * (eval_at(dghat_[i], x) + integrate_polyline(i, x, domega_dxi_, false));
}

double MetricField::g_lower(int i, std::span<const double> x) const {
    return gauge_.eps[i] * std::exp(-g_exponent(i, x));
}

MetricField reconstruct_metric(const std::vector<Expr>& K_diag, const Chart& chart,
                               const GaugeChoice& gauge, const Point& basepoint, double quad_tol,
                               const SamplingPlan& plan) {
    auto omega = build_oneforms(K_diag, chart);
    for (int i = 0; i < chart.dim; ++i) {
        auto cv = check_closed(omega[i], i, chart, plan);
        if (!cv.closed)
            throw std::invalid_argument("reconstruct_metric: 1-form for g^" + std::to_string(i + 1) +
                                        " is not closed (semi-hamiltonicity fails)");
    }
    return MetricField(chart, K_diag, gauge, basepoint, quad_tol);
}

double killing_residual(const MetricField& m, const std::vector<Expr>& K_diag, const Point& p) {
    const int n = m.chart().dim;
    std::vector<double> x;
    for (const auto& c : p.coords) x.push_back(c.as_double());

    std::vector<double> Kv(n), gl(n);
    std::vector<std::vector<double>> dK(n, std::vector<double>(n));
    std::vector<std::vector<double>> dgl(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        Kv[i] = eval_at(K_diag[i], x);
        gl[i] = m.g_lower(i, x);
        for (int k = 0; k < n; ++k) {
            dK[i][k] = eval_at(differentiate(K_diag[i], k), x);
            dgl[i][k] = -gl[i] * m.dg(i, k, x);  // d/dx^k of eps_i exp(-g^i)
        }
    }

    // Christoffel symbols of the first kind for a diagonal metric:
    // Gamma_{ij,k} = (g_{ik,j} + g_{jk,i} - g_{ij,k}) / 2 with g_{ik} = delta_ik g_{ii}.
    auto gamma1 = [&](int i, int j, int k) {
        double a = (i == k) ? dgl[i][j] : 0.0;
        double b = (j == k) ? dgl[j][i] : 0.0;
        double c = (i == j) ? dgl[i][k] : 0.0;
        return 0.5 * (a + b - c);
    };
    auto gamma2 = [&](int s, int i, int j) { return gamma1(i, j, s) / gl[s]; };

    // K_{ij} = g_{ii} K_i delta_ij
    auto Klow = [&](int i, int j) { return i == j ? gl[i] * Kv[i] : 0.0; };
    auto dKlow = [&](int i, int j, int k) {
        return i == j ? dgl[i][k] * Kv[i] + gl[i] * dK[i][k] : 0.0;
    };
    auto nabla = [&](int k, int i, int j) {
        double r = dKlow(i, j, k);
        for (int s = 0; s < n; ++s) r -= gamma2(s, k, i) * Klow(s, j) + gamma2(s, k, j) * Klow(i, s);
        return r;
    };

    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double r = nabla(k, i, j) + nabla(i, j, k) + nabla(j, k, i);
                worst = std::max(worst, std::abs(r));
            }
    return worst;
}

double PoissonResiduals::max_abs() const {
    double worst = 0.0;
    for (double c : cubic) worst = std::max(worst, std::abs(c));
    for (const auto& row : mixed)
        for (double c : row) worst = std::max(worst, std::abs(c));
    return worst;
}

PoissonResiduals poisson_residuals(const MetricField& m, const std::vector<Expr>& K_diag,
                                   const Point& p) {
    const int n = m.chart().dim;
    std::vector<double> x;
    for (const auto& c : p.coords) x.push_back(c.as_double());

    std::vector<double> g(n), Kv(n);
    for (int i = 0; i < n; ++i) {
        g[i] = m.g_exponent(i, x);
        Kv[i] = eval_at(K_diag[i], x);
    }

    PoissonResiduals res;
    res.cubic.resize(n);
    res.mixed.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        res.cubic[i] = std::exp(2.0 * g[i]) * eval_at(differentiate(K_diag[i], i), x);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double coeff = m.gauge().eps[i] * m.gauge().eps[j] * std::exp(g[i] + g[j]);
            res.mixed[i][j] =
                coeff * ((Kv[i] - Kv[j]) * m.dg(i, j, x) + eval_at(differentiate(K_diag[i], j), x));
        }
    }
    return res;
}

}  // namespace sepvar
