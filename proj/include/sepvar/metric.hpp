#pragma once

#include "sepvar/tensor.hpp"

namespace sepvar {

/// Signature signs and the per-axis free functions of one variable:
/// ghat[i] may reference only variable i.
struct GaugeChoice {
    std::vector<int> eps;    // each +1 or -1
    std::vector<Expr> ghat;  // ghat[i] depends on x^i only

    static GaugeChoice defaults(int n);
    void validate(int n) const;
};

class QuadratureFailure : public std::runtime_error {
public:
    explicit QuadratureFailure(const std::string& w) : std::runtime_error(w) {}
};

class SingularPath : public std::runtime_error {
public:
    explicit SingularPath(const std::string& w) : std::runtime_error(w) {}
};

/// The n 1-forms with omega^i_j = (dK_i/dx^j)/(K_j - K_i) for j != i,
/// omega^i_i = 0. Singularities sit on eigenvalue collisions.
std::vector<std::vector<Expr>> build_oneforms(const std::vector<Expr>& K_diag, const Chart& chart);

/// Closedness of omega^i restricted to the variables != i (x^i a parameter):
/// zero-tests d omega_j/dx^k - d omega_k/dx^j for all j, k != i.
struct ClosednessVerdict {
    bool closed = false;
    ZeroVerdict zero;
};
ClosednessVerdict check_closed(const std::vector<Expr>& omega, int axis, const Chart& chart,
                               const SamplingPlan& plan);

/// Numerically reconstructed diagonal metric. g^i is the log-scale exponent
/// of the inverse metric: g^{ii} = eps_i exp(g^i), g_{ii} = eps_i exp(-g^i).
/// First partials are analytic: dg^i/dx^j = omega^i_j exactly for j != i,
/// and dg^i/dx^i integrates d omega^i_j/dx^i along the same path.
class MetricField {
public:
    MetricField(Chart chart, std::vector<Expr> K_diag, GaugeChoice gauge, Point basepoint,
                double quad_tol);

    double g_exponent(int i, std::span<const double> x) const;
    double dg(int i, int j, std::span<const double> x) const;
    double g_lower(int i, std::span<const double> x) const;  // g_{ii}

    /// Same integral along the reversed coordinate order (path-independence check).
    double g_exponent_reversed_path(int i, std::span<const double> x) const;

    const std::vector<std::vector<Expr>>& oneforms() const { return omega_; }
    const Chart& chart() const { return chart_; }
    const Point& basepoint() const { return basepoint_; }
    const GaugeChoice& gauge() const { return gauge_; }
    double quad_tol() const { return quad_tol_; }

    /// Test hook: multiplies g^i (and its partials) by a factor.
    void corrupt_exponent(int i, double factor) { corruption_[i] = factor; }

private:
    double integrate_polyline(int i, std::span<const double> x,
                              const std::vector<std::vector<Expr>>& integrand,
                              bool reversed) const;

    Chart chart_;
    std::vector<Expr> K_diag_;
    GaugeChoice gauge_;
    Point basepoint_;
    double quad_tol_;
    std::vector<std::vector<Expr>> omega_;         // omega_[i][j]
    std::vector<std::vector<Expr>> domega_dxi_;    // d omega^i_j / dx^i
    std::vector<Expr> dghat_;                      // d ghat^i / dx^i
    std::vector<double> corruption_;
};

/// Validates closedness of every omega^i, then assembles the metric.
MetricField reconstruct_metric(const std::vector<Expr>& K_diag, const Chart& chart,
                               const GaugeChoice& gauge, const Point& basepoint, double quad_tol,
                               const SamplingPlan& plan);

/// max |K_{ij,k} + K_{jk,i} + K_{ki,j}| over i <= j <= k, with
/// K_{ij} = g_{ii} K_i delta_ij and covariant derivatives from the metric's
/// analytic first partials.
double killing_residual(const MetricField& m, const std::vector<Expr>& K_diag, const Point& p);

/// Poisson-bracket coefficients: cubic[i] = exp(2 g^i) dK_i/dx^i and
/// mixed[i][j] = eps_i eps_j exp(g^i + g^j) ((K_i - K_j) dg^i/dx^j + dK_i/dx^j)
/// for i != j. The metric is Killing-compatible iff all vanish.
struct PoissonResiduals {
    std::vector<double> cubic;
    std::vector<std::vector<double>> mixed;
    double max_abs() const;
};
PoissonResiduals poisson_residuals(const MetricField& m, const std::vector<Expr>& K_diag,
                                   const Point& p);

}  // namespace sepvar
