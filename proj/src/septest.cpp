#include "sepvar/septest.hpp"

#include <cmath>
#include <numeric>

namespace sepvar {

int JordanSpec::dim() const {
    return std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
}

TensorField JordanSpec::to_tensor(const Chart& chart) const {
    if (chart.dim != dim()) throw std::invalid_argument("JordanSpec: chart dim mismatch");
    TensorField K = TensorField::zero(chart, 1, false);
    int offset = 0;
    for (std::size_t s = 0; s < block_sizes.size(); ++s) {
        const int m = block_sizes[s];
        for (int r = 0; r < m; ++r) {
            K.set(offset + r, offset + r, eigenvalues[s]);
            if (r + 1 < m) K.set(offset + r, offset + r + 1, Expr(Rational(1)));
        }
        offset += m;
    }
    return K;
}

namespace {

Verdict verdict_from_zero(ZeroVerdict zv) {
    Verdict v;
    v.outcome = zv.is_zero() ? QOutcome::Pass : QOutcome::Fail;
    v.zero = std::move(zv);
    return v;
}

Verdict zero_test_verdict(std::span<const Expr> es, const SamplingPlan& plan,
                          const std::string& what) {
    Verdict v;
    try {
        v = verdict_from_zero(is_identically_zero_all(es, plan));
        v.detail = what;
    } catch (const std::exception& ex) {
        v.outcome = QOutcome::Indeterminate;
        v.detail = what + ": " + ex.what();
    }
    return v;
}

/// Weak-nonlinearity covector sum_m grad(sigma_m) K^{n-m}, entrywise.
std::vector<Expr> weak_nonlinearity_covector(const TensorField& K) {
    const int n = K.dim();
    CharCoeffs cc = char_coeffs(K);
    std::vector<Expr> total(n, Expr(Rational(0)));
    for (int m = 1; m <= n; ++m) {
        CovectorField row = gradient_row(cc.sigma[m - 1], K.chart());
        CovectorField applied = row;
        if (n - m > 0) applied = covector_apply(row, matrix_power(K, n - m));
        for (int j = 0; j < n; ++j) total[j] = total[j] + applied.comps[j];
    }
    return total;
}

}  // namespace

Verdict q1_distinct_eigenvalues(const TensorField& K, const SamplingPlan& plan) {
    Verdict v;
    try {
        plan.validate();
        Expr disc = discriminant(K);
        const bool exact = disc.is_rational_expr();
        int total_draws = 0, degenerate_draws = 0;
        std::optional<std::pair<Point, double>> near_witness;

        for (int trial = 0; trial < plan.trials; ++trial) {
            PointSampler sampler(plan, trial);
            bool good = false;
            for (int attempt = 0; attempt <= plan.resample_cap && !good; ++attempt) {
                Point p = exact ? Point::rational(sampler.draw_rational())
                                : Point::real(sampler.draw_double());
                ++total_draws;
                double mag;
                try {
                    mag = std::abs(evaluate(disc, p).as_double());
                } catch (const EvalError&) {
                    continue;
                }
                if (mag <= plan.abs_tol) {
                    ++degenerate_draws;
                    near_witness = {p, mag};
                    continue;
                }
                good = true;
            }
            if (!good) {
                v.outcome = QOutcome::Fail;
                v.detail =
                    "fail (degenerate on box): discriminant within tolerance of zero on all "
                    "resamples";
                if (near_witness) v.zero.witness = near_witness;
                v.zero.status = ZeroStatus::ZeroWithinTolerance;
                v.zero.samples_used = total_draws;
                return v;
            }
        }
        v.zero.samples_used = total_draws;
        if (2 * degenerate_draws > total_draws) {
            v.outcome = QOutcome::Fail;
            v.detail = "fail (degenerate on box): discriminant near zero on most draws";
            v.zero.status = ZeroStatus::ZeroWithinTolerance;
            if (near_witness) v.zero.witness = near_witness;
            return v;
        }
        v.outcome = QOutcome::Pass;
        v.zero.status = ZeroStatus::Nonzero;  // discriminant bounded away from zero
        if (degenerate_draws > 0)
            v.warnings.push_back("box may straddle the eigenvalue-collision set (" +
                                 std::to_string(degenerate_draws) + " near-zero draws resampled)");
    } catch (const std::exception& ex) {
        v.outcome = QOutcome::Indeterminate;
        v.detail = ex.what();
    }
    return v;
}

Verdict q2_haantjes(const TensorField& K, const SamplingPlan& plan) {
    TensorField H = haantjes_torsion(K);
    return zero_test_verdict(H.stored(), plan, "Haantjes torsion components");
}

Verdict q3_weakly_nonlinear(const TensorField& K, const SamplingPlan& plan) {
    auto covector = weak_nonlinearity_covector(K);
    return zero_test_verdict(covector, plan, "weak-nonlinearity covector entries");
}

namespace {

TensorField scale_components(TensorField t, const Rational& factor) {
    const Expr f((Rational(factor)));
    TensorField out = t;
    // rebuild stored slots scaled
    std::vector<Expr> scaled;
    scaled.reserve(t.stored().size());
    for (const auto& e : t.stored()) scaled.push_back(f * e);
    // write back through the flat layout
    // (TensorField has no flat setter; rebuild via set on increasing indices)
    const int n = t.dim();
    if (t.valence() == 3 && t.skew_storage()) {
        int idx = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    for (int l = k + 1; l < n; ++l) out.set(i, j, k, l, scaled[idx++]);
        return out;
    }
    throw std::logic_error("scale_components: unsupported layout");
}

}  // namespace

SharipovChain sharipov_chain(const TensorField& A) {
    if (A.valence() != 1) throw std::invalid_argument("sharipov_chain: (1,1) tensor required");
    const int n = A.dim();
    const Chart& chart = A.chart();

    TensorField N = nijenhuis_torsion(A);
    TensorField A2 = matrix_power(A, 2);
    TensorField Kc = scale_components(nijenhuis_bracket(N, A2), Rational(3));

    TensorField M = TensorField::zero(chart, 3, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Expr acc(Rational(0));
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b) {
                            acc = acc + N.at(i, j, b) * A.at(b, a) * N.at(a, k, l);   // N(X, A N(Y,Z))
                            acc = acc + N.at(i, a, b) * A.at(a, j) * N.at(b, k, l);   // N(AX, N(Y,Z))
                            acc = acc - N.at(i, a, b) * N.at(a, j, l) * A.at(b, k);   // -N(N(X,Z), AY)
                            acc = acc + N.at(i, a, b) * N.at(a, j, k) * A.at(b, l);   // +N(N(X,Y), AZ)
                            acc = acc - N.at(i, j, b) * N.at(b, a, l) * A.at(a, k);   // -N(X, N(AY,Z))
                            acc = acc - N.at(i, j, b) * N.at(b, k, a) * A.at(a, l);   // -N(X, N(Y,AZ))
                        }
                    M.set(i, j, k, l, acc);
                }

    TensorField Q = TensorField::zero(chart, 3, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Expr acc(Rational(0));
                    for (int a = 0; a < n; ++a) {
                        for (int b = 0; b < n; ++b) {
                            acc = acc + Kc.at(i, a, b, l) * A.at(a, j) * A.at(b, k);  // K(AX,AY,Z)
                            acc = acc - Kc.at(i, j, a, b) * A.at(a, k) * A.at(b, l);  // -K(X,AY,AZ)
                            acc = acc + Kc.at(i, a, k, b) * A.at(a, j) * A.at(b, l);  // +K(AX,Y,AZ)
                        }
                        acc = acc - Kc.at(i, a, k, l) * A2.at(a, j);                  // -K(A^2 X,Y,Z)
                        acc = acc + Expr(Rational(4)) * M.at(i, a, k, l) * A.at(a, j);
                        acc = acc - Expr(Rational(2)) * M.at(i, j, a, l) * A.at(a, k);
                        acc = acc - Expr(Rational(2)) * M.at(i, j, k, a) * A.at(a, l);
                    }
                    Q.set(i, j, k, l, acc);
                }

    TensorField P = TensorField::zero(chart, 3, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Expr acc(Rational(0));
                    for (int s = 0; s < n; ++s) {
                        for (int a = 0; a < n; ++a) {
                            acc = acc + A.at(i, s) * Q.at(s, j, a, l) * A.at(a, k);  // A Q(X,AY,Z)
                            acc = acc + A.at(i, s) * Q.at(s, j, k, a) * A.at(a, l);  // A Q(X,Y,AZ)
                            acc = acc - Q.at(i, j, s, a) * A.at(s, k) * A.at(a, l);  // -Q(X,AY,AZ)
                        }
                        acc = acc - A2.at(i, s) * Q.at(s, j, k, l);                  // -A^2 Q(X,Y,Z)
                    }
                    P.set(i, j, k, l, acc);
                }

    return SharipovChain{std::move(Kc), std::move(M), std::move(Q), std::move(P)};
}

Verdict q4_semihamiltonian(const TensorField& K, const SamplingPlan& plan) {
    SharipovChain chain = sharipov_chain(K);
    return zero_test_verdict(chain.P.stored(), plan, "Sharipov P components");
}

TestReport run_all(const TensorField& K, const SamplingPlan& plan, bool short_circuit) {
    TestReport rep;
    rep.seed = plan.seed;
    rep.trials = plan.trials;
    rep.box = plan.box;
    rep.notes.push_back(
        "probabilistic identity testing: verdicts hold at sampled generic points of the box; "
        "singular (non-algebraically-generic) points are not distinguished");

    rep.q1 = q1_distinct_eigenvalues(K, plan);
    bool stop = short_circuit && !rep.q1.passed();

    auto skipped = [] {
        Verdict v;
        v.outcome = QOutcome::Indeterminate;
        v.detail = "skipped (short-circuit)";
        return v;
    };

    rep.q2 = stop ? skipped() : q2_haantjes(K, plan);
    stop = stop || (short_circuit && !rep.q2.passed());
    rep.q3 = stop ? skipped() : q3_weakly_nonlinear(K, plan);
    stop = stop || (short_circuit && !rep.q3.passed());
    rep.q4 = stop ? skipped() : q4_semihamiltonian(K, plan);

    if (!rep.q1.passed()) {
        rep.q3.warnings.push_back(
            "gl-regularity warning: Q1 failed, so the Q3 criterion may not detect "
            "weak-nonlinearity violations (gl-regularity is a hypothesis of the criterion)");
        rep.q4.warnings.push_back("Q4 hypothesis (distinct eigenvalues) not established: Q1 failed");
    }
    if (!rep.q2.passed())
        rep.q4.warnings.push_back("Q4 hypothesis (vanishing Haantjes torsion) not established");

    rep.overall = rep.q1.passed() && rep.q2.passed() && rep.q3.passed() && rep.q4.passed();
    return rep;
}

std::vector<TsarevEntry> oracle_tsarev(const std::vector<Expr>& K_diag, const Chart& chart,
                                       const SamplingPlan& plan) {
    const int n = chart.dim;
    if (static_cast<int>(K_diag.size()) != n)
        throw std::invalid_argument("oracle_tsarev: diagonal entry count mismatch");
    std::vector<TsarevEntry> table;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (i == j || j == k || i == k) continue;
                Expr lhs = differentiate(differentiate(K_diag[i], j) / (K_diag[j] - K_diag[i]), k);
                Expr rhs = differentiate(differentiate(K_diag[i], k) / (K_diag[k] - K_diag[i]), j);
                TsarevEntry entry{i, j, k, lhs - rhs, {}};
                entry.verdict = is_identically_zero(entry.residual, plan);
                table.push_back(std::move(entry));
            }
    return table;
}

std::vector<SelfDerivativeEntry> oracle_weak_nonlinearity_diag(const std::vector<Expr>& K_diag,
                                                               const Chart& chart,
                                                               const SamplingPlan& plan) {
    const int n = chart.dim;
    if (static_cast<int>(K_diag.size()) != n)
        throw std::invalid_argument("oracle: diagonal entry count mismatch");
    std::vector<SelfDerivativeEntry> out;
    for (int i = 0; i < n; ++i) {
        SelfDerivativeEntry e{i, differentiate(K_diag[i], i), {}};
        e.verdict = is_identically_zero(e.residual, plan);
        out.push_back(std::move(e));
    }
    return out;
}

Lemma1Result oracle_lemma1(const JordanSpec& spec, const Chart& chart, const Point& point) {
    const int n = spec.dim();
    const int k = static_cast<int>(spec.block_sizes.size());

    // eigenvalues must be pairwise distinct at the point
    std::vector<double> lambda_vals;
    for (const auto& lam : spec.eigenvalues) lambda_vals.push_back(evaluate(lam, point).as_double());
    for (int s = 0; s < k; ++s)
        for (int r = s + 1; r < k; ++r)
            if (lambda_vals[s] == lambda_vals[r])
                throw std::invalid_argument("oracle_lemma1: eigenvalue collision at point");

    TensorField K = spec.to_tensor(chart);
    Lemma1Result res;
    for (const auto& c : weak_nonlinearity_covector(K))
        res.computed.push_back(evaluate(c, point).as_double());

    res.expected.assign(n, 0.0);
    int offset = 0;
    for (int s = 0; s < k; ++s) {
        const int m = spec.block_sizes[s];
        double dl = evaluate(differentiate(spec.eigenvalues[s], offset), point).as_double();
        double prod = 1.0;
        for (int r = 0; r < k; ++r) {
            if (r == s) continue;
            prod *= std::pow(lambda_vals[s] - lambda_vals[r], spec.block_sizes[r]);
        }
        res.expected[offset + m - 1] = m * dl * prod;
        offset += m;
    }
    return res;
}

}  // namespace sepvar
