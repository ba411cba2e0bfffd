#include "test_util.hpp"

#include "sepvar/septest.hpp"

#include <doctest.h>

#include <cmath>

using namespace sepvar;
using testutil::eval_d;
using testutil::plan_box;
using testutil::random_point;
using testutil::random_quadratic;
using testutil::random_separated_diagonal;
using testutil::random_triangular_diffeo;
using testutil::unit_plan;

namespace {
const Chart chart2 = Chart::standard(2);
const Chart chart3 = Chart::standard(3);

TensorField companion3() {
    return TensorField::matrix(
        chart3, {{Expr(0), Expr(1), Expr(0)},
                 {Expr(0), Expr(0), Expr(1)},
                 {parse("x1+x2+x3", chart3), Expr(2), Expr(1)}});
}

/// Quadratic with small integer coefficients over a chosen variable subset.
Expr quadratic_over(std::mt19937_64& rng, const std::vector<int>& vars) {
    std::uniform_int_distribution<int> coef(-2, 2);
    Expr e(Rational(coef(rng)));
    for (std::size_t a = 0; a < vars.size(); ++a) {
        e = e + Expr(Rational(coef(rng))) * Expr::variable(vars[a]);
        for (std::size_t b = a; b < vars.size(); ++b)
            e = e + Expr(Rational(coef(rng))) * Expr::variable(vars[a]) * Expr::variable(vars[b]);
    }
    return e;
}

bool all_zero(const std::vector<TsarevEntry>& t) {
    for (const auto& e : t)
        if (!e.verdict.is_zero()) return false;
    return true;
}

bool all_zero(const std::vector<SelfDerivativeEntry>& t) {
    for (const auto& e : t)
        if (!e.verdict.is_zero()) return false;
    return true;
}
}  // namespace

TEST_CASE("q1: diagonal with separated boxes passes") {
    TensorField K = TensorField::diagonal(chart2, {parse("x2", chart2), parse("x1", chart2)});
    auto v = q1_distinct_eigenvalues(K, plan_box({{1, 2}, {3, 4}}));
    CHECK(v.outcome == QOutcome::Pass);
    CHECK(v.warnings.empty());
}

TEST_CASE("q1: Jordan block fails with identically zero discriminant") {
    TensorField J = TensorField::matrix(
        chart2, {{parse("x1", chart2), Expr(1)}, {Expr(0), parse("x1", chart2)}});
    auto v = q1_distinct_eigenvalues(J, unit_plan(2));
    CHECK(v.outcome == QOutcome::Fail);
    CHECK(v.detail.find("degenerate") != std::string::npos);
}

TEST_CASE("q1: box touching the collision set is deterministic per seed") {
    TensorField K = TensorField::diagonal(chart2, {parse("x1", chart2), parse("x2", chart2)});
    auto v1 = q1_distinct_eigenvalues(K, unit_plan(2, 5));
    auto v2 = q1_distinct_eigenvalues(K, unit_plan(2, 5));
    CHECK(v1.outcome == v2.outcome);
    CHECK(v1.outcome != QOutcome::Indeterminate);
    CHECK(v1.warnings.size() == v2.warnings.size());
}

TEST_CASE("q2: diagonal and constant pass, companion form fails with witness") {
    TensorField D = TensorField::diagonal(
        chart3, {parse("x1*x2", chart3), parse("x2+x3", chart3), parse("x3^2", chart3)});
    CHECK(q2_haantjes(D, unit_plan(3)).outcome == QOutcome::Pass);

    TensorField C = TensorField::matrix(chart2, {{Expr(1), Expr(2)}, {Expr(3), Expr(4)}});
    CHECK(q2_haantjes(C, unit_plan(2)).outcome == QOutcome::Pass);

    auto v = q2_haantjes(companion3(), unit_plan(3));
    CHECK(v.outcome == QOutcome::Fail);
    CHECK(v.zero.witness.has_value());
}

TEST_CASE("q3: diag(x2,x1) passes exactly, diag(x1,x2) fails, constants pass") {
    TensorField good = TensorField::diagonal(chart2, {parse("x2", chart2), parse("x1", chart2)});
    auto vg = q3_weakly_nonlinear(good, plan_box({{1, 2}, {3, 4}}));
    CHECK(vg.outcome == QOutcome::Pass);
    CHECK(vg.zero.status == ZeroStatus::IdenticallyZeroExact);

    TensorField bad = TensorField::diagonal(chart2, {parse("x1", chart2), parse("x2", chart2)});
    CHECK(q3_weakly_nonlinear(bad, plan_box({{1, 2}, {3, 4}})).outcome == QOutcome::Fail);

    TensorField c = TensorField::diagonal(chart2, {Expr(2), Expr(7)});
    CHECK(q3_weakly_nonlinear(c, unit_plan(2)).outcome == QOutcome::Pass);
}

TEST_CASE("sharipov_chain: constant tensor gives four zero tensors") {
    TensorField A = TensorField::matrix(chart2, {{Expr(2), Expr(1)}, {Expr(0), Expr(5)}});
    SharipovChain ch = sharipov_chain(A);
    for (const TensorField* t : {&ch.Kc, &ch.M, &ch.Q, &ch.P})
        for (const auto& c : t->stored()) CHECK(c.is_zero());
}

TEST_CASE("sharipov_chain: P vanishes for n=2 diagonal with distinct eigenvalues") {
    // Tsarev's condition needs three distinct indices, so it is vacuous here.
    TensorField A = TensorField::diagonal(
        chart2, {parse("x1*x2 + 10", chart2), parse("x2^2", chart2)});
    SharipovChain ch = sharipov_chain(A);
    CHECK(is_identically_zero_all(ch.P.stored(), unit_plan(2)).is_zero());
}

TEST_CASE("sharipov_chain: P vanishes for the n=3 cross-sum pattern") {
    TensorField A = TensorField::diagonal(
        chart3, {parse("x2 + x3", chart3), parse("x1 + x3", chart3), parse("x1 + x2", chart3)});
    SharipovChain ch = sharipov_chain(A);
    SamplingPlan plan = plan_box({{1, 2}, {3, 4}, {5, 6}});
    CHECK(is_identically_zero_all(ch.P.stored(), plan).is_zero());

    auto t = oracle_tsarev({parse("x2 + x3", chart3), parse("x1 + x3", chart3),
                            parse("x1 + x2", chart3)},
                           chart3, plan);
    CHECK(all_zero(t));
}

TEST_CASE("q4: constant passes, n=2 diagonal passes, Tsarev violation fails") {
    TensorField c = TensorField::diagonal(chart3, {Expr(1), Expr(2), Expr(3)});
    CHECK(q4_semihamiltonian(c, unit_plan(3)).outcome == QOutcome::Pass);

    TensorField d2 = TensorField::diagonal(chart2, {parse("x2", chart2), parse("x1", chart2)});
    CHECK(q4_semihamiltonian(d2, plan_box({{1, 2}, {3, 4}})).outcome == QOutcome::Pass);

    std::vector<Expr> Kd{parse("x2 + x3^2 * x2", chart3), parse("x3", chart3),
                         parse("x1", chart3)};
    SamplingPlan plan = plan_box({{1, 2}, {3, 4}, {5, 6}});
    TensorField bad = TensorField::diagonal(chart3, Kd);
    auto v = q4_semihamiltonian(bad, plan);
    CHECK(v.outcome == QOutcome::Fail);
    REQUIRE(v.zero.witness.has_value());

    // the Tsarev oracle confirms a nonzero residual at the q4 witness point
    auto table = oracle_tsarev(Kd, chart3, plan);
    std::vector<double> w;
    for (const auto& c0 : v.zero.witness->first.coords) w.push_back(c0.as_double());
    double worst = 0;
    for (const auto& e : table) worst = std::max(worst, std::abs(eval_d(e.residual, w)));
    CHECK(worst > 1e-9);
    CHECK(!all_zero(table));
}

TEST_CASE("run_all: overall verdicts for the three reference tensors") {
    SamplingPlan plan = plan_box({{1, 2}, {3, 4}});
    TensorField good = TensorField::diagonal(chart2, {parse("x2", chart2), parse("x1", chart2)});
    TestReport r = run_all(good, plan);
    CHECK(r.overall);
    CHECK(r.q1.passed());
    CHECK(r.q2.passed());
    CHECK(r.q3.passed());
    CHECK(r.q4.passed());
    CHECK(!r.notes.empty());  // probabilistic-semantics note

    TensorField bad = TensorField::diagonal(chart2, {parse("x1", chart2), parse("x2", chart2)});
    TestReport rb = run_all(bad, plan);
    CHECK(!rb.overall);
    CHECK(rb.q1.passed());
    CHECK(rb.q2.passed());
    CHECK(!rb.q3.passed());
    CHECK(rb.q4.passed());

    TensorField J = TensorField::matrix(
        chart3, {{parse("x3", chart3), Expr(1), Expr(0)},
                 {Expr(0), parse("x3", chart3), Expr(0)},
                 {Expr(0), Expr(0), parse("x1", chart3)}});
    TestReport rj = run_all(J, unit_plan(3));
    CHECK(!rj.overall);
    CHECK(!rj.q1.passed());
    CHECK(!rj.q3.warnings.empty());  // gl-regularity warning rides along
}

TEST_CASE("oracle_tsarev: vacuous in n=2") {
    auto t = oracle_tsarev({parse("x2", chart2), parse("x1", chart2)}, chart2, unit_plan(2));
    CHECK(t.empty());
}

TEST_CASE("oracle_tsarev: generic n=3 example has a nonzero residual") {
    SamplingPlan plan = plan_box({{1, 2}, {3, 4}, {5, 6}});
    auto t = oracle_tsarev({parse("x2 + x3^2 * x2", chart3), parse("x3", chart3),
                            parse("x1", chart3)},
                           chart3, plan);
    CHECK(t.size() == 6);  // ordered triples of distinct indices
    CHECK(!all_zero(t));
}

TEST_CASE("oracle_weak_nonlinearity_diag examples") {
    auto a = oracle_weak_nonlinearity_diag({parse("x2", chart2), parse("x1", chart2)}, chart2,
                                           unit_plan(2));
    CHECK(all_zero(a));

    auto b = oracle_weak_nonlinearity_diag({parse("x1", chart2), parse("x2", chart2)}, chart2,
                                           unit_plan(2));
    CHECK(!b[0].verdict.is_zero());
    CHECK(!b[1].verdict.is_zero());
    CHECK(b[0].residual.is_one());

    auto c = oracle_weak_nonlinearity_diag({parse("x2 + x3", chart3), parse("x1 + x3", chart3),
                                            parse("x1 + x2", chart3)},
                                           chart3, unit_plan(3));
    CHECK(all_zero(c));
}

TEST_CASE("oracle_lemma1: spec reference points") {
    // blocks (2,1), lambda_1 = x2, lambda_2 = x1 at (1,5,0): both derivatives vanish
    JordanSpec s1{{2, 1}, {parse("x2", chart3), parse("x1", chart3)}};
    auto r1 = oracle_lemma1(s1, chart3, Point::real({1, 5, 0}));
    for (int i = 0; i < 3; ++i) {
        CHECK(r1.expected[i] == doctest::Approx(0.0));
        CHECK(r1.computed[i] == doctest::Approx(0.0));
    }

    // blocks (2,1), lambda_1 = x1, lambda_2 = x3 at (2,0,7): expected (0, -10, 25)
    JordanSpec s2{{2, 1}, {parse("x1", chart3), parse("x3", chart3)}};
    auto r2 = oracle_lemma1(s2, chart3, Point::real({2, 0, 7}));
    CHECK(r2.expected[0] == doctest::Approx(0.0));
    CHECK(r2.expected[1] == doctest::Approx(-10.0));
    CHECK(r2.expected[2] == doctest::Approx(25.0));
    for (int i = 0; i < 3; ++i) CHECK(r2.computed[i] == doctest::Approx(r2.expected[i]));

    // constant eigenvalues: everything zero
    JordanSpec s3{{3}, {Expr(4)}};
    auto r3 = oracle_lemma1(s3, chart3, Point::real({1, 1, 1}));
    for (int i = 0; i < 3; ++i) {
        CHECK(r3.expected[i] == doctest::Approx(0.0));
        CHECK(r3.computed[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("oracle_lemma1: closed form matches Eq.(7) covector at random points") {
    std::mt19937_64 rng(31);
    std::vector<std::vector<int>> patterns{{3}, {2, 1}, {1, 1, 1}};
    for (const auto& blocks : patterns) {
        for (int iter = 0; iter < 10; ++iter) {
            JordanSpec spec;
            spec.block_sizes = blocks;
            for (std::size_t s = 0; s < blocks.size(); ++s)
                spec.eigenvalues.push_back(Expr(Rational(10 * (static_cast<int>(s) + 1))) +
                                           random_quadratic(rng, 3));
            auto p = random_point(rng, 3);
            auto r = oracle_lemma1(spec, chart3, Point::real(p));
            for (int i = 0; i < 3; ++i) {
                double scale = std::max(1.0, std::abs(r.expected[i]));
                CHECK(std::abs(r.computed[i] - r.expected[i]) / scale < 1e-9);
            }
        }
    }
}

TEST_CASE("Theorem 3 equivalence on random diagonal tensors") {
    std::mt19937_64 rng(32);
    for (int n : {2, 3}) {
        Chart chart = Chart::standard(n);
        auto plan = unit_plan(n, 9, 16);
        for (int iter = 0; iter < 10; ++iter) {
            std::vector<Expr> diag;
            bool want_pass = (iter % 2 == 0);
            for (int i = 0; i < n; ++i) {
                std::vector<int> others;
                for (int j = 0; j < n; ++j)
                    if (j != i) others.push_back(j);
                Expr e = Expr(Rational(100 * (i + 1))) + quadratic_over(rng, others);
                if (!want_pass && i == 0) e = e + Expr::variable(0);
                diag.push_back(e);
            }
            TensorField K = TensorField::diagonal(chart, diag);
            bool q3pass = q3_weakly_nonlinear(K, plan).passed();
            bool oracle_pass = all_zero(oracle_weak_nonlinearity_diag(diag, chart, plan));
            CHECK(q3pass == oracle_pass);
            CHECK(q3pass == want_pass);
        }
    }
}

TEST_CASE("Theorem 4 equivalence on random diagonal 3x3 tensors") {
    std::mt19937_64 rng(33);
    auto plan = unit_plan(3, 13, 8);
    std::uniform_int_distribution<int> cst(1, 9);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<Expr> diag;
        switch (iter % 4) {
            case 0:  // distinct constants
                diag = {Expr(cst(rng)), Expr(Rational(cst(rng)) + 10), Expr(Rational(cst(rng)) + 20)};
                break;
            case 1:  // cross-sum pattern, semi-Hamiltonian
                diag = {Expr(Rational(cst(rng))) + parse("x2 + x3", chart3),
                        Expr(Rational(cst(rng)) + 10) + parse("x1 + x3", chart3),
                        Expr(Rational(cst(rng)) + 20) + parse("x1 + x2", chart3)};
                break;
            case 2:  // permutation-with-constant pattern, semi-Hamiltonian
                diag = {parse("x2", chart3), Expr(Rational(cst(rng)) + 10) + parse("x1", chart3),
                        Expr(Rational(cst(rng)) + 20)};
                break;
            default:  // generic quadratics, typically violating Eq. (6)
                diag = random_separated_diagonal(rng, 3);
                break;
        }
        TensorField K = TensorField::diagonal(chart3, diag);
        bool q4pass = q4_semihamiltonian(K, plan).passed();
        bool tsarev_pass = all_zero(oracle_tsarev(diag, chart3, plan));
        CHECK(q4pass == tsarev_pass);
        if (iter % 4 != 3) CHECK(q4pass);
    }
}

TEST_CASE("verdicts are invariant under pushforward by a polynomial diffeo") {
    std::mt19937_64 rng(34);
    auto plan = unit_plan(2, 17, 8);
    for (int iter = 0; iter < 5; ++iter) {
        std::vector<Expr> diag;
        if (iter % 2 == 0) {
            // weakly nonlinear: each entry depends only on the other coordinate
            diag = {Expr(Rational(100)) + quadratic_over(rng, {1}),
                    Expr(Rational(200)) + quadratic_over(rng, {0})};
        } else {
            // q3-violating: first entry depends on its own coordinate
            diag = {Expr(Rational(100)) + Expr::variable(0) + quadratic_over(rng, {1}),
                    Expr(Rational(200)) + quadratic_over(rng, {0})};
        }
        TensorField K = TensorField::diagonal(chart2, diag);
        Diffeo phi = random_triangular_diffeo(rng, chart2);
        TestReport a = run_all(K, plan);
        TestReport b = run_all(pushforward(K, phi), plan);
        CHECK(a.q1.passed() == b.q1.passed());
        CHECK(a.q2.passed() == b.q2.passed());
        CHECK(a.q3.passed() == b.q3.passed());
        CHECK(a.q4.passed() == b.q4.passed());
        CHECK(a.q3.passed() == (iter % 2 == 0));
    }
}

TEST_CASE("gl-regularity boundary: Eq.(7) passes on lambda*Id while the oracle flags it") {
    Expr lam = parse("x1 + x2", chart2);
    TensorField K = TensorField::diagonal(chart2, {lam, lam});
    auto plan = unit_plan(2);
    CHECK(q3_weakly_nonlinear(K, plan).passed());
    auto oracle = oracle_weak_nonlinearity_diag({lam, lam}, chart2, plan);
    CHECK(!all_zero(oracle));

    TestReport r = run_all(K, plan);
    CHECK(!r.q1.passed());
    bool has_glreg = false;
    for (const auto& w : r.q3.warnings)
        if (w.find("gl-regularity") != std::string::npos) has_glreg = true;
    CHECK(has_glreg);
}
