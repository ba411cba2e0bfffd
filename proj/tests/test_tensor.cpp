#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sepvar;
using testutil::eval_d;
using testutil::random_matrix_tensor;
using testutil::random_point;
using testutil::random_triangular_diffeo;
using testutil::unit_plan;

namespace {
const Chart chart2 = Chart::standard(2);
const Chart chart3 = Chart::standard(3);

TensorField diag_x2_x1() {
    return TensorField::diagonal(chart2, {parse("x2", chart2), parse("x1", chart2)});
}

/// Classical Nijenhuis component formula, used as an independent oracle.
Expr classical_nijenhuis(const TensorField& A, int i, int j, int k) {
    const int n = A.dim();
    Expr acc(Rational(0));
    for (int s = 0; s < n; ++s) {
        acc = acc + A.at(s, j) * differentiate(A.at(i, k), s);
        acc = acc - A.at(s, k) * differentiate(A.at(i, j), s);
        acc = acc - A.at(i, s) * (differentiate(A.at(s, k), j) - differentiate(A.at(s, j), k));
    }
    return acc;
}
}  // namespace

TEST_CASE("matrix_power: diagonal square, identity, and companion square") {
    TensorField A = diag_x2_x1();
    TensorField A2 = matrix_power(A, 2);
    std::vector<Expr> sq{A2.at(0, 0) - parse("x2^2", chart2),
                         A2.at(1, 1) - parse("x1^2", chart2)};
    CHECK(is_identically_zero_all(sq, unit_plan(2)).is_zero());
    CHECK(A2.at(0, 1).is_zero());

    TensorField A0 = matrix_power(A, 0);
    CHECK(A0.at(0, 0).is_one());
    CHECK(A0.at(0, 1).is_zero());

    TensorField B = TensorField::matrix(
        chart2, {{Expr(0), Expr(1)}, {parse("x1", chart2), Expr(0)}});
    TensorField B2 = matrix_power(B, 2);
    std::vector<double> p{1.7, 0.4};
    CHECK(eval_d(B2.at(0, 0), p) == doctest::Approx(1.7));
    CHECK(eval_d(B2.at(1, 1), p) == doctest::Approx(1.7));
    CHECK(B2.at(0, 1).is_zero());
    CHECK(B2.at(1, 0).is_zero());
}

TEST_CASE("nijenhuis_bracket: [Id, Id] = 0") {
    TensorField id = TensorField::identity(chart2);
    TensorField b = nijenhuis_bracket(id, id);
    for (const auto& c : b.stored()) CHECK(c.is_zero());
}

TEST_CASE("nijenhuis_bracket: diagonal q=r=1 components") {
    // [A,A]^1_{12} = (A_1 - A_2) dA_1/dx2 and [A,A]^2_{12} = (A_1 - A_2) dA_2/dx1
    Expr a1 = parse("x1*x2 + x2^2", chart2);
    Expr a2 = parse("x1 - 3*x2", chart2);
    TensorField A = TensorField::diagonal(chart2, {a1, a2});
    TensorField N = nijenhuis_bracket(A, A);
    Expr expected1 = (a1 - a2) * differentiate(a1, 1);
    Expr expected2 = (a1 - a2) * differentiate(a2, 0);
    auto plan = unit_plan(2);
    CHECK(is_identically_zero(N.at(0, 0, 1) - expected1, plan).is_zero());
    CHECK(is_identically_zero(N.at(1, 0, 1) - expected2, plan).is_zero());
}

TEST_CASE("nijenhuis_bracket: [N, A^2] vanishes for constant A") {
    TensorField A = TensorField::matrix(chart2, {{Expr(2), Expr(1)}, {Expr(0), Expr(5)}});
    TensorField N = nijenhuis_torsion(A);
    for (const auto& c : N.stored()) CHECK(c.is_zero());
    TensorField b = nijenhuis_bracket(N, matrix_power(A, 2));
    for (const auto& c : b.stored()) CHECK(c.is_zero());
}

TEST_CASE("nijenhuis_torsion examples") {
    TensorField C = TensorField::matrix(chart2, {{Expr(1), Expr(2)}, {Expr(3), Expr(4)}});
    for (const auto& c : nijenhuis_torsion(C).stored()) CHECK(c.is_zero());

    TensorField A = diag_x2_x1();
    TensorField N = nijenhuis_torsion(A);
    // N^1_{12} = x2 - x1
    CHECK(is_identically_zero(N.at(0, 0, 1) - parse("x2 - x1", chart2), unit_plan(2)).is_zero());

    // lower-triangular with all components functions of x1 only:
    // only N^2_{12} = 3*x1^2 - 9*x1 survives
    TensorField L = TensorField::matrix(
        chart2, {{parse("x1^2", chart2), Expr(0)}, {parse("x1", chart2), parse("3*x1", chart2)}});
    TensorField NL = nijenhuis_torsion(L);
    CHECK(NL.at(0, 0, 1).is_zero());
    CHECK(is_identically_zero(NL.at(1, 0, 1) - parse("3*x1^2 - 9*x1", chart2), unit_plan(2))
              .is_zero());
}

TEST_CASE("haantjes_torsion: diagonal and constant tensors vanish, companion form does not") {
    TensorField D = TensorField::diagonal(
        chart3, {parse("x1*x2", chart3), parse("x2+x3^2", chart3), parse("x1-x3", chart3)});
    auto v = is_identically_zero_all(haantjes_torsion(D).stored(), unit_plan(3));
    CHECK(v.status == ZeroStatus::IdenticallyZeroExact);

    TensorField C = TensorField::matrix(chart2, {{Expr(1), Expr(2)}, {Expr(3), Expr(4)}});
    for (const auto& c : haantjes_torsion(C).stored()) CHECK(c.is_zero());

    TensorField comp = TensorField::matrix(
        chart3, {{Expr(0), Expr(1), Expr(0)},
                 {Expr(0), Expr(0), Expr(1)},
                 {parse("x1+x2+x3", chart3), Expr(2), Expr(1)}});
    auto w = is_identically_zero_all(haantjes_torsion(comp).stored(), unit_plan(3));
    CHECK(w.status == ZeroStatus::Nonzero);
    CHECK(w.witness.has_value());
}

TEST_CASE("char_coeffs: trace/determinant convention") {
    TensorField A = TensorField::diagonal(chart2, {Expr(1), Expr(2)});
    CharCoeffs cc = char_coeffs(A);
    CHECK(cc.sigma[0].const_value() == 3);
    CHECK(cc.sigma[1].const_value() == -2);

    CharCoeffs cd = char_coeffs(diag_x2_x1());
    auto plan = unit_plan(2);
    CHECK(is_identically_zero(cd.sigma[0] - parse("x1+x2", chart2), plan).is_zero());
    CHECK(is_identically_zero(cd.sigma[1] + parse("x1*x2", chart2), plan).is_zero());

    // Jordan block J_2(lambda) with lambda = x1
    TensorField J = TensorField::matrix(
        chart2, {{parse("x1", chart2), Expr(1)}, {Expr(0), parse("x1", chart2)}});
    CharCoeffs cj = char_coeffs(J);
    CHECK(is_identically_zero(cj.sigma[0] - parse("2*x1", chart2), plan).is_zero());
    CHECK(is_identically_zero(cj.sigma[1] + parse("x1^2", chart2), plan).is_zero());
}

TEST_CASE("discriminant: distinct constants, Jordan block, 3x3 value") {
    TensorField A = TensorField::diagonal(chart2, {Expr(1), Expr(2)});
    CHECK(discriminant(A).const_value() == 1);

    TensorField J = TensorField::matrix(
        chart2, {{parse("x1", chart2), Expr(1)}, {Expr(0), parse("x1", chart2)}});
    auto v = is_identically_zero(discriminant(J), unit_plan(2));
    CHECK(v.status == ZeroStatus::IdenticallyZeroExact);

    TensorField D = TensorField::diagonal(
        chart3, {parse("x1", chart3), parse("x2", chart3), parse("x3", chart3)});
    Value d = evaluate(discriminant(D), Point::rational({Rational(1), Rational(2), Rational(4)}));
    CHECK(d.exact);
    CHECK(d.q == 36);
}

TEST_CASE("discriminant equals the squared eigenvalue differences on constants") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 10; ++iter) {
        std::vector<Expr> diag;
        std::vector<Rational> vals;
        for (int i = 0; i < 3; ++i) {
            Rational v(static_cast<long>(rng() % 19) - 9, 1 + static_cast<long>(rng() % 3));
            vals.push_back(v);
            diag.push_back(Expr(v));
        }
        TensorField D = TensorField::diagonal(chart3, diag);
        Expr disc = discriminant(D);
        REQUIRE(disc.is_const());
        Rational expected(1);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) expected *= (vals[i] - vals[j]) * (vals[i] - vals[j]);
        CHECK(disc.const_value() == expected);
    }
}

TEST_CASE("gradient_row and covector_apply") {
    CovectorField g = gradient_row(parse("x1*x2", chart2), chart2);
    CHECK(g.comps[0].structurally_equal(parse("x2", chart2)));
    CHECK(g.comps[1].structurally_equal(parse("x1", chart2)));

    CovectorField zero = gradient_row(Expr(Rational(5)), chart2);
    CHECK(zero.comps[0].is_zero());
    CHECK(zero.comps[1].is_zero());

    CovectorField ones{chart2, {Expr(1), Expr(1)}};
    CovectorField applied = covector_apply(ones, diag_x2_x1());
    CHECK(applied.comps[0].structurally_equal(parse("x2", chart2)));
    CHECK(applied.comps[1].structurally_equal(parse("x1", chart2)));

    CovectorField zrow{chart2, {Expr(0), Expr(0)}};
    for (const auto& c : covector_apply(zrow, diag_x2_x1()).comps) CHECK(c.is_zero());

    CovectorField viaId = covector_apply(g, TensorField::identity(chart2));
    CHECK(is_identically_zero_all(
              {{viaId.comps[0] - g.comps[0], viaId.comps[1] - g.comps[1]}}, unit_plan(2))
              .is_zero());
}

TEST_CASE("pushforward: identity map, identity tensor, triangular example") {
    Diffeo idmap{chart2, chart2, {Expr::variable(0), Expr::variable(1)},
                 {Expr::variable(0), Expr::variable(1)}};
    TensorField A = diag_x2_x1();
    TensorField A_id = pushforward(A, idmap);
    auto plan = unit_plan(2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(is_identically_zero(A_id.at(i, j) - A.at(i, j), plan).is_zero());

    // y1 = x1, y2 = x2 + x1^2 with inverse x2 = y2 - y1^2
    Diffeo tri{chart2,
               chart2,
               {Expr::variable(0), Expr::variable(1) + Expr::variable(0).pow(2)},
               {Expr::variable(0), Expr::variable(1) - Expr::variable(0).pow(2)}};
    REQUIRE(tri.verify_roundtrip(plan));

    TensorField idT = TensorField::identity(chart2);
    TensorField idP = pushforward(idT, tri);
    CHECK(is_identically_zero(idP.at(0, 0) - Expr(1), plan).is_zero());
    CHECK(is_identically_zero(idP.at(0, 1), plan).is_zero());
    CHECK(is_identically_zero(idP.at(1, 0), plan).is_zero());
    CHECK(is_identically_zero(idP.at(1, 1) - Expr(1), plan).is_zero());

    TensorField Ap = pushforward(A, tri);
    CHECK(is_identically_zero(Ap.at(1, 0), plan).status == ZeroStatus::Nonzero);  // no longer diagonal

    // characteristic coefficients agree after substitution by the inverse map
    CharCoeffs orig = char_coeffs(A);
    CharCoeffs moved = char_coeffs(Ap);
    for (int m = 0; m < 2; ++m) {
        Expr composed = substitute(orig.sigma[m], std::span<const Expr>(tri.inverse));
        CHECK(is_identically_zero(moved.sigma[m] - composed, plan).is_zero());
    }
}

TEST_CASE("bracket consistency with the classical formula on random tensors") {
    std::mt19937_64 rng(21);
    for (int n : {2, 3}) {
        Chart chart = Chart::standard(n);
        auto plan = unit_plan(n, 5, 16);
        for (int iter = 0; iter < 10; ++iter) {
            TensorField A = random_matrix_tensor(rng, chart);
            TensorField N = nijenhuis_bracket(A, A);
            std::vector<Expr> residuals;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = j + 1; k < n; ++k)
                        residuals.push_back(N.at(i, j, k) - classical_nijenhuis(A, i, j, k));
            CHECK(is_identically_zero_all(residuals, plan).is_zero());
        }
    }
}

TEST_CASE("skew accessor agrees with brute-force dense storage in n=3") {
    std::mt19937_64 rng(22);
    TensorField A = random_matrix_tensor(rng, chart3);
    TensorField N = nijenhuis_torsion(A);
    auto plan = unit_plan(3, 6, 16);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                Expr dense = classical_nijenhuis(A, i, j, k);  // already skew in (j,k)
                CHECK(is_identically_zero(N.at(i, j, k) - dense, plan).is_zero());
            }
}

TEST_CASE("Cayley-Hamilton holds identically for random 2x2 and 3x3 tensors") {
    std::mt19937_64 rng(23);
    for (int n : {2, 3}) {
        Chart chart = Chart::standard(n);
        auto plan = unit_plan(n, 7, 16);
        for (int iter = 0; iter < 5; ++iter) {
            TensorField A = random_matrix_tensor(rng, chart);
            CharCoeffs cc = char_coeffs(A);
            std::vector<Expr> residuals;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Expr acc = matrix_power(A, n).at(i, j);
                    for (int m = 1; m <= n; ++m)
                        acc = acc - cc.sigma[m - 1] * matrix_power(A, n - m).at(i, j);
                    residuals.push_back(acc);
                }
            CHECK(is_identically_zero_all(residuals, plan).is_zero());
        }
    }
}

TEST_CASE("Haantjes torsion transforms tensorially under pushforward") {
    std::mt19937_64 rng(24);
    auto plan = unit_plan(2, 8, 8);
    int done = 0;
    while (done < 10) {
        TensorField A = random_matrix_tensor(rng, chart2);
        Diffeo phi = random_triangular_diffeo(rng, chart2);
        TensorField H = haantjes_torsion(A);
        TensorField Hp = haantjes_torsion(pushforward(A, phi));

        // numeric comparison at matched points: H'(y)^i_{jk} = J^i_a H^a_{bc} (J^-1)^b_j (J^-1)^c_k
        auto x = random_point(rng, 2);
        std::vector<double> y(2);
        for (int i = 0; i < 2; ++i) y[i] = eval_d(phi.forward[i], x);

        double J[2][2], Jinv[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) J[i][j] = eval_d(differentiate(phi.forward[i], j), x);
        double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(det) < 1e-6) continue;
        Jinv[0][0] = J[1][1] / det;
        Jinv[0][1] = -J[0][1] / det;
        Jinv[1][0] = -J[1][0] / det;
        Jinv[1][1] = J[0][0] / det;

        double scale = 1.0;
        bool ok = true;
        for (int i = 0; i < 2 && ok; ++i)
            for (int j = 0; j < 2 && ok; ++j)
                for (int k = 0; k < 2 && ok; ++k) {
                    double pushed = 0;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            for (int c = 0; c < 2; ++c)
                                pushed += J[i][a] * eval_d(H.at(a, b, c), x) * Jinv[b][j] * Jinv[c][k];
                    double direct = eval_d(Hp.at(i, j, k), y);
                    scale = std::max({scale, std::abs(pushed), std::abs(direct)});
                    if (std::abs(pushed - direct) / scale > 1e-9) ok = false;
                }
        CHECK(ok);
        ++done;
    }
}
