#include "sepvar/tensor.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace sepvar {

namespace {

int binom2(int n) { return n * (n - 1) / 2; }
int binom3(int n) { return n * (n - 1) * (n - 2) / 6; }

int storage_size(int n, int valence, bool skew) {
    switch (valence) {
        case 0: return n;
        case 1: return n * n;
        case 2: return skew ? n * binom2(n) : n * n * n;
        case 3: return skew ? n * binom3(n) : n * n * n * n;
        default: throw std::invalid_argument("valence must be in {0,1,2,3}");
    }
}

}  // namespace

TensorField::TensorField(Chart chart, int valence, bool skew)
    : chart_(std::move(chart)), valence_(valence), skew_(skew) {
    if (chart_.dim < 2) throw std::invalid_argument("chart dim must be >= 2");
    comps_.assign(storage_size(chart_.dim, valence, skew), Expr(Rational(0)));
}

TensorField TensorField::matrix(Chart chart, std::vector<std::vector<Expr>> comps) {
    const int n = chart.dim;
    if (static_cast<int>(comps.size()) != n)
        throw std::invalid_argument("matrix: wrong row count");
    TensorField t(std::move(chart), 1, false);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(comps[i].size()) != n)
            throw std::invalid_argument("matrix: wrong column count");
        for (int j = 0; j < n; ++j) t.set(i, j, comps[i][j]);
    }
    return t;
}

TensorField TensorField::diagonal(Chart chart, std::vector<Expr> diag) {
    const int n = chart.dim;
    if (static_cast<int>(diag.size()) != n)
        throw std::invalid_argument("diagonal: wrong entry count");
    TensorField t(std::move(chart), 1, false);
    for (int i = 0; i < n; ++i) t.set(i, i, diag[i]);
    return t;
}

TensorField TensorField::identity(Chart chart) {
    std::vector<Expr> ones(chart.dim, Expr(Rational(1)));
    return diagonal(std::move(chart), std::move(ones));
}

TensorField TensorField::zero(Chart chart, int valence, bool skew) {
    return TensorField(std::move(chart), valence, skew);
}

TensorField TensorField::vector_field(Chart chart, std::vector<Expr> comps) {
    const int n = chart.dim;
    if (static_cast<int>(comps.size()) != n)
        throw std::invalid_argument("vector_field: wrong entry count");
    TensorField t(std::move(chart), 0, false);
    for (int i = 0; i < n; ++i) t.set(i, comps[i]);
    return t;
}

int TensorField::slot(int j, int k) const {
    // rank of the increasing pair (j,k) among all pairs
    const int n = chart_.dim;
    return j * n - j * (j + 1) / 2 + (k - j - 1);
}

int TensorField::slot(int j, int k, int l) const {
    const int n = chart_.dim;
    int rank = 0;
    for (int a = 0; a < j; ++a) rank += binom2(n - 1 - a);
    rank += (k - j - 1) * (n - j - 1) - (k - j - 1) * (k - j) / 2 + (l - k - 1);
    return rank;
}

Expr TensorField::at(int i) const {
    if (valence_ != 0) throw std::logic_error("at(i): valence mismatch");
    return comps_[i];
}

Expr TensorField::at(int i, int j) const {
    if (valence_ != 1) throw std::logic_error("at(i,j): valence mismatch");
    return comps_[i * chart_.dim + j];
}

Expr TensorField::at(int i, int j, int k) const {
    if (valence_ != 2) throw std::logic_error("at(i,j,k): valence mismatch");
    const int n = chart_.dim;
    if (!skew_) return comps_[(i * n + j) * n + k];
    if (j == k) return Expr(Rational(0));
    if (j < k) return comps_[i * binom2(n) + slot(j, k)];
    return -comps_[i * binom2(n) + slot(k, j)];
}

Expr TensorField::at(int i, int j, int k, int l) const {
    if (valence_ != 3) throw std::logic_error("at(i,j,k,l): valence mismatch");
    const int n = chart_.dim;
    if (!skew_) return comps_[((i * n + j) * n + k) * n + l];
    if (j == k || j == l || k == l) return Expr(Rational(0));
    int a = j, b = k, c = l;
    int sign = 1;
    if (a > b) { std::swap(a, b); sign = -sign; }
    if (b > c) { std::swap(b, c); sign = -sign; }
    if (a > b) { std::swap(a, b); sign = -sign; }
    Expr v = comps_[i * binom3(n) + slot(a, b, c)];
    return sign > 0 ? v : -v;
}

void TensorField::set(int i, const Expr& e) {
    if (valence_ != 0) throw std::logic_error("set(i): valence mismatch");
    comps_[i] = e;
}

void TensorField::set(int i, int j, const Expr& e) {
    if (valence_ != 1) throw std::logic_error("set(i,j): valence mismatch");
    comps_[i * chart_.dim + j] = e;
}

void TensorField::set(int i, int j, int k, const Expr& e) {
    if (valence_ != 2) throw std::logic_error("set(i,j,k): valence mismatch");
    const int n = chart_.dim;
    if (!skew_) {
        comps_[(i * n + j) * n + k] = e;
        return;
    }
    if (!(j < k)) throw std::logic_error("skew set requires j < k");
    comps_[i * binom2(n) + slot(j, k)] = e;
}

void TensorField::set(int i, int j, int k, int l, const Expr& e) {
    if (valence_ != 3) throw std::logic_error("set(i,j,k,l): valence mismatch");
    const int n = chart_.dim;
    if (!skew_) {
        comps_[((i * n + j) * n + k) * n + l] = e;
        return;
    }
    if (!(j < k && k < l)) throw std::logic_error("skew set requires j < k < l");
    comps_[i * binom3(n) + slot(j, k, l)] = e;
}

bool TensorField::is_diagonal() const {
    if (valence_ != 1) return false;
    const int n = chart_.dim;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && !at(i, j).is_zero()) return false;
    return true;
}

namespace {

// Derivative cache shared across one tensor operation; differentiate() memoizes
// within a call, this keeps results across components.
class DerivCache {
public:
    Expr d(const Expr& e, int var) {
        auto key = std::make_pair(e.raw(), var);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second.second;
        Expr r = differentiate(e, var);
        // the key expr is retained alongside the result: a dead node's address
        // could otherwise be recycled and alias a different expression
        memo_.emplace(key, std::make_pair(e, r));
        return r;
    }

private:
    std::map<std::pair<const Expr::Node*, int>, std::pair<Expr, Expr>> memo_;
};

Expr at_lower(const TensorField& T, int i, std::span<const int> lower) {
    switch (lower.size()) {
        case 1: return T.at(i, lower[0]);
        case 2: return T.at(i, lower[0], lower[1]);
        case 3: return T.at(i, lower[0], lower[1], lower[2]);
        default: throw std::logic_error("unsupported lower-index count");
    }
}

void require_same_chart(const TensorField& A, const TensorField& B) {
    if (!(A.chart() == B.chart())) throw std::invalid_argument("chart mismatch");
}

}  // namespace

TensorField matrix_power(const TensorField& A, int m) {
    if (A.valence() != 1) throw std::invalid_argument("matrix_power: (1,1) tensor required");
    if (m < 0) throw std::invalid_argument("matrix_power: m must be >= 0");
    const int n = A.dim();
    TensorField result = TensorField::identity(A.chart());
    for (int step = 0; step < m; ++step) {
        TensorField next = TensorField::zero(A.chart(), 1, false);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Expr sum(Rational(0));
                for (int s = 0; s < n; ++s) sum = sum + A.at(i, s) * result.at(s, j);
                next.set(i, j, sum);
            }
        result = next;
    }
    return result;
}

TensorField nijenhuis_bracket(const TensorField& Q, const TensorField& R) {
    require_same_chart(Q, R);
    const int q = Q.valence(), r = R.valence();
    if (q < 1 || r < 1) throw std::invalid_argument("bracket: valences must be >= 1");
    if (q + r > 3) throw std::invalid_argument("bracket: valence overflow (q + r > 3)");
    const int p = q + r;
    const int n = Q.dim();
    DerivCache dc;

    // Unskewed integrand for a fixed assignment of lower indices js[0..p-1].
    auto term = [&](int i, const std::vector<int>& js) {
        std::span<const int> qlow(js.data(), q);
        std::span<const int> rlow(js.data() + q, r);
        Expr acc(Rational(0));
        for (int s = 0; s < n; ++s) {
            acc = acc + at_lower(Q, s, qlow) * dc.d(at_lower(R, i, rlow), s);
            acc = acc - at_lower(R, s, rlow) * dc.d(at_lower(Q, i, qlow), s);
        }
        for (int s = 0; s < n; ++s) {
            std::vector<int> qswap(qlow.begin(), qlow.end());
            qswap[0] = s;
            acc = acc - Expr(Rational(q)) * at_lower(Q, i, qswap) * dc.d(at_lower(R, s, rlow), js[0]);
            std::vector<int> rswap(rlow.begin(), rlow.end());
            rswap[0] = s;
            acc = acc + Expr(Rational(r)) * at_lower(R, i, rswap) * dc.d(at_lower(Q, s, qlow), js[q]);
        }
        return acc;
    };

    long factorial = 1;
    for (int f = 2; f <= p; ++f) factorial *= f;

    TensorField out = TensorField::zero(Q.chart(), p, true);
    if (p > n) return out;  // no strictly increasing multi-index exists; skew part is empty
    std::vector<int> multi(p);
    // iterate over strictly increasing multi-indices
    for (int m0 = 0; m0 < p; ++m0) multi[m0] = m0;
    for (;;) {
        for (int i = 0; i < n; ++i) {
            std::vector<int> perm = multi;
            std::sort(perm.begin(), perm.end());
            Expr sum(Rational(0));
            // enumerate permutations with signs
            std::vector<int> idx(p);
            for (int a = 0; a < p; ++a) idx[a] = a;
            do {
                std::vector<int> js(p);
                int sign = 1;
                for (int a = 0; a < p; ++a) js[a] = perm[idx[a]];
                // parity of idx
                std::vector<int> tmp = idx;
                for (int a = 0; a < p; ++a)
                    for (int b = a + 1; b < p; ++b)
                        if (tmp[a] > tmp[b]) sign = -sign;
                Expr t = term(i, js);
                sum = sign > 0 ? sum + t : sum - t;
            } while (std::next_permutation(idx.begin(), idx.end()));
            sum = sum / Expr(Rational(factorial));
            if (p == 2)
                out.set(i, multi[0], multi[1], sum);
            else
                out.set(i, multi[0], multi[1], multi[2], sum);
        }
        // next increasing multi-index
        int pos = p - 1;
        while (pos >= 0 && multi[pos] == n - p + pos) --pos;
        if (pos < 0) break;
        ++multi[pos];
        for (int a = pos + 1; a < p; ++a) multi[a] = multi[a - 1] + 1;
    }
    return out;
}

TensorField nijenhuis_torsion(const TensorField& A) {
    if (A.valence() != 1) throw std::invalid_argument("nijenhuis_torsion: (1,1) tensor required");
    return nijenhuis_bracket(A, A);
}

TensorField haantjes_torsion(const TensorField& A) {
    if (A.valence() != 1) throw std::invalid_argument("haantjes_torsion: (1,1) tensor required");
    const int n = A.dim();
    TensorField N = nijenhuis_torsion(A);
    TensorField A2 = matrix_power(A, 2);
    TensorField H = TensorField::zero(A.chart(), 2, true);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Expr acc(Rational(0));
                for (int s = 0; s < n; ++s) acc = acc + A2.at(i, s) * N.at(s, j, k);
                for (int rr = 0; rr < n; ++rr)
                    for (int s = 0; s < n; ++s)
                        acc = acc + N.at(i, rr, s) * A.at(rr, j) * A.at(s, k);
                for (int rr = 0; rr < n; ++rr) {
                    Expr inner(Rational(0));
                    for (int s = 0; s < n; ++s)
                        inner = inner + N.at(rr, s, k) * A.at(s, j) + N.at(rr, j, s) * A.at(s, k);
                    acc = acc - A.at(i, rr) * inner;
                }
                H.set(i, j, k, acc);
            }
    return H;
}

namespace {

std::vector<std::vector<Expr>> to_rows(const TensorField& A) {
    const int n = A.dim();
    std::vector<std::vector<Expr>> m(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = A.at(i, j);
    return m;
}

std::vector<std::vector<Expr>> matmul(const std::vector<std::vector<Expr>>& a,
                                      const std::vector<std::vector<Expr>>& b) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<Expr>> c(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr s(Rational(0));
            for (int k = 0; k < n; ++k) s = s + a[i][k] * b[k][j];
            c[i][j] = s;
        }
    return c;
}

Expr trace(const std::vector<std::vector<Expr>>& a) {
    Expr s(Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) s = s + a[i][i];
    return s;
}

}  // namespace

CharCoeffs char_coeffs(const TensorField& A) {
    if (A.valence() != 1) throw std::invalid_argument("char_coeffs: (1,1) tensor required");
    const int n = A.dim();
    auto a = to_rows(A);
    CharCoeffs cc;
    // chi(t) = t^n + c_1 t^{n-1} + ... + c_n; then sigma_m = -c_m.
    std::vector<std::vector<Expr>> M = a;
    Expr c = Expr(Rational(-1)) * trace(M);
    cc.sigma.push_back(-c);
    for (int k = 2; k <= n; ++k) {
        auto shifted = M;
        for (int i = 0; i < n; ++i) shifted[i][i] = shifted[i][i] + c;
        M = matmul(a, shifted);
        c = Expr(Rational(-1, k)) * trace(M);
        cc.sigma.push_back(-c);
    }
    return cc;
}

Expr matrix_determinant(const std::vector<std::vector<Expr>>& m) {
    const int sz = static_cast<int>(m.size());
    if (sz == 0) return Expr(Rational(1));
    if (sz > 20) throw std::invalid_argument("matrix_determinant: too large");
    std::unordered_map<std::uint32_t, Expr> memo;
    const std::uint32_t full = (1u << sz) - 1;

    std::function<Expr(std::uint32_t)> f = [&](std::uint32_t mask) -> Expr {
        if (mask == full) return Expr(Rational(1));
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        const int row = __builtin_popcount(mask);
        Expr acc(Rational(0));
        int parity = 0;
        for (int c2 = 0; c2 < sz; ++c2) {
            if (mask & (1u << c2)) continue;
            if (!m[row][c2].is_zero()) {
                Expr sub = m[row][c2] * f(mask | (1u << c2));
                acc = (parity % 2 == 0) ? acc + sub : acc - sub;
            }
            ++parity;
        }
        memo.emplace(mask, acc);
        return acc;
    };
    return f(0);
}

Expr discriminant(const TensorField& A) {
    if (A.valence() != 1) throw std::invalid_argument("discriminant: (1,1) tensor required");
    const int n = A.dim();
    CharCoeffs cc = char_coeffs(A);
    // chi coefficients, leading first: [1, -sigma_1, ..., -sigma_n]
    std::vector<Expr> a;
    a.push_back(Expr(Rational(1)));
    for (int m = 1; m <= n; ++m) a.push_back(-cc.sigma[m - 1]);
    // chi' coefficients: b[k] = (n-k) a[k], k = 0..n-1
    std::vector<Expr> b;
    for (int k = 0; k < n; ++k) b.push_back(Expr(Rational(n - k)) * a[k]);

    const int sz = 2 * n - 1;
    std::vector<std::vector<Expr>> syl(sz, std::vector<Expr>(sz, Expr(Rational(0))));
    for (int row = 0; row < n - 1; ++row)
        for (int k = 0; k <= n; ++k) syl[row][row + k] = a[k];
    for (int row = 0; row < n; ++row)
        for (int k = 0; k < n; ++k) syl[n - 1 + row][row + k] = b[k];

    Expr res = matrix_determinant(syl);
    const int sgn = (n * (n - 1) / 2) % 2 == 0 ? 1 : -1;
    return sgn == 1 ? res : -res;
}

CovectorField gradient_row(const Expr& f, const Chart& chart) {
    CovectorField w;
    w.chart = chart;
    for (int j = 0; j < chart.dim; ++j) w.comps.push_back(differentiate(f, j));
    return w;
}

CovectorField covector_apply(const CovectorField& omega, const TensorField& A) {
    if (!(omega.chart == A.chart())) throw std::invalid_argument("chart mismatch");
    const int n = A.dim();
    CovectorField out;
    out.chart = omega.chart;
    for (int j = 0; j < n; ++j) {
        Expr s(Rational(0));
        for (int k = 0; k < n; ++k) s = s + omega.comps[k] * A.at(k, j);
        out.comps.push_back(s);
    }
    return out;
}

bool Diffeo::verify_roundtrip(const SamplingPlan& plan) const {
    std::vector<Expr> residuals;
    for (int j = 0; j < chart_dst.dim; ++j) {
        Expr composed = substitute(forward[j], std::span<const Expr>(inverse));
        residuals.push_back(composed - Expr::variable(j));
    }
    return is_identically_zero_all(residuals, plan).is_zero();
}

TensorField pushforward(const TensorField& A, const Diffeo& phi) {
    if (A.valence() != 1) throw std::invalid_argument("pushforward: (1,1) tensor required");
    if (!(A.chart() == phi.chart_src)) throw std::invalid_argument("chart mismatch");
    const int n = A.dim();

    std::vector<std::vector<Expr>> J(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J[i][j] = differentiate(phi.forward[i], j);

    Expr det = matrix_determinant(J);
    if (det.is_zero()) throw std::invalid_argument("pushforward: singular Jacobian");

    // inverse via adjugate over determinant
    std::vector<std::vector<Expr>> Jinv(n, std::vector<Expr>(n, Expr(Rational(0))));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<std::vector<Expr>> minor;
            for (int r = 0; r < n; ++r) {
                if (r == j) continue;
                std::vector<Expr> row;
                for (int c2 = 0; c2 < n; ++c2) {
                    if (c2 == i) continue;
                    row.push_back(J[r][c2]);
                }
                minor.push_back(std::move(row));
            }
            Expr cof = matrix_determinant(minor);
            if ((i + j) % 2 == 1) cof = -cof;
            Jinv[i][j] = cof / det;
        }

    auto B = matmul(matmul(J, to_rows(A)), Jinv);
    TensorField out = TensorField::zero(phi.chart_dst, 1, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.set(i, j, substitute(B[i][j], std::span<const Expr>(phi.inverse)));
    return out;
}

}  // namespace sepvar
