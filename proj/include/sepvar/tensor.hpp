#pragma once

#include "sepvar/expr.hpp"
#include "sepvar/sampling.hpp"

namespace sepvar {

/// Components of a (1,q)-tensor field over a chart, q in {0,1,2,3}. Fields
/// with q >= 2 produced by the bracket are skew in the lower indices and are
/// stored on strictly increasing multi-indices; the general accessor applies
/// the sign/zero rules. Dense (non-skew) storage is used for the chain
/// tensors, which are built verbatim and carry no symmetry.
class TensorField {
public:
    static TensorField matrix(Chart chart, std::vector<std::vector<Expr>> comps);
    static TensorField diagonal(Chart chart, std::vector<Expr> diag);
    static TensorField identity(Chart chart);
    static TensorField zero(Chart chart, int valence, bool skew = true);
    static TensorField vector_field(Chart chart, std::vector<Expr> comps);

    const Chart& chart() const { return chart_; }
    int dim() const { return chart_.dim; }
    int valence() const { return valence_; }
    bool skew_storage() const { return skew_; }

    /// General accessor; for skew storage applies sign and zero rules.
    Expr at(int i) const;                        // valence 0
    Expr at(int i, int j) const;                 // valence 1
    Expr at(int i, int j, int k) const;          // valence 2
    Expr at(int i, int j, int k, int l) const;   // valence 3

    /// Setters address stored slots only: increasing multi-indices for skew
    /// storage, any index combination for dense.
    void set(int i, const Expr& e);
    void set(int i, int j, const Expr& e);
    void set(int i, int j, int k, const Expr& e);
    void set(int i, int j, int k, int l, const Expr& e);

    /// Flat view of all stored components (for zero tests). The rvalue
    /// overload keeps range-for over a temporary's components valid.
    const std::vector<Expr>& stored() const& { return comps_; }
    std::vector<Expr> stored() && { return std::move(comps_); }

    bool is_diagonal() const;  // valence-1 matrix with zero off-diagonal entries

private:
    TensorField(Chart chart, int valence, bool skew);
    int slot(int j, int k) const;
    int slot(int j, int k, int l) const;

    Chart chart_;
    int valence_ = 1;
    bool skew_ = true;
    std::vector<Expr> comps_;
};

/// Row of n scalar components (a (0,1)-tensor field).
struct CovectorField {
    Chart chart;
    std::vector<Expr> comps;
};

/// Characteristic coefficients in the convention
/// chi(t) = t^n - sigma_1 t^{n-1} - ... - sigma_n, so sigma_m = (-1)^{m+1} e_m
/// with e_m the m-th elementary symmetric polynomial of the eigenvalues.
struct CharCoeffs {
    std::vector<Expr> sigma;  // sigma[m-1] holds sigma_m
};

/// Caller-supplied coordinate change with explicit inverse; used for
/// tensoriality tests. forward maps src coordinates to dst, inverse back.
struct Diffeo {
    Chart chart_src;
    Chart chart_dst;
    std::vector<Expr> forward;  // expressions over chart_src
    std::vector<Expr> inverse;  // expressions over chart_dst

    /// Sampling check that forward(inverse(y)) = y within plan tolerance.
    bool verify_roundtrip(const SamplingPlan& plan) const;
};

TensorField matrix_power(const TensorField& A, int m);

/// Nijenhuis bracket of skew tensor fields Q (1,q) and R (1,r), q+r <= 3,
/// with full antisymmetrization over the lower indices divided by (q+r)!.
TensorField nijenhuis_bracket(const TensorField& Q, const TensorField& R);

/// [A,A]; also equals the classical component formula
/// N^i_{jk} = A^s_j d_s A^i_k - A^s_k d_s A^i_j - A^i_s (d_j A^s_k - d_k A^s_j).
TensorField nijenhuis_torsion(const TensorField& A);

/// H^i_{jk} = A^i_r A^r_s N^s_{jk} + N^i_{rs} A^r_j A^s_k
///          - A^i_r (N^r_{sk} A^s_j + N^r_{js} A^s_k), with N = [A,A].
TensorField haantjes_torsion(const TensorField& A);

/// Faddeev–LeVerrier recursion on the symbolic entries, sign-converted.
CharCoeffs char_coeffs(const TensorField& A);

/// Discriminant of chi(t), computed as the Sylvester resultant of chi and
/// chi' times (-1)^{n(n-1)/2}; equals prod_{i<j}(lambda_i - lambda_j)^2.
Expr discriminant(const TensorField& A);

CovectorField gradient_row(const Expr& f, const Chart& chart);

/// (omega A)_j = sum_s omega_s A^s_j.
CovectorField covector_apply(const CovectorField& omega, const TensorField& A);

/// A'(y) = J(x) A(x) J(x)^{-1} with x = inverse(y), composed symbolically.
TensorField pushforward(const TensorField& A, const Diffeo& phi);

/// Determinant of a symbolic matrix (expansion with column-subset memo).
Expr matrix_determinant(const std::vector<std::vector<Expr>>& m);

}  // namespace sepvar
