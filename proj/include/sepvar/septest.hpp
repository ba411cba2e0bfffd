#pragma once

#include "sepvar/tensor.hpp"

namespace sepvar {

enum class QOutcome { Pass, Fail, Indeterminate };

struct Verdict {
    QOutcome outcome = QOutcome::Indeterminate;
    ZeroVerdict zero;
    std::vector<std::string> warnings;
    std::string detail;

    bool passed() const { return outcome == QOutcome::Pass; }
};

/// Per-question outcomes of the four-question separability test. A metric
/// exists (locally) iff all four questions pass.
struct TestReport {
    Verdict q1, q2, q3, q4;
    bool overall = false;
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<std::pair<double, double>> box;
    std::vector<std::string> notes;
};

/// Jordan block structure with eigenvalue functions, for the closed-form
/// covector oracle.
struct JordanSpec {
    std::vector<int> block_sizes;   // m_1..m_k, sum = n
    std::vector<Expr> eigenvalues;  // lambda_1..lambda_k

    int dim() const;
    /// K in block form with lambda_s as functions on the chart.
    TensorField to_tensor(const Chart& chart) const;
};

/// Q1: is the discriminant of the characteristic polynomial nonzero?
/// Generic-point test: samples within abs_tol of zero are resampled; if more
/// than half of all draws land there the verdict is fail (degenerate on box).
Verdict q1_distinct_eigenvalues(const TensorField& K, const SamplingPlan& plan);

/// Q2: is the Haantjes torsion of K zero?
Verdict q2_haantjes(const TensorField& K, const SamplingPlan& plan);

/// Q3: weak nonlinearity; zero-tests the covector
/// sum_m grad(sigma_m) K^{n-m}. Meaningful under the Q1 hypothesis.
Verdict q3_weakly_nonlinear(const TensorField& K, const SamplingPlan& plan);

/// The four chain tensors, built verbatim on coordinate frames (dense
/// storage; no symmetrization beyond what the bracket provides).
struct SharipovChain {
    TensorField Kc, M, Q, P;
};
SharipovChain sharipov_chain(const TensorField& K);

/// Q4: semi-Hamiltonicity; zero-tests all components of P.
Verdict q4_semihamiltonian(const TensorField& K, const SamplingPlan& plan);

/// Runs Q1..Q4 (all four regardless of earlier failures by default; witnesses
/// from later questions aid debugging).
TestReport run_all(const TensorField& K, const SamplingPlan& plan, bool short_circuit = false);

/// Compatibility residuals for diagonal input, one per ordered triple of
/// distinct indices (i,j,k):
/// d/dx^k( (1/(K_j-K_i)) dK_i/dx^j ) - d/dx^j( (1/(K_k-K_i)) dK_i/dx^k ).
struct TsarevEntry {
    int i, j, k;
    Expr residual;
    ZeroVerdict verdict;
};
std::vector<TsarevEntry> oracle_tsarev(const std::vector<Expr>& K_diag, const Chart& chart,
                                       const SamplingPlan& plan);

/// Diagonal self-derivatives dK_i/dx^i, zero-tested.
struct SelfDerivativeEntry {
    int i;
    Expr residual;
    ZeroVerdict verdict;
};
std::vector<SelfDerivativeEntry> oracle_weak_nonlinearity_diag(const std::vector<Expr>& K_diag,
                                                               const Chart& chart,
                                                               const SamplingPlan& plan);

/// Evaluates the weak-nonlinearity covector for a Jordan-block tensor at a
/// point and pairs it with the closed form: entries are zero except at block
/// ends, where entry m_1+...+m_s equals
/// m_s (dlambda_s/dx^{first coord of block s}) prod_{r != s}(lambda_s - lambda_r)^{m_r}.
struct Lemma1Result {
    std::vector<double> computed;
    std::vector<double> expected;
};
Lemma1Result oracle_lemma1(const JordanSpec& spec, const Chart& chart, const Point& point);

}  // namespace sepvar
