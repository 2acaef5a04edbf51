#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ncerg/algebra.hpp"
#include "ncerg/lp.hpp"

namespace ncerg {

// Finite sequence in the algebra; carrier of the row/column square-function
// norms.
struct ElementSequence {
    AlgebraShape shape;
    std::vector<Element> items;

    int size() const { return static_cast<int>(items.size()); }
    void validate() const; // nonempty, uniform shape
};

// column:  || (sum_n x_n* x_n)^{1/2} ||_p      row: same with x_n x_n*.
NormReport col_row_norm(const ElementSequence& seq, PExp p, Side side);

// Witnessed value of the infimal sum norm (p < 2).
struct SumNormSolution {
    double value = 0.0;
    ElementSequence column_part; // (y_n), measured in the column norm
    ElementSequence row_part;    // (z_n) = (x_n - y_n), measured in the row norm
    double dual_lower_bound = 0.0;
    double gap = 0.0; // (value - dual) / max(value, 1e-12)
    bool gap_exceeded = false;
};

struct RcNormOptions {
    int restarts = 5;
    int iterations = 2000;
    int dual_samples = 200;
    double gap_threshold = 0.05;
    std::uint64_t seed = 0x243F6A8885A308D3ull;
};

struct RcNormResult {
    NormReport report;
    std::optional<SumNormSolution> solution; // present when p < 2
};

// p >= 2: the exact combination (||.||_c^p + ||.||_r^p)^{1/p} (max of the two
// at p = inf).  p < 2: infimal sum norm via projected subgradient descent on
// the decomposition variable, with a sampled dual lower bound.
RcNormResult rc_norm(const ElementSequence& seq, PExp p, const RcNormOptions& opt = {});

// Independent brute-force check of the sum norm: coarse grid over the real
// parameters of the decomposition, refined by exact coordinate line searches.
// pre: grid_resolution^(2 n D) <= 1e7.
double rc_sum_oracle(const ElementSequence& seq, double p, int grid_resolution);

struct KhintchineMode {
    bool exact = true;
    int trials = 0; // Monte-Carlo sample count when exact = false
    static KhintchineMode exact_mode() { return {true, 0}; }
    static KhintchineMode monte_carlo(int trials) { return {false, trials}; }
};

// ( E || sum_n eps_n x_n ||_p^p )^{1/p} over Rademacher signs; exact mode
// enumerates all 2^n patterns (n <= 14).  Monte-Carlo reports its standard
// error in tolerance_used.
NormReport khintchine_norm(const ElementSequence& seq, PExp p, KhintchineMode mode,
                           std::uint64_t seed = 0x13198A2E03707344ull);

// Weak-L1 rc statistic evaluated through the Rademacher dilation: the exact
// weak quasi-norm of the block-diagonal element  (+)_eps sum_n eps_n x_n
// with weights scaled by 2^{-n}.  pre: n <= 12.
NormReport weak_rc_surrogate(const ElementSequence& seq);

} // namespace ncerg
