#pragma once

#include <map>
#include <vector>

#include "ncerg/algebra.hpp"
#include "ncerg/lp.hpp"

namespace ncerg {

// Closed integer interval [lo, hi].
struct IntInterval {
    long lo;
    long hi;
    long length() const { return hi - lo + 1; }
    bool contains(long v) const { return v >= lo && v <= hi; }
};

// Dyadic cell [start, start + 2^level) with start a multiple of 2^level.
struct DyadicInterval {
    int level;
    long start;
    long width() const { return 1L << level; }
    bool contains(long v) const { return v >= start && v < start + width(); }
    static DyadicInterval containing(long pos, int level);
};

// Finitely supported function Z -> algebra; absent positions read as zero.
// The window K records the nominal support [0, 2^K) expected by the
// martingale machinery; averaging outputs may extend beyond it.
class OperatorSequence {
public:
    OperatorSequence() = default;
    OperatorSequence(AlgebraShape shape, int window_k);

    const AlgebraShape& shape() const { return shape_; }
    int window() const { return window_; }
    long window_size() const { return 1L << window_; }

    void set(long pos, Element value);
    const Element* find(long pos) const;
    Element at_or_zero(long pos) const;
    const std::map<long, Element>& values() const { return values_; }
    bool empty() const { return values_.empty(); }

    long support_min() const; // throws on empty
    long support_max() const;

    bool support_in_window() const;
    bool is_positive(double tolerance) const;

    OperatorSequence& operator+=(const OperatorSequence& o);
    OperatorSequence& operator-=(const OperatorSequence& o);
    OperatorSequence& operator*=(cplx s);
    OperatorSequence adjoint_pointwise() const;

private:
    AlgebraShape shape_;
    int window_ = 0;
    std::map<long, Element> values_;
};

OperatorSequence operator+(OperatorSequence a, const OperatorSequence& b);
OperatorSequence operator-(OperatorSequence a, const OperatorSequence& b);
OperatorSequence operator*(cplx s, OperatorSequence a);

// Conditional expectation onto level-n dyadic cells: constant cell averages.
// Implemented by iterated pairwise halving so the tower identity
// E_m E_n = E_max(m,n) holds bitwise.
OperatorSequence cond_expectation(const OperatorSequence& f, int n);

// df_n = f_{n-1} - f_n for n >= 1; zero for n = 0.
OperatorSequence martingale_diff(const OperatorSequence& f, int n);

// M_A f(v) = (1/|A|) sum_{y in A} f(v + y) over a closed interval A.
OperatorSequence average(const OperatorSequence& f, IntInterval a);

// L_k f = M_{[0, 2^k]} f - E_k f.
OperatorSequence level_compensated_average(const OperatorSequence& f, int k);

// Cell means of f at level n (cell start -> average over the full cell).
std::map<long, Element> cell_means(const OperatorSequence& f, int n);

// Boundary position sets of the shifted interval x + A against the level-n
// dyadic grid: first = union of (x+A) cut to the boundary cells, second =
// union of the full boundary cells.
struct BoundarySets {
    std::vector<long> inner; // I(x+A, n)
    std::vector<long> full;  // I_1(x+A, n)
};
BoundarySets boundary_sets(IntInterval a, long x, int n);

// phi-weighted L_p norm over the tensor algebra (positions x algebra).
double seq_lp_norm(const OperatorSequence& f, PExp p);
double seq_l2_sq(const OperatorSequence& f);
cplx seq_trace(const OperatorSequence& f);
double seq_weak_l1(const OperatorSequence& f); // weak quasi-norm over positions

// Row/column dyadic oscillation norm of a finite family: the supremum over
// dyadic cells inside [0, 2^K) of || (1/|I|) sum_{x in I} sum_i |(F_i(x) -
// mean_i)^(*)|^2 ||_inf^{1/2}.  The sup ranges over levels 0..K only, so the
// value is a lower bound for the full-line norm.
NormReport bmo_norm(const std::vector<OperatorSequence>& family, Side side);

} // namespace ncerg
