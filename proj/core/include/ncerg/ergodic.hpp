#pragma once

#include <vector>

#include "ncerg/dyadic.hpp"
#include "ncerg/operators.hpp"

namespace ncerg {

struct NestedSequence {
    enum class Mode { one_sided, two_sided };
    Mode mode = Mode::one_sided;
    std::vector<long> indices; // strictly increasing positive integers

    void validate() const;
    IntInterval interval_for(long n) const; // [0,n] or [-n,n]
};

// M_n(T) x = (1/(n+1)) sum_{k=0..n} T^k x; two-sided uses (1/(2n+1)) sum_{|k|<=n}.
Element ergodic_average(const SuperOperator& t, const Element& x, long n,
                        NestedSequence::Mode mode);

// All averages at the sequence checkpoints, sharing one incremental power sweep.
std::vector<Element> ergodic_averages(const SuperOperator& t, const Element& x,
                                      const NestedSequence& seq);

// Consecutive average differences (M_{n_i} x - M_{n_{i+1}} x)_i.
std::vector<Element> ergodic_differences(const SuperOperator& t, const Element& x,
                                         const NestedSequence& seq);

struct SquareStat {
    NormReport statistic;
    double input_norm = 0.0;
    double ratio = 0.0;
};

SquareStat square_stat(const SuperOperator& t, const Element& x, const NestedSequence& seq,
                       PExp p, const RcNormOptions& opt = {});

// Short/long refinement of the gaps [n_i, n_{i+1}): gaps with no dyadic
// point stay short; the others shed dyadic-endpoint middles into the long
// list.  All pairs are half-open.
struct SplitResult {
    std::vector<std::pair<long, long>> short_parts;
    std::vector<std::pair<long, long>> long_parts;
};
SplitResult nested_split(const NestedSequence& seq);

enum class SeqStatMode { strong_p, weak_1, bmo };

struct SeqSquareStat {
    double statistic = 0.0;      // full difference family
    double short_stat = 0.0;     // short-gap family only
    double long_martingale = 0.0; // (E_{k_i} - E_{l_i}) f family over long gaps
    double long_compensated = 0.0; // (M_{[0,2^k]} - E_k) f family over long-gap levels
    double input_norm = 0.0;
    double ratio = 0.0;
};

// Square statistic of the averaging differences T_i = M_{A_{n_i}} - M_{A_{n_{i+1}}}
// acting on a finitely supported sequence, in strong-p / weak-1 / bmo form.
// An optional region restricts the positions entering the statistic.
SeqSquareStat sequence_square_stat(const OperatorSequence& f, const NestedSequence& seq,
                                   SeqStatMode mode, double p = 2.0,
                                   const RcNormOptions& opt = {},
                                   const IntInterval* region = nullptr);

struct TransferenceReport {
    double defect = 0.0;  // max_k,i Frobenius mismatch of the orbit identity
    double factor = 1.0;  // ((m + N + 1)/(m + 1))^{1/p}
    std::vector<double> per_k_max;
};

// Orbit-function construction: f_m(l) = T^l x on the admissible range; the
// report certifies T^k (M_{n_i} - M_{n_{i+1}}) x = (M'_{n_i} - M'_{n_{i+1}}) f_m (k).
TransferenceReport transference(const SuperOperator& t, const Element& x,
                                const NestedSequence& seq, long m, double p);

// Projection onto the fixed space of a unitary conjugation, computed from
// the spectral decomposition of the conjugating unitary.  Oracle for the
// mean ergodic limit.
Element fixed_point_projection(const Element& u, const Element& x);

} // namespace ncerg
