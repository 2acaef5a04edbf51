#include "ncerg/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ncerg/errors.hpp"
#include "ncerg/rc.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

void NestedSequence::validate() const {
    if (indices.empty()) throw Error("NestedSequence: empty index list");
    long prev = 0;
    for (long n : indices) {
        if (n <= prev) throw Error("NestedSequence: indices must be strictly increasing and positive");
        prev = n;
    }
}

IntInterval NestedSequence::interval_for(long n) const {
    return mode == Mode::one_sided ? IntInterval{0, n} : IntInterval{-n, n};
}

Element ergodic_average(const SuperOperator& t, const Element& x, long n,
                        NestedSequence::Mode mode) {
    if (mode == NestedSequence::Mode::one_sided) {
        Element sum = x;
        Element cur = x;
        for (long k = 1; k <= n; ++k) {
            cur = t.apply(cur);
            sum += cur;
        }
        return (1.0 / static_cast<double>(n + 1)) * sum;
    }
    if (!t.invertible())
        throw NotInvertible("ergodic_average: two-sided averages need an invertible map");
    SuperOperator tinv = t.inverse_map();
    Element sum = x;
    Element fwd = x, bwd = x;
    for (long k = 1; k <= n; ++k) {
        fwd = t.apply(fwd);
        bwd = tinv.apply(bwd);
        sum += fwd;
        sum += bwd;
    }
    return (1.0 / static_cast<double>(2 * n + 1)) * sum;
}

std::vector<Element> ergodic_averages(const SuperOperator& t, const Element& x,
                                      const NestedSequence& seq) {
    seq.validate();
    std::vector<Element> out;
    out.reserve(seq.indices.size());
    const long n_max = seq.indices.back();
    if (seq.mode == NestedSequence::Mode::one_sided) {
        Element sum = x;
        Element cur = x;
        size_t next = 0;
        for (long k = 0; k <= n_max; ++k) {
            if (k > 0) {
                cur = t.apply(cur);
                sum += cur;
            }
            while (next < seq.indices.size() && seq.indices[next] == k) {
                out.push_back((1.0 / static_cast<double>(k + 1)) * sum);
                ++next;
            }
        }
        return out;
    }
    if (!t.invertible())
        throw NotInvertible("ergodic_averages: two-sided averages need an invertible map");
    SuperOperator tinv = t.inverse_map();
    Element sum = x, fwd = x, bwd = x;
    size_t next = 0;
    for (long k = 0; k <= n_max; ++k) {
        if (k > 0) {
            fwd = t.apply(fwd);
            bwd = tinv.apply(bwd);
            sum += fwd;
            sum += bwd;
        }
        while (next < seq.indices.size() && seq.indices[next] == k) {
            out.push_back((1.0 / static_cast<double>(2 * k + 1)) * sum);
            ++next;
        }
    }
    return out;
}

std::vector<Element> ergodic_differences(const SuperOperator& t, const Element& x,
                                         const NestedSequence& seq) {
    std::vector<Element> avgs = ergodic_averages(t, x, seq);
    std::vector<Element> diffs;
    diffs.reserve(avgs.size() - 1);
    for (size_t i = 0; i + 1 < avgs.size(); ++i) diffs.push_back(avgs[i] - avgs[i + 1]);
    return diffs;
}

SquareStat square_stat(const SuperOperator& t, const Element& x, const NestedSequence& seq,
                       PExp p, const RcNormOptions& opt) {
    SquareStat out;
    out.input_norm = lp_norm(x, p).value;
    if (seq.indices.size() < 2) {
        out.statistic = {0.0, p, NormMethod::exact_spectral, 0.0};
        out.ratio = 0.0;
        return out;
    }
    ElementSequence diffs{x.shape(), ergodic_differences(t, x, seq)};
    out.statistic = rc_norm(diffs, p, opt).report;
    out.ratio = out.input_norm > 0 ? out.statistic.value / out.input_norm : 0.0;
    return out;
}

namespace {

// smallest power of two >= v
long ceil_pow2(long v) {
    long p = 1;
    while (p < v) p <<= 1;
    return p;
}

// largest power of two <= v (v >= 1)
long floor_pow2(long v) {
    long p = 1;
    while ((p << 1) <= v) p <<= 1;
    return p;
}

} // namespace

SplitResult nested_split(const NestedSequence& seq) {
    seq.validate();
    SplitResult out;
    for (size_t i = 0; i + 1 < seq.indices.size(); ++i) {
        const long a = seq.indices[i];
        const long b = seq.indices[i + 1];
        const long first_dyadic = ceil_pow2(a); // min 2^k >= a
        if (first_dyadic >= b) {
            // no dyadic point inside [a, b)
            out.short_parts.emplace_back(a, b);
            continue;
        }
        const long tilde = first_dyadic;      // min dyadic in [a, b)
        const long tilde2 = floor_pow2(b);    // max dyadic in the closure [a, b]
        if (a < tilde) out.short_parts.emplace_back(a, tilde);
        if (tilde < tilde2) out.long_parts.emplace_back(tilde, tilde2);
        if (tilde2 < b) out.short_parts.emplace_back(tilde2, b);
    }
    return out;
}

namespace {

// Flatten a family of position-indexed values into plain element sequences
// over a block-diagonal shape (one block set per retained position).
struct Flattened {
    AlgebraShape shape;
    ElementSequence seq;
};

Flattened flatten_family(const std::vector<OperatorSequence>& family,
                         const IntInterval* region) {
    if (family.empty()) throw Error("flatten_family: empty family");
    const AlgebraShape& base = family.front().shape();
    std::set<long> positions;
    for (const auto& f : family)
        for (const auto& [pos, v] : f.values()) {
            if (region && !region->contains(pos)) continue;
            positions.insert(pos);
        }
    Flattened out;
    if (positions.empty()) {
        out.shape = base;
        out.seq.shape = base;
        for (size_t i = 0; i < family.size(); ++i) out.seq.items.push_back(Element::zero(base));
        return out;
    }
    for (size_t rep = 0; rep < positions.size(); ++rep) {
        for (int k = 0; k < base.blocks(); ++k) {
            out.shape.block_dims.push_back(base.block_dims[static_cast<size_t>(k)]);
            out.shape.trace_weights.push_back(base.trace_weights[static_cast<size_t>(k)]);
        }
    }
    out.seq.shape = out.shape;
    for (const auto& f : family) {
        Element e(out.shape);
        int blk = 0;
        for (long pos : positions) {
            const Element* v = f.find(pos);
            for (int k = 0; k < base.blocks(); ++k) {
                if (v) e.block(blk) = v->block(k);
                ++blk;
            }
        }
        out.seq.items.push_back(std::move(e));
    }
    return out;
}

double family_statistic(const std::vector<OperatorSequence>& family, SeqStatMode mode,
                        double p, const RcNormOptions& opt, const IntInterval* region) {
    if (family.empty()) return 0.0;
    switch (mode) {
        case SeqStatMode::strong_p: {
            Flattened fl = flatten_family(family, region);
            return rc_norm(fl.seq, PExp::finite(p), opt).report.value;
        }
        case SeqStatMode::weak_1: {
            Flattened fl = flatten_family(family, region);
            return weak_rc_surrogate(fl.seq).value;
        }
        case SeqStatMode::bmo: {
            return bmo_norm(family, Side::column).value + bmo_norm(family, Side::row).value;
        }
    }
    return 0.0;
}

} // namespace

SeqSquareStat sequence_square_stat(const OperatorSequence& f, const NestedSequence& seq,
                                   SeqStatMode mode, double p, const RcNormOptions& opt,
                                   const IntInterval* region) {
    seq.validate();
    if (seq.indices.size() < 2) throw Error("sequence_square_stat: need at least two indices");

    auto diff_member = [&](long a, long b) {
        return average(f, seq.interval_for(a)) - average(f, seq.interval_for(b));
    };

    std::vector<OperatorSequence> family;
    for (size_t i = 0; i + 1 < seq.indices.size(); ++i)
        family.push_back(diff_member(seq.indices[i], seq.indices[i + 1]));

    SplitResult split = nested_split(seq);
    std::vector<OperatorSequence> short_family;
    for (auto& [a, b] : split.short_parts) short_family.push_back(diff_member(a, b));

    std::vector<OperatorSequence> mart_family;
    std::set<int> levels;
    for (auto& [a, b] : split.long_parts) {
        int ka = 0, kb = 0;
        while ((1L << ka) < a) ++ka;
        while ((1L << kb) < b) ++kb;
        mart_family.push_back(cond_expectation(f, ka) - cond_expectation(f, kb));
        levels.insert(ka);
        levels.insert(kb);
    }
    std::vector<OperatorSequence> comp_family;
    for (int k : levels) comp_family.push_back(level_compensated_average(f, k));

    SeqSquareStat out;
    out.statistic = family_statistic(family, mode, p, opt, region);
    out.short_stat = family_statistic(short_family, mode, p, opt, region);
    out.long_martingale = family_statistic(mart_family, mode, p, opt, region);
    out.long_compensated = family_statistic(comp_family, mode, p, opt, region);
    switch (mode) {
        case SeqStatMode::strong_p: out.input_norm = seq_lp_norm(f, PExp::finite(p)); break;
        case SeqStatMode::weak_1: out.input_norm = seq_lp_norm(f, PExp::finite(1.0)); break;
        case SeqStatMode::bmo: out.input_norm = seq_lp_norm(f, PExp::infinity()); break;
    }
    out.ratio = out.input_norm > 0 ? out.statistic / out.input_norm : 0.0;
    return out;
}

TransferenceReport transference(const SuperOperator& t, const Element& x,
                                const NestedSequence& seq, long m, double p) {
    seq.validate();
    const long n_last = seq.indices.back();
    if (m <= n_last) throw Error("transference: m must exceed the largest index");
    const bool two_sided = seq.mode == NestedSequence::Mode::two_sided;

    // orbit function values T^l x on the admissible range
    const long lo = two_sided ? -(m + n_last) : 0;
    const long hi = m + n_last;
    std::vector<Element> orbit(static_cast<size_t>(hi - lo + 1), Element::zero(x.shape()));
    orbit[static_cast<size_t>(-lo)] = x;
    {
        Element cur = x;
        for (long l = 1; l <= hi; ++l) {
            cur = t.apply(cur);
            orbit[static_cast<size_t>(l - lo)] = cur;
        }
        if (two_sided) {
            SuperOperator tinv = t.inverse_map();
            Element back = x;
            for (long l = -1; l >= lo; --l) {
                back = tinv.apply(back);
                orbit[static_cast<size_t>(l - lo)] = back;
            }
        }
    }
    // prefix sums for window averages of the orbit function
    std::vector<Element> prefix(orbit.size() + 1, Element::zero(x.shape()));
    for (size_t i = 0; i < orbit.size(); ++i) prefix[i + 1] = prefix[i] + orbit[i];
    auto window_average = [&](long k, long n) {
        const long a = two_sided ? k - n : k;
        const long b = two_sided ? k + n : k + n;
        const double inv = 1.0 / static_cast<double>(two_sided ? 2 * n + 1 : n + 1);
        Element s = prefix[static_cast<size_t>(b - lo + 1)] - prefix[static_cast<size_t>(a - lo)];
        return inv * s;
    };

    std::vector<Element> diffs = ergodic_differences(t, x, seq);

    TransferenceReport rep;
    const long klo = two_sided ? -m : 0;
    rep.per_k_max.assign(static_cast<size_t>(m - klo + 1), 0.0);
    std::vector<Element> powered = diffs; // T^k d_i, updated incrementally from k = klo
    if (two_sided) {
        SuperOperator tinv = t.inverse_map();
        for (long s = 0; s < m; ++s)
            for (auto& d : powered) d = tinv.apply(d);
    }
    for (long k = klo; k <= m; ++k) {
        double worst = 0;
        for (size_t i = 0; i + 1 < seq.indices.size(); ++i) {
            Element rhs = window_average(k, seq.indices[i]) -
                          window_average(k, seq.indices[i + 1]);
            worst = std::max(worst, (powered[i] - rhs).frobenius());
        }
        rep.per_k_max[static_cast<size_t>(k - klo)] = worst;
        rep.defect = std::max(rep.defect, worst);
        if (k < m)
            for (auto& d : powered) d = t.apply(d);
    }
    const double num = two_sided ? static_cast<double>(2 * m + 2 * n_last + 1)
                                 : static_cast<double>(m + n_last + 1);
    const double den = two_sided ? static_cast<double>(2 * m + 1) : static_cast<double>(m + 1);
    rep.factor = std::pow(num / den, 1.0 / p);
    return rep;
}

Element fixed_point_projection(const Element& u, const Element& x) {
    Element out(x.shape());
    for (int k = 0; k < x.blocks(); ++k) {
        UnitaryEig eu = eig_unitary_matrix(u.block(k));
        const int d = u.block(k).rows();
        const CMat& v = eu.vectors;
        CMat inner = v.adjoint() * x.block(k) * v;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (std::abs(eu.values[static_cast<size_t>(i)] -
                             eu.values[static_cast<size_t>(j)]) > 1e-8)
                    inner(i, j) = 0.0;
        out.block(k) = v * inner * v.adjoint();
    }
    return out;
}

} // namespace ncerg
