#include "ncerg/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

namespace {

inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

DyadicInterval DyadicInterval::containing(long pos, int level) {
    const long w = 1L << level;
    return {level, floor_div(pos, w) * w};
}

OperatorSequence::OperatorSequence(AlgebraShape shape, int window_k)
    : shape_(std::move(shape)), window_(window_k) {
    shape_.validate();
    if (window_k < 0 || window_k > 30)
        throw ShapeMismatch("OperatorSequence: window exponent out of range");
}

void OperatorSequence::set(long pos, Element value) {
    if (!(value.shape() == shape_))
        throw ShapeMismatch("OperatorSequence: value has a different algebra shape");
    values_[pos] = std::move(value);
}

const Element* OperatorSequence::find(long pos) const {
    auto it = values_.find(pos);
    return it == values_.end() ? nullptr : &it->second;
}

Element OperatorSequence::at_or_zero(long pos) const {
    const Element* e = find(pos);
    return e ? *e : Element::zero(shape_);
}

long OperatorSequence::support_min() const {
    if (values_.empty()) throw Error("OperatorSequence: empty support");
    return values_.begin()->first;
}

long OperatorSequence::support_max() const {
    if (values_.empty()) throw Error("OperatorSequence: empty support");
    return values_.rbegin()->first;
}

bool OperatorSequence::support_in_window() const {
    if (values_.empty()) return true;
    return support_min() >= 0 && support_max() < window_size();
}

bool OperatorSequence::is_positive(double tolerance) const {
    for (const auto& [pos, v] : values_)
        if (!v.is_positive(tolerance)) return false;
    return true;
}

OperatorSequence& OperatorSequence::operator+=(const OperatorSequence& o) {
    if (!(o.shape_ == shape_)) throw ShapeMismatch("OperatorSequence: shape mismatch");
    for (const auto& [pos, v] : o.values_) {
        auto it = values_.find(pos);
        if (it == values_.end())
            values_[pos] = v;
        else
            it->second += v;
    }
    return *this;
}

OperatorSequence& OperatorSequence::operator-=(const OperatorSequence& o) {
    if (!(o.shape_ == shape_)) throw ShapeMismatch("OperatorSequence: shape mismatch");
    for (const auto& [pos, v] : o.values_) {
        auto it = values_.find(pos);
        if (it == values_.end()) {
            values_[pos] = Element::zero(shape_) - v;
        } else {
            it->second -= v;
        }
    }
    return *this;
}

OperatorSequence& OperatorSequence::operator*=(cplx s) {
    for (auto& [pos, v] : values_) v *= s;
    return *this;
}

OperatorSequence OperatorSequence::adjoint_pointwise() const {
    OperatorSequence r(shape_, window_);
    for (const auto& [pos, v] : values_) r.set(pos, v.adjoint());
    return r;
}

OperatorSequence operator+(OperatorSequence a, const OperatorSequence& b) { return a += b; }
OperatorSequence operator-(OperatorSequence a, const OperatorSequence& b) { return a -= b; }
OperatorSequence operator*(cplx s, OperatorSequence a) { return a *= s; }

std::map<long, Element> cell_means(const OperatorSequence& f, int n) {
    // level 0: the positions themselves
    std::map<long, Element> cur;
    for (const auto& [pos, v] : f.values()) cur[pos] = v;
    for (int level = 1; level <= n; ++level) {
        const long w = 1L << level;
        std::map<long, Element> next;
        for (const auto& [start, v] : cur) {
            const long parent = floor_div(start, w) * w;
            auto it = next.find(parent);
            if (it == next.end())
                next[parent] = v;
            else
                it->second += v;
        }
        for (auto& [start, v] : next) v *= cplx(0.5, 0.0);
        cur = std::move(next);
    }
    return cur;
}

OperatorSequence cond_expectation(const OperatorSequence& f, int n) {
    if (n < 0) throw Error("cond_expectation: level must be nonnegative");
    if (n == 0) return f;
    OperatorSequence out(f.shape(), f.window());
    const long w = 1L << n;
    for (const auto& [start, v] : cell_means(f, n))
        for (long pos = start; pos < start + w; ++pos) out.set(pos, v);
    return out;
}

OperatorSequence martingale_diff(const OperatorSequence& f, int n) {
    if (n <= 0) return OperatorSequence(f.shape(), f.window());
    return cond_expectation(f, n - 1) - cond_expectation(f, n);
}

OperatorSequence average(const OperatorSequence& f, IntInterval a) {
    if (a.length() < 1) throw EmptyInterval("average: interval is empty");
    OperatorSequence out(f.shape(), f.window());
    const double inv = 1.0 / static_cast<double>(a.length());
    std::map<long, Element> acc;
    for (const auto& [pos, v] : f.values()) {
        // f(v+y) contributes to output positions pos - y for y in [lo, hi]
        for (long y = a.lo; y <= a.hi; ++y) {
            const long target = pos - y;
            auto it = acc.find(target);
            if (it == acc.end())
                acc[target] = v;
            else
                it->second += v;
        }
    }
    for (auto& [pos, v] : acc) {
        v *= cplx(inv, 0.0);
        out.set(pos, std::move(v));
    }
    return out;
}

OperatorSequence level_compensated_average(const OperatorSequence& f, int k) {
    if (k < 0) throw Error("level_compensated_average: level must be nonnegative");
    return average(f, {0, 1L << k}) - cond_expectation(f, k);
}

BoundarySets boundary_sets(IntInterval a, long x, int n) {
    if (n < 0) throw Error("boundary_sets: level must be nonnegative");
    BoundarySets out;
    const long lo = x + a.lo;
    const long hi = x + a.hi;
    DyadicInterval c1 = DyadicInterval::containing(lo, n);
    DyadicInterval c2 = DyadicInterval::containing(hi, n);
    auto add_cell = [&](const DyadicInterval& c) {
        for (long pos = c.start; pos < c.start + c.width(); ++pos) {
            out.full.push_back(pos);
            if (pos >= lo && pos <= hi) out.inner.push_back(pos);
        }
    };
    add_cell(c1);
    if (c2.start != c1.start) add_cell(c2);
    std::sort(out.inner.begin(), out.inner.end());
    std::sort(out.full.begin(), out.full.end());
    return out;
}

double seq_lp_norm(const OperatorSequence& f, PExp p) {
    if (p.is_inf()) {
        double m = 0;
        for (const auto& [pos, v] : f.values()) m = std::max(m, v.sup_norm());
        return m;
    }
    double acc = 0;
    const double pv = p.value();
    for (const auto& [pos, v] : f.values())
        for (auto& [s, w] : weighted_singular_values(v)) acc += w * std::pow(s, pv);
    return std::pow(acc, 1.0 / pv);
}

double seq_l2_sq(const OperatorSequence& f) {
    double acc = 0;
    for (const auto& [pos, v] : f.values()) acc += pairing(v, v).real();
    return acc;
}

cplx seq_trace(const OperatorSequence& f) {
    cplx acc = 0;
    for (const auto& [pos, v] : f.values()) acc += trace_of(v);
    return acc;
}

double seq_weak_l1(const OperatorSequence& f) {
    std::vector<std::pair<double, double>> spectrum;
    for (const auto& [pos, v] : f.values())
        for (auto& sw : weighted_singular_values(v)) spectrum.push_back(sw);
    return weak_quasinorm_from_spectrum(std::move(spectrum), 1.0);
}

NormReport bmo_norm(const std::vector<OperatorSequence>& family, Side side) {
    if (family.empty()) throw ShapeMismatch("bmo_norm: empty family");
    const AlgebraShape& shape = family.front().shape();
    const int window = family.front().window();
    for (const auto& f : family)
        if (!(f.shape() == shape) || f.window() != window)
            throw ShapeMismatch("bmo_norm: family members disagree on shape/window");

    double best = 0;
    for (int level = 0; level <= window; ++level) {
        const long w = 1L << level;
        for (long start = 0; start < (1L << window); start += w) {
            std::vector<Element> means;
            means.reserve(family.size());
            for (const auto& f : family) {
                Element m(shape);
                for (long pos = start; pos < start + w; ++pos) m += f.at_or_zero(pos);
                m *= cplx(1.0 / static_cast<double>(w), 0.0);
                means.push_back(std::move(m));
            }
            Element osc(shape);
            for (long pos = start; pos < start + w; ++pos) {
                for (size_t i = 0; i < family.size(); ++i) {
                    Element d = family[i].at_or_zero(pos) - means[i];
                    if (side == Side::row) d = d.adjoint();
                    for (int k = 0; k < osc.blocks(); ++k)
                        osc.block(k) += d.block(k).adjoint() * d.block(k);
                }
            }
            osc *= cplx(1.0 / static_cast<double>(w), 0.0);
            best = std::max(best, osc.sup_norm());
        }
    }
    NormReport r;
    r.p = PExp::infinity();
    r.method = NormMethod::exact_spectral;
    r.tolerance_used = tol::kEigOffdiagRel;
    r.value = std::sqrt(best);
    return r;
}

} // namespace ncerg
