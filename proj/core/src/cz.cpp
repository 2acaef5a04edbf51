#include "ncerg/cz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

namespace {

inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

CMat hermitian_part(const CMat& m) {
    CMat h(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

Element symmetrized(Element x) {
    for (int k = 0; k < x.blocks(); ++k) x.block(k) = hermitian_part(x.block(k));
    return x;
}

// Snap a near-projection back to an exact one: eigenvalues above 1/2 map to
// one, the rest to zero.  Guards against drift across the m_lambda-deep
// recursion of spectral calculi.
Element round_projection(const Element& x) {
    EigenSystem es = eig_hermitian(symmetrized(x));
    Element p = es.apply([](double t) { return t > 0.5 ? 1.0 : 0.0; });
    return symmetrized(std::move(p));
}

double max_eigenvalue(const Element& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < x.blocks(); ++k) {
        HermEig e = eig_hermitian_matrix(hermitian_part(x.block(k)));
        if (!e.values.empty()) m = std::max(m, e.values.front());
    }
    return m;
}

double min_eigenvalue(const Element& x) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < x.blocks(); ++k) {
        HermEig e = eig_hermitian_matrix(hermitian_part(x.block(k)));
        if (!e.values.empty()) m = std::min(m, e.values.back());
    }
    return m;
}

bool is_identity(const Element& x) {
    return (x - Element::identity(x.shape())).frobenius() == 0.0;
}

} // namespace

Element CuculescuResult::q_at(int n, long pos) const {
    if (n >= m_lambda) return Element::identity(shape);
    if (n < 0) throw Error("CuculescuResult: negative level");
    const long w = 1L << n;
    const long start = floor_div(pos, w) * w;
    const auto& cells = q_cells[static_cast<size_t>(n)];
    auto it = cells.find(start);
    return it == cells.end() ? Element::identity(shape) : it->second;
}

Element CuculescuResult::p_at(int n, long pos) const {
    if (n < 0 || n >= m_lambda) return Element::zero(shape);
    return q_at(n + 1, pos) - q_at(n, pos);
}

IntInterval CuculescuResult::nontrivial_range() const {
    const int l = std::max(window, m_lambda);
    return {0, (1L << l) - 1};
}

OperatorSequence CuculescuResult::q_sequence(int n, IntInterval range) const {
    OperatorSequence out(shape, window);
    for (long pos = range.lo; pos <= range.hi; ++pos) out.set(pos, q_at(n, pos));
    return out;
}

CuculescuResult cuculescu(const OperatorSequence& f, double lambda) {
    if (!(lambda > 0)) throw LambdaNonpositive("cuculescu: lambda must be positive");
    if (f.empty()) {
        CuculescuResult r;
        r.shape = f.shape();
        r.window = f.window();
        r.lambda = lambda;
        r.m_lambda = 0;
        r.q_cells.resize(1);
        return r;
    }
    if (!f.is_positive(1e-9)) throw NotPositive("cuculescu: sequence is not positive");
    if (!f.support_in_window())
        throw ShapeMismatch("cuculescu: support leaves the window");

    CuculescuResult r;
    r.shape = f.shape();
    r.window = f.window();
    r.lambda = lambda;

    // operator mass bounds the sup norm of every martingale level
    double op_mass = 0;
    for (const auto& [pos, v] : f.values()) op_mass += v.sup_norm();
    const double l1 = seq_lp_norm(f, PExp::finite(1.0));
    const double mass = std::max(op_mass, l1);
    const int n_max = f.window() +
                      static_cast<int>(std::ceil(std::log2(std::max(mass / lambda, 2.0)))) + 1;

    int m = -1;
    std::vector<std::map<long, Element>> means_by_level;
    for (int n = 0; n <= n_max; ++n) {
        means_by_level.push_back(cell_means(f, n));
        double top = 0;
        for (const auto& [start, v] : means_by_level.back())
            top = std::max(top, max_eigenvalue(v));
        if (top <= lambda + 1e-12) {
            m = n;
            break;
        }
    }
    if (m < 0)
        throw Error("cuculescu: martingale did not fall below lambda within the search bound");

    r.m_lambda = m;
    r.q_cells.assign(static_cast<size_t>(m) + 1, {});

    const double inf = std::numeric_limits<double>::infinity();
    for (int n = m - 1; n >= 0; --n) {
        const long w = 1L << n;
        const long pw = 2 * w;
        std::set<long> candidates;
        for (const auto& [start, v] : means_by_level[static_cast<size_t>(n)])
            candidates.insert(start);
        for (const auto& [pstart, q] : r.q_cells[static_cast<size_t>(n) + 1]) {
            candidates.insert(pstart);
            candidates.insert(pstart + w);
        }
        for (long start : candidates) {
            const long parent = floor_div(start, pw) * pw;
            Element q_parent = Element::identity(r.shape);
            {
                const auto& up = r.q_cells[static_cast<size_t>(n) + 1];
                auto it = up.find(parent);
                if (it != up.end()) q_parent = it->second;
            }
            const auto& means = means_by_level[static_cast<size_t>(n)];
            auto fit = means.find(start);
            Element q_cell = q_parent;
            if (fit != means.end()) {
                const Element compressed = symmetrized(q_parent * fit->second * q_parent);
                const Element above =
                    func_calc(compressed, FunctionSpec::indicator({lambda, inf, true, true}));
                q_cell = round_projection(q_parent - above);
            }
            if (!is_identity(q_cell)) r.q_cells[static_cast<size_t>(n)][start] = q_cell;
        }
    }
    return r;
}

IntInterval five_i(const DyadicInterval& cell) {
    const long w = cell.width();
    return {cell.start - 2 * w, cell.start + 3 * w - 1};
}

CZResult cz_decompose(const OperatorSequence& f, double lambda) {
    CZResult out;
    out.stopping = cuculescu(f, lambda);
    const CuculescuResult& cu = out.stopping;
    const int m = cu.m_lambda;

    out.good = OperatorSequence(f.shape(), f.window());
    for (const auto& [pos, v] : f.values()) {
        const Element q = cu.q_final(pos);
        out.good.set(pos, symmetrized(q * v * q));
    }

    out.bad.reserve(static_cast<size_t>(m));
    for (int n = 0; n < m; ++n) {
        const long w = 1L << n;
        OperatorSequence bn(f.shape(), f.window());
        for (const auto& [start, f_mean] : cell_means(f, n)) {
            const Element p = cu.p_at(n, start);
            if (p.frobenius() == 0.0) continue;
            const Element qn = cu.q_at(n, start);
            const Element qn1 = cu.q_at(n + 1, start);
            // good part picks up the diagonal compression on this cell
            const Element diag = symmetrized(p * f_mean * p);
            for (long pos = start; pos < start + w; ++pos) {
                Element cur = out.good.at_or_zero(pos);
                out.good.set(pos, cur + diag);
                const Element dev = f.at_or_zero(pos) - f_mean;
                Element b = p * dev * qn + qn1 * dev * p;
                if (b.frobenius() > 0.0) bn.set(pos, std::move(b));
            }
        }
        out.bad.push_back(std::move(bn));
    }

    // exceptional projection: join of the stopping increments smeared over 5I
    std::map<long, Element> masses;
    for (int n = 0; n < m; ++n) {
        const long w = 1L << n;
        std::set<long> starts;
        for (const auto& [start, q] : cu.q_cells[static_cast<size_t>(n)]) starts.insert(start);
        for (const auto& [start, q] : cu.q_cells[static_cast<size_t>(n) + 1]) {
            starts.insert(start);
            starts.insert(start + w);
        }
        for (long start : starts) {
            const Element p = cu.p_at(n, start);
            if (p.frobenius() == 0.0) continue;
            const IntInterval box = five_i({n, start});
            for (long pos = box.lo; pos <= box.hi; ++pos) {
                auto it = masses.find(pos);
                if (it == masses.end())
                    masses[pos] = p;
                else
                    it->second += p;
            }
        }
    }
    if (masses.empty()) {
        out.zeta_range = {0, -1};
    } else {
        out.zeta_range = {masses.begin()->first, masses.rbegin()->first};
        for (auto& [pos, sum] : masses) {
            const Element s = support_projection(symmetrized(sum));
            out.zeta[pos] = round_projection(Element::identity(f.shape()) - s);
        }
    }
    return out;
}

Element CZResult::zeta_at(long pos) const {
    auto it = zeta.find(pos);
    return it == zeta.end() ? Element::identity(stopping.shape) : it->second;
}

bool VerificationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

void push_check(VerificationReport& rep, std::string name, double measured, double bound,
                double tolerance) {
    CheckResult c;
    c.name = std::move(name);
    c.measured = measured;
    c.bound = bound;
    c.tolerance = tolerance;
    c.pass = measured <= bound + tolerance;
    rep.checks.push_back(std::move(c));
}

} // namespace

VerificationReport cuculescu_verify(const OperatorSequence& f, double lambda,
                                    const CuculescuResult& r) {
    VerificationReport rep;
    const int m = r.m_lambda;
    const double l1 = f.empty() ? 0.0 : seq_lp_norm(f, PExp::finite(1.0));

    double commutator = 0, compression = 0, level_bound = 0, nesting = 0;
    for (int n = 0; n < m; ++n) {
        for (const auto& [start, f_mean] : cell_means(f, n)) {
            const Element qn = r.q_at(n, start);
            const Element qn1 = r.q_at(n + 1, start);
            const Element a = qn1 * f_mean * qn1;
            commutator = std::max(commutator, (qn * a - a * qn).frobenius());
            compression = std::max(
                compression, -min_eigenvalue(symmetrized(lambda * qn - qn * f_mean * qn)));
            const Element p = qn1 - qn;
            level_bound = std::max(level_bound, symmetrized(p * f_mean * p).sup_norm());
            nesting = std::max(nesting, -min_eigenvalue(symmetrized(qn1 - qn)));
        }
    }
    push_check(rep, "commutation", commutator, 0.0, 1e-10);
    push_check(rep, "compression-bound", compression, 0.0, 1e-9);
    push_check(rep, "level-sup-bound", level_bound, 2.0 * lambda, 1e-9);
    push_check(rep, "nesting", nesting, 0.0, 1e-10);

    const IntInterval range = r.nontrivial_range();
    double mass_q = 0;
    for (const auto& [pos, q] : r.q_cells.empty() ? std::map<long, Element>{} : r.q_cells[0])
        mass_q += (trace_of(Element::identity(r.shape)) - trace_of(q)).real();
    push_check(rep, "stopped-mass", lambda * mass_q, l1, 1e-9);

    double disjoint = 0, partition = 0;
    for (long pos = range.lo; pos <= range.hi; ++pos) {
        std::vector<Element> ps;
        bool any = false;
        for (int n = 0; n < m; ++n) {
            ps.push_back(r.p_at(n, pos));
            if (ps.back().frobenius() > 0) any = true;
        }
        if (!any && is_identity(r.q_final(pos))) continue;
        Element sum = r.q_final(pos);
        for (int a = 0; a < m; ++a) {
            sum += ps[static_cast<size_t>(a)];
            for (int b = a + 1; b < m; ++b)
                disjoint = std::max(
                    disjoint, (ps[static_cast<size_t>(a)] * ps[static_cast<size_t>(b)]).frobenius());
        }
        partition =
            std::max(partition, (sum - Element::identity(r.shape)).frobenius());
    }
    push_check(rep, "disjointness", disjoint, 0.0, 1e-10);
    push_check(rep, "partition-of-unity", partition, 0.0, 1e-12);
    return rep;
}

VerificationReport cz_verify(const OperatorSequence& f, double lambda, const CZResult& r) {
    VerificationReport rep = cuculescu_verify(f, lambda, r.stopping);
    const int m = r.stopping.m_lambda;
    const double l1 = f.empty() ? 0.0 : seq_lp_norm(f, PExp::finite(1.0));
    const double scale = std::max(1.0, seq_lp_norm(f, PExp::infinity()));

    // reconstruction f = g + sum b_n
    OperatorSequence resid = f - r.good;
    for (const auto& bn : r.bad) resid -= bn;
    double rec = 0;
    for (const auto& [pos, v] : resid.values()) rec = std::max(rec, v.frobenius());
    push_check(rep, "reconstruction", rec, 0.0, 1e-11 * scale);

    push_check(rep, "good-l1", seq_lp_norm(r.good, PExp::finite(1.0)), l1, 1e-9);
    push_check(rep, "good-linf", seq_lp_norm(r.good, PExp::infinity()), 2.0 * lambda, 1e-9);

    double mean_zero = 0;
    for (int n = 0; n < m; ++n) {
        OperatorSequence en = cond_expectation(r.bad[static_cast<size_t>(n)], n);
        for (const auto& [pos, v] : en.values()) mean_zero = std::max(mean_zero, v.frobenius());
    }
    push_check(rep, "bad-mean-zero", mean_zero, 0.0, 1e-10 * scale);

    double cancel = 0;
    for (int n = 0; n < m; ++n) {
        const OperatorSequence& bn = r.bad[static_cast<size_t>(n)];
        if (bn.empty()) continue;
        const long w = 1L << n;
        const long xlo = bn.support_min() - 3 * w;
        const long xhi = bn.support_max() + 3 * w;
        for (long x = xlo; x <= xhi; ++x) {
            const Element zx = r.zeta_at(x);
            const IntInterval box = five_i(DyadicInterval::containing(x, n));
            for (long y = std::max(box.lo, bn.support_min());
                 y <= std::min(box.hi, bn.support_max()); ++y) {
                const Element* by = bn.find(y);
                if (!by) continue;
                cancel = std::max(cancel, (zx * (*by) * zx).frobenius());
            }
        }
    }
    push_check(rep, "bad-zeta-cancellation", cancel, 0.0, 1e-10 * scale);

    double zeta_mass = 0;
    for (const auto& [pos, z] : r.zeta)
        zeta_mass += (trace_of(Element::identity(f.shape())) - trace_of(z)).real();
    push_check(rep, "zeta-mass", lambda * zeta_mass, 5.0 * l1, 1e-9);
    return rep;
}

} // namespace ncerg
