#include "ncerg/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

int AlgebraShape::dim_total() const {
    int d = 0;
    for (int dk : block_dims) d += dk * dk;
    return d;
}

double AlgebraShape::weight_total() const {
    double w = 0;
    for (size_t k = 0; k < block_dims.size(); ++k) w += trace_weights[k] * block_dims[k];
    return w;
}

void AlgebraShape::validate() const {
    if (block_dims.empty() || block_dims.size() != trace_weights.size())
        throw ShapeMismatch("AlgebraShape: block/weight lists must be nonempty and matched");
    for (int d : block_dims)
        if (d < 1) throw ShapeMismatch("AlgebraShape: block dimension < 1");
    for (double w : trace_weights)
        if (!(w > 0)) throw ShapeMismatch("AlgebraShape: trace weight must be positive");
}

Element::Element(AlgebraShape shape) : shape_(std::move(shape)) {
    shape_.validate();
    blocks_.reserve(shape_.block_dims.size());
    for (int d : shape_.block_dims) blocks_.emplace_back(d, d);
}

Element Element::identity(const AlgebraShape& s) {
    Element e(s);
    for (int k = 0; k < e.blocks(); ++k) e.block(k) = CMat::identity(s.block_dims[k]);
    return e;
}

namespace {
void require_same_shape(const Element& a, const Element& b) {
    if (!(a.shape() == b.shape()))
        throw ShapeMismatch("Element: operands live on different algebra shapes");
}
} // namespace

Element& Element::operator+=(const Element& o) {
    require_same_shape(*this, o);
    for (int k = 0; k < blocks(); ++k) blocks_[k] += o.blocks_[k];
    return *this;
}

Element& Element::operator-=(const Element& o) {
    require_same_shape(*this, o);
    for (int k = 0; k < blocks(); ++k) blocks_[k] -= o.blocks_[k];
    return *this;
}

Element& Element::operator*=(cplx s) {
    for (auto& b : blocks_) b *= s;
    return *this;
}

Element Element::adjoint() const {
    Element r(shape_);
    for (int k = 0; k < blocks(); ++k) r.blocks_[k] = blocks_[k].adjoint();
    return r;
}

double Element::frobenius() const {
    double s = 0;
    for (const auto& b : blocks_) {
        double f = b.frobenius();
        s += f * f;
    }
    return std::sqrt(s);
}

Element operator+(Element a, const Element& b) { return a += b; }
Element operator-(Element a, const Element& b) { return a -= b; }
Element operator*(cplx s, Element a) { return a *= s; }
Element operator*(Element a, cplx s) { return a *= s; }

Element operator*(const Element& a, const Element& b) {
    if (!(a.shape() == b.shape()))
        throw ShapeMismatch("Element: operands live on different algebra shapes");
    Element r(a.shape());
    for (int k = 0; k < a.blocks(); ++k) r.block(k) = a.block(k) * b.block(k);
    return r;
}

namespace {

CMat hermitian_part(const CMat& m) {
    CMat h(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

} // namespace

double Element::sup_norm() const {
    double m = 0;
    for (const auto& b : blocks_) {
        if (b.max_abs() == 0.0) continue;
        HermEig e = eig_hermitian_matrix(hermitian_part(b.adjoint() * b));
        if (!e.values.empty()) m = std::max(m, std::sqrt(std::max(0.0, e.values.front())));
    }
    return m;
}

bool Element::is_selfadjoint(double tolerance) const {
    // i(x - x*) is exactly Hermitian, so its top eigenvalue is ||x - x*||_inf
    for (const auto& b : blocks_) {
        CMat d(b.rows(), b.cols());
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j)
                d(i, j) = cplx(0, 1) * (b(i, j) - std::conj(b(j, i)));
        if (d.max_abs() == 0.0) continue;
        HermEig e = eig_hermitian_matrix(d);
        double top = 0;
        for (double v : e.values) top = std::max(top, std::abs(v));
        if (top > tolerance) return false;
    }
    return true;
}

bool Element::is_positive(double tolerance) const {
    if (!is_selfadjoint(std::max(tolerance, tol::kSelfAdjoint))) return false;
    for (const auto& b : blocks_) {
        HermEig e = eig_hermitian_matrix(hermitian_part(b));
        if (!e.values.empty() && e.values.back() < -tolerance) return false;
    }
    return true;
}

bool Element::is_projection(double tolerance) const {
    if (!is_selfadjoint(tolerance)) return false;
    Element d = (*this) * (*this) - (*this);
    return d.sup_norm() <= tolerance;
}

Element EigenSystem::reconstruct() const {
    return apply([](double t) { return t; });
}

Element EigenSystem::apply(const std::function<double(double)>& fn) const {
    Element r(shape);
    for (int k = 0; k < r.blocks(); ++k) {
        const CMat& u = basis.block(k);
        const int d = u.rows();
        CMat lam(d, d);
        for (int i = 0; i < d; ++i) lam(i, i) = fn(eigenvalues[k][i]);
        r.block(k) = u * lam * u.adjoint();
    }
    return r;
}

EigenSystem eig_hermitian(const Element& x) {
    if (!x.is_selfadjoint(tol::kSelfAdjoint))
        throw NotSelfAdjoint("eig_hermitian: input is not selfadjoint");
    EigenSystem out;
    out.shape = x.shape();
    out.basis = Element(x.shape());
    out.tolerance_used = tol::kEigOffdiagRel;
    out.eigenvalues.resize(x.blocks());
    for (int k = 0; k < x.blocks(); ++k) {
        HermEig e = eig_hermitian_matrix(hermitian_part(x.block(k)));
        out.eigenvalues[k] = std::move(e.values);
        out.basis.block(k) = std::move(e.vectors);
    }
    return out;
}

namespace {

Element resymmetrize(Element x) {
    for (int k = 0; k < x.blocks(); ++k) x.block(k) = hermitian_part(x.block(k));
    return x;
}

} // namespace

Element func_calc(const Element& x, const FunctionSpec& f) {
    if (f.kind == FunctionSpec::Kind::abs_value) {
        // |x| through x*x; valid for every x
        return modulus(x);
    }
    EigenSystem es = eig_hermitian(x);
    switch (f.kind) {
        case FunctionSpec::Kind::indicator: {
            Element p = es.apply([&](double t) { return f.interval.contains(t) ? 1.0 : 0.0; });
            return resymmetrize(std::move(p));
        }
        case FunctionSpec::Kind::power:
        case FunctionSpec::Kind::sqrt: {
            const double a = (f.kind == FunctionSpec::Kind::sqrt) ? 0.5 : f.alpha;
            if (!(a > 0))
                throw InvalidFunctionSpec("func_calc: power exponent must be positive");
            double floor_eig = 0;
            for (const auto& evs : es.eigenvalues)
                for (double t : evs) floor_eig = std::min(floor_eig, t);
            const double allow = tol::kPositive * std::max(1.0, x.sup_norm());
            if (floor_eig < -std::max(allow, 1e-9))
                throw InvalidFunctionSpec("func_calc: fractional power of a non-positive element");
            Element r = es.apply([&](double t) { return std::pow(std::max(t, 0.0), a); });
            return resymmetrize(std::move(r));
        }
        default:
            throw InvalidFunctionSpec("func_calc: unknown function kind");
    }
}

Element modulus(const Element& x) {
    Element sq(x.shape());
    for (int k = 0; k < x.blocks(); ++k)
        sq.block(k) = hermitian_part(x.block(k).adjoint() * x.block(k));
    EigenSystem es = eig_hermitian(sq);
    Element r = es.apply([](double t) { return std::sqrt(std::max(t, 0.0)); });
    return resymmetrize(std::move(r));
}

cplx trace_of(const Element& x) {
    cplx t = 0;
    for (int k = 0; k < x.blocks(); ++k)
        t += x.shape().trace_weights[k] * x.block(k).trace();
    return t;
}

Element support_projection(const Element& x) {
    if (!x.is_positive(1e-9 * std::max(1.0, x.sup_norm())))
        throw NotPositive("support_projection: input is not positive");
    const double cut = tol::kSupportCutRel * x.sup_norm();
    const double inf = std::numeric_limits<double>::infinity();
    return func_calc(x, FunctionSpec::indicator({cut, inf, true, true}));
}

std::pair<cplx, Element> trace_and_support(const Element& x) {
    return {trace_of(x), support_projection(x)};
}

Element random_element(const AlgebraShape& shape, RandomKind kind, Rng& rng) {
    shape.validate();
    Element g(shape);
    for (int k = 0; k < g.blocks(); ++k) {
        CMat& b = g.block(k);
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j) b(i, j) = rng.cnormal();
    }
    switch (kind) {
        case RandomKind::generic:
            return g;
        case RandomKind::hermitian: {
            Element h(shape);
            for (int k = 0; k < g.blocks(); ++k)
                h.block(k) = 0.5 * (g.block(k) + g.block(k).adjoint());
            return h;
        }
        case RandomKind::positive: {
            Element p(shape);
            for (int k = 0; k < g.blocks(); ++k)
                p.block(k) = g.block(k).adjoint() * g.block(k);
            return resymmetrize(std::move(p));
        }
        case RandomKind::unitary: {
            Element u(shape);
            for (int k = 0; k < g.blocks(); ++k) {
                CMat m = g.block(k);
                std::vector<int> cols(m.cols());
                for (int j = 0; j < m.cols(); ++j) cols[j] = j;
                // Gram-Schmidt on Gaussian columns gives Haar-distributed u
                for (size_t a = 0; a < cols.size(); ++a) {
                    for (size_t b2 = 0; b2 < a; ++b2) {
                        cplx dot = 0;
                        for (int i = 0; i < m.rows(); ++i)
                            dot += std::conj(m(i, cols[b2])) * m(i, cols[a]);
                        for (int i = 0; i < m.rows(); ++i)
                            m(i, cols[a]) -= dot * m(i, cols[b2]);
                    }
                    double nrm = 0;
                    for (int i = 0; i < m.rows(); ++i) nrm += std::norm(m(i, cols[a]));
                    nrm = std::sqrt(nrm);
                    for (int i = 0; i < m.rows(); ++i) m(i, cols[a]) /= nrm;
                }
                u.block(k) = m;
            }
            return u;
        }
        case RandomKind::projection: {
            Element h(shape);
            for (int k = 0; k < g.blocks(); ++k)
                h.block(k) = 0.5 * (g.block(k) + g.block(k).adjoint());
            Element p(shape);
            for (int k = 0; k < h.blocks(); ++k) {
                HermEig e = eig_hermitian_matrix(h.block(k));
                const int d = h.block(k).rows();
                const int keep = (d + 1) / 2; // top half of the spectrum
                CMat m(d, d);
                for (int j = 0; j < keep; ++j)
                    for (int i = 0; i < d; ++i)
                        for (int l = 0; l < d; ++l)
                            m(i, l) += e.vectors(i, j) * std::conj(e.vectors(l, j));
                p.block(k) = hermitian_part(m);
            }
            return p;
        }
    }
    throw Error("random_element: unreachable");
}

Element random_element(const AlgebraShape& shape, RandomKind kind, std::uint64_t seed) {
    Rng rng(seed);
    return random_element(shape, kind, rng);
}

std::pair<Element, Element> random_orthogonal_projections(const AlgebraShape& shape, Rng& rng) {
    Element u = random_element(shape, RandomKind::unitary, rng);
    Element e(shape), f(shape);
    for (int k = 0; k < e.blocks(); ++k) {
        const int d = shape.block_dims[k];
        // disjoint diagonal 0/1 patterns, conjugated by u
        CMat de(d, d), df(d, d);
        bool any_e = false, any_f = false;
        for (int i = 0; i < d; ++i) {
            switch (rng.uniform_int(0, 2)) {
                case 0: de(i, i) = 1.0; any_e = true; break;
                case 1: df(i, i) = 1.0; any_f = true; break;
                default: break;
            }
        }
        if (d >= 2 && (!any_e || !any_f)) {
            de = CMat::zeros(d, d);
            df = CMat::zeros(d, d);
            de(0, 0) = 1.0;
            df(d - 1, d - 1) = 1.0;
        }
        e.block(k) = u.block(k) * de * u.block(k).adjoint();
        f.block(k) = u.block(k) * df * u.block(k).adjoint();
    }
    return {resymmetrize(std::move(e)), resymmetrize(std::move(f))};
}

} // namespace ncerg
