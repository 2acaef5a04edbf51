#include "ncerg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

std::vector<cplx> vectorize(const Element& x) {
    std::vector<cplx> v;
    v.reserve(static_cast<size_t>(x.shape().dim_total()));
    for (int k = 0; k < x.blocks(); ++k)
        for (const cplx& c : x.block(k).data()) v.push_back(c);
    return v;
}

Element unvectorize(const AlgebraShape& shape, const std::vector<cplx>& v) {
    Element x(shape);
    size_t idx = 0;
    for (int k = 0; k < x.blocks(); ++k)
        for (cplx& c : x.block(k).data()) c = v[idx++];
    return x;
}

SuperOperator SuperOperator::identity(const AlgebraShape& s) {
    SuperOperator t;
    t.dom_ = s;
    t.cod_ = s;
    t.mat_ = CMat::identity(s.dim_total());
    t.cert_.positive = true;
    t.cert_.lamperti = true;
    t.cert_.unitary_conjugation = true;
    t.cert_.power_bound = 1.0;
    return t;
}

SuperOperator SuperOperator::from_matrix(AlgebraShape domain, AlgebraShape codomain, CMat m,
                                         Certificates cert) {
    domain.validate();
    codomain.validate();
    if (m.rows() != codomain.dim_total() || m.cols() != domain.dim_total())
        throw ShapeMismatch("SuperOperator: matrix dimensions do not match the shapes");
    SuperOperator t;
    t.dom_ = std::move(domain);
    t.cod_ = std::move(codomain);
    t.mat_ = std::move(m);
    t.cert_ = std::move(cert);
    return t;
}

SuperOperator SuperOperator::from_action(const AlgebraShape& domain,
                                         const AlgebraShape& codomain,
                                         const std::function<Element(const Element&)>& action,
                                         Certificates cert) {
    const int dd = domain.dim_total();
    const int dc = codomain.dim_total();
    CMat m(dc, dd);
    std::vector<cplx> basis(static_cast<size_t>(dd), cplx(0.0));
    for (int j = 0; j < dd; ++j) {
        basis[static_cast<size_t>(j)] = 1.0;
        Element ej = unvectorize(domain, basis);
        basis[static_cast<size_t>(j)] = 0.0;
        std::vector<cplx> col = vectorize(action(ej));
        for (int i = 0; i < dc; ++i) m(i, j) = col[static_cast<size_t>(i)];
    }
    return from_matrix(domain, codomain, std::move(m), std::move(cert));
}

Element SuperOperator::apply(const Element& x) const {
    if (!(x.shape() == dom_))
        throw ShapeMismatch("SuperOperator: input lives on the wrong shape");
    std::vector<cplx> v = vectorize(x);
    std::vector<cplx> out(static_cast<size_t>(cod_.dim_total()), cplx(0.0));
    for (int i = 0; i < mat_.rows(); ++i) {
        cplx acc = 0;
        for (int j = 0; j < mat_.cols(); ++j) acc += mat_(i, j) * v[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = acc;
    }
    return unvectorize(cod_, out);
}

SuperOperator SuperOperator::compose(const SuperOperator& inner) const {
    if (!(inner.cod_ == dom_))
        throw ShapeMismatch("SuperOperator: composition shapes do not chain");
    Certificates cert;
    cert.positive = cert_.positive && inner.cert_.positive;
    cert.lamperti = cert_.lamperti && inner.cert_.lamperti;
    if (cert_.isometry_p && inner.cert_.isometry_p &&
        *cert_.isometry_p == *inner.cert_.isometry_p)
        cert.isometry_p = cert_.isometry_p;
    return from_matrix(inner.dom_, cod_, mat_ * inner.mat_, cert);
}

SuperOperator SuperOperator::power(int k) const {
    if (!endomorphism()) throw ShapeMismatch("SuperOperator: power of a rectangular map");
    if (k == 0) return identity(dom_);
    const bool neg = k < 0;
    const CMat base = neg ? inverse_map().mat_ : mat_;
    int e = neg ? -k : k;
    CMat acc = CMat::identity(dom_.dim_total());
    CMat sq = base;
    while (e > 0) {
        if (e & 1) acc = acc * sq;
        sq = sq * sq;
        e >>= 1;
    }
    Certificates cert;
    cert.positive = cert_.positive;
    cert.lamperti = cert_.lamperti && !neg;
    cert.isometry_p = cert_.isometry_p;
    cert.power_bound = cert_.power_bound;
    return from_matrix(dom_, cod_, std::move(acc), cert);
}

SuperOperator SuperOperator::scaled(cplx s) const {
    CMat m = mat_;
    m *= s;
    return from_matrix(dom_, cod_, std::move(m));
}

SuperOperator SuperOperator::plus(const SuperOperator& o) const {
    if (!(o.dom_ == dom_) || !(o.cod_ == cod_))
        throw ShapeMismatch("SuperOperator: sum shapes differ");
    return from_matrix(dom_, cod_, mat_ + o.mat_);
}

SuperOperator SuperOperator::adjoint_wrt_pairing() const {
    // pairing(T x, y) = pairing(x, T' y) forces T' = W_dom^{-1} M* W_cod with
    // W the diagonal of block trace weights on vectorized coordinates.
    std::vector<double> wd, wc;
    for (int k = 0; k < dom_.blocks(); ++k)
        for (int i = 0; i < dom_.block_dims[k] * dom_.block_dims[k]; ++i)
            wd.push_back(dom_.trace_weights[k]);
    for (int k = 0; k < cod_.blocks(); ++k)
        for (int i = 0; i < cod_.block_dims[k] * cod_.block_dims[k]; ++i)
            wc.push_back(cod_.trace_weights[k]);
    CMat m(dom_.dim_total(), cod_.dim_total());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            m(i, j) = std::conj(mat_(j, i)) *
                      (wc[static_cast<size_t>(j)] / wd[static_cast<size_t>(i)]);
    return from_matrix(cod_, dom_, std::move(m));
}

bool SuperOperator::invertible() const {
    if (!endomorphism()) return false;
    try {
        (void)inverse_map();
        return true;
    } catch (const NotInvertible&) {
        return false;
    }
}

SuperOperator SuperOperator::inverse_map() const {
    if (!endomorphism()) throw NotInvertible("SuperOperator: rectangular map");
    if (!inv_cache_) inv_cache_ = inverse(mat_);
    return from_matrix(dom_, cod_, *inv_cache_);
}

double SuperOperator::condition_estimate() const {
    return mat_.frobenius() * inverse_map().mat_.frobenius();
}

SuperOperator make_unitary_conjugation(const Element& u) {
    Element defect = u.adjoint() * u - Element::identity(u.shape());
    if (defect.sup_norm() > tol::kUnitary)
        throw NotUnitary("make_unitary_conjugation: u is not unitary");
    Certificates cert;
    cert.unitary_conjugation = true;
    cert.positive = true;
    cert.lamperti = true;
    cert.power_bound = 1.0;
    return SuperOperator::from_action(
        u.shape(), u.shape(), [&u](const Element& x) { return u * x * u.adjoint(); }, cert);
}

void YeadonTriple::validate() const {
    shape.validate();
    const int nb = shape.blocks();
    if (static_cast<int>(perm.size()) != nb || static_cast<int>(anti.size()) != nb ||
        static_cast<int>(unitaries.size()) != nb)
        throw BlockDimMismatch("YeadonTriple: per-block data lists mismatch");
    std::vector<bool> hit(static_cast<size_t>(nb), false);
    for (int k = 0; k < nb; ++k) {
        const int tkk = perm[static_cast<size_t>(k)];
        if (tkk < 0 || tkk >= nb || hit[static_cast<size_t>(tkk)])
            throw BlockDimMismatch("YeadonTriple: perm is not a block permutation");
        hit[static_cast<size_t>(tkk)] = true;
        if (shape.block_dims[static_cast<size_t>(tkk)] != shape.block_dims[static_cast<size_t>(k)])
            throw BlockDimMismatch("YeadonTriple: permuted block dimensions differ");
        const CMat& uk = unitaries[static_cast<size_t>(k)];
        if (uk.rows() != shape.block_dims[static_cast<size_t>(k)] || uk.cols() != uk.rows())
            throw BlockDimMismatch("YeadonTriple: conjugating unitary has wrong size");
        CMat defect = uk.adjoint() * uk - CMat::identity(uk.rows());
        if (defect.max_abs() > tol::kUnitary)
            throw NotUnitary("YeadonTriple: block unitary fails u*u = 1");
    }
    if (!(p >= 1.0)) throw InvalidP("YeadonTriple: exponent must satisfy p >= 1");
    Element wd = w.adjoint() * w - Element::identity(shape);
    if (wd.sup_norm() > tol::kUnitary) throw NotUnitary("YeadonTriple: w is not unitary");
}

Element YeadonTriple::derived_b() const {
    Element b(shape);
    for (int k = 0; k < shape.blocks(); ++k) {
        const int t = perm[static_cast<size_t>(k)];
        const double beta = std::pow(
            shape.trace_weights[static_cast<size_t>(k)] / shape.trace_weights[static_cast<size_t>(t)],
            1.0 / p);
        b.block(t) = beta * CMat::identity(shape.block_dims[static_cast<size_t>(t)]);
    }
    return b;
}

Element YeadonTriple::jordan_apply(const Element& x) const {
    Element r(shape);
    for (int k = 0; k < shape.blocks(); ++k) {
        const int t = perm[static_cast<size_t>(k)];
        const CMat& uk = unitaries[static_cast<size_t>(k)];
        const CMat base = anti[static_cast<size_t>(k)] ? x.block(k).transpose() : x.block(k);
        r.block(t) = uk * base * uk.adjoint();
    }
    return r;
}

Element YeadonTriple::hom_indicator() const {
    Element e(shape);
    for (int k = 0; k < shape.blocks(); ++k)
        if (!anti[static_cast<size_t>(k)]) {
            const int t = perm[static_cast<size_t>(k)];
            e.block(t) = CMat::identity(shape.block_dims[static_cast<size_t>(t)]);
        }
    return e;
}

Element YeadonTriple::anti_indicator() const {
    return Element::identity(shape) - hom_indicator();
}

SuperOperator make_yeadon(const YeadonTriple& t) {
    t.validate();
    const Element b = t.derived_b();

    // sampled paranoia check of the trace condition tau(b^p J(x)) = tau(x)
    Element bp(t.shape);
    for (int k = 0; k < bp.blocks(); ++k) {
        const int d = t.shape.block_dims[static_cast<size_t>(k)];
        const double beta = b.block(k)(0, 0).real();
        bp.block(k) = std::pow(beta, t.p) * CMat::identity(d);
    }
    Rng rng(0x452821E638D01377ull);
    for (int s = 0; s < 50; ++s) {
        Element x = random_element(t.shape, RandomKind::positive, rng);
        const double lhs = trace_of(bp * t.jordan_apply(x)).real();
        const double rhs = trace_of(x).real();
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs)))
            throw TraceConditionViolated("make_yeadon: derived b fails the trace condition");
    }

    const bool w_is_identity =
        (t.w - Element::identity(t.shape)).frobenius() == 0.0;
    Certificates cert;
    cert.lamperti = true;
    cert.isometry_p = t.p;
    cert.positive = w_is_identity;
    return SuperOperator::from_action(
        t.shape, t.shape,
        [&t, &b](const Element& x) { return t.w * (b * t.jordan_apply(x)); }, cert);
}

SuperOperator make_power_bounded(const Element& a, const Element& u) {
    EigenSystem es = eig_hermitian(a);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& evs : es.eigenvalues)
        for (double v : evs) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(lo >= tol::kInvertibleMinEig))
        throw NotInvertible("make_power_bounded: a must be positive and invertible");
    Element a_inv = es.apply([](double v) { return 1.0 / v; });
    SuperOperator phi = make_unitary_conjugation(u);
    SuperOperator sandwich = SuperOperator::from_action(
        a.shape(), a.shape(), [&a](const Element& x) { return a * x * a; });
    SuperOperator unsandwich = SuperOperator::from_action(
        a.shape(), a.shape(), [&a_inv](const Element& x) { return a_inv * x * a_inv; });
    SuperOperator t = sandwich.compose(phi).compose(unsandwich);
    const double kappa = std::pow(hi / lo, 2.0);
    t.certificates().power_bound = kappa;
    return t;
}

CertReport class_certify(const SuperOperator& t, OperatorClass cls, int trials,
                         double p_for_isometry, std::uint64_t seed) {
    if (trials < 1) throw Error("class_certify: trials must be >= 1");
    Rng rng(seed);
    CertReport rep;
    rep.cls = cls;
    rep.trials = trials;
    switch (cls) {
        case OperatorClass::lamperti: {
            rep.certified_by_construction = t.certificates().lamperti;
            for (int s = 0; s < trials; ++s) {
                auto [e, f] = random_orthogonal_projections(t.domain(), rng);
                Element te = t.apply(e);
                Element tf = t.apply(f);
                rep.max_violation =
                    std::max({rep.max_violation, (te.adjoint() * tf).frobenius(),
                              (te * tf.adjoint()).frobenius()});
            }
            break;
        }
        case OperatorClass::isometry: {
            rep.certified_by_construction =
                t.certificates().isometry_p && *t.certificates().isometry_p == p_for_isometry;
            const PExp p = PExp::finite(p_for_isometry);
            for (int s = 0; s < trials; ++s) {
                Element x = random_element(t.domain(), RandomKind::generic, rng);
                const double in = lp_norm(x, p).value;
                const double out = lp_norm(t.apply(x), p).value;
                if (in > 0)
                    rep.max_violation = std::max(rep.max_violation, std::abs(out - in) / in);
            }
            break;
        }
        case OperatorClass::positive: {
            rep.certified_by_construction = t.certificates().positive;
            for (int s = 0; s < trials; ++s) {
                Element x = random_element(t.domain(), RandomKind::positive, rng);
                Element y = t.apply(x);
                double herm = (y - y.adjoint()).frobenius();
                Element sym(y.shape());
                for (int k = 0; k < y.blocks(); ++k) {
                    const CMat& bk = y.block(k);
                    CMat h(bk.rows(), bk.cols());
                    for (int i = 0; i < bk.rows(); ++i)
                        for (int j = 0; j < bk.cols(); ++j)
                            h(i, j) = 0.5 * (bk(i, j) + std::conj(bk(j, i)));
                    sym.block(k) = h;
                }
                double dip = 0;
                for (int k = 0; k < sym.blocks(); ++k) {
                    HermEig e = eig_hermitian_matrix(sym.block(k));
                    if (!e.values.empty()) dip = std::min(dip, e.values.back());
                }
                rep.max_violation = std::max({rep.max_violation, herm, -dip});
            }
            break;
        }
    }
    return rep;
}

ExtensionRatio extension_rc_check(const SuperOperator& t, PExp p, const ElementSequence& seq,
                                  const RcNormOptions& opt) {
    seq.validate();
    ElementSequence mapped{t.codomain(), {}};
    mapped.items.reserve(seq.items.size());
    for (const auto& x : seq.items) mapped.items.push_back(t.apply(x));
    ExtensionRatio out;
    out.denominator = rc_norm(seq, p, opt).report;
    out.numerator = rc_norm(mapped, p, opt).report;
    out.ratio = (out.denominator.value > 0) ? out.numerator.value / out.denominator.value : 0.0;
    return out;
}

DilationWitness trivial_dilation_witness(const SuperOperator& isometry, int horizon, double p) {
    DilationWitness w;
    w.horizon = horizon;
    w.p = p;
    w.q = SuperOperator::identity(isometry.domain());
    w.j = SuperOperator::identity(isometry.domain());
    w.u = isometry;
    return w;
}

DilationReport dilation_verify(const SuperOperator& t, const DilationWitness& w, int samples,
                               std::uint64_t seed) {
    if (!(w.j.domain() == t.domain()) || !(w.q.codomain() == t.codomain()) ||
        !(w.u.domain() == w.j.codomain()) || !(w.u.codomain() == w.u.domain()) ||
        !(w.q.domain() == w.u.codomain()))
        throw ShapeMismatch("dilation_verify: witness shapes do not chain");

    DilationReport rep;
    Rng rng(seed);
    const PExp p = PExp::finite(w.p);

    std::vector<Element> probes;
    probes.reserve(static_cast<size_t>(samples));
    for (int s = 0; s < samples; ++s)
        probes.push_back(random_element(t.domain(), RandomKind::generic, rng));

    rep.per_n_defect.resize(static_cast<size_t>(w.horizon) + 1, 0.0);
    for (const Element& x : probes) {
        const double xn = lp_norm(x, p).value;
        if (!(xn > 0)) continue;
        Element tx = x;                 // T^n x, updated incrementally
        Element ux = w.j.apply(x);      // U^n J x
        for (int n = 0; n <= w.horizon; ++n) {
            Element lhs = tx;
            Element rhs = w.q.apply(ux);
            const double defect = lp_norm(lhs - rhs, p).value / xn;
            rep.per_n_defect[static_cast<size_t>(n)] =
                std::max(rep.per_n_defect[static_cast<size_t>(n)], defect);
            if (n < w.horizon) {
                tx = t.apply(tx);
                ux = w.u.apply(ux);
            }
        }
    }
    for (double d : rep.per_n_defect) rep.max_defect = std::max(rep.max_defect, d);

    for (int s = 0; s < std::max(8, samples / 4); ++s) {
        Element xm = random_element(t.domain(), RandomKind::generic, rng);
        Element xa = random_element(w.u.domain(), RandomKind::generic, rng);
        const double nm = lp_norm(xm, p).value;
        const double na = lp_norm(xa, p).value;
        if (na > 0) {
            rep.q_contraction_excess = std::max(
                rep.q_contraction_excess, lp_norm(w.q.apply(xa), p).value / na - 1.0);
            rep.u_isometry_defect =
                std::max(rep.u_isometry_defect,
                         std::abs(lp_norm(w.u.apply(xa), p).value / na - 1.0));
        }
        if (nm > 0)
            rep.j_contraction_excess = std::max(
                rep.j_contraction_excess, lp_norm(w.j.apply(xm), p).value / nm - 1.0);
    }
    return rep;
}

} // namespace ncerg
