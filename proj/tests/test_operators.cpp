#include <doctest.h>

#include <cmath>

#include "ncerg/errors.hpp"
#include "ncerg/operators.hpp"

using namespace ncerg;

namespace {

const AlgebraShape kM2{{2}, {1.0}};
const AlgebraShape kTwoBlock{{2, 2}, {1.0, 2.0}};

YeadonTriple swap_triple(double p, bool positive, std::uint64_t seed) {
    Rng rng(seed);
    YeadonTriple t;
    t.shape = kTwoBlock;
    t.perm = {1, 0};
    t.anti = {false, false};
    Element u = random_element(kTwoBlock, RandomKind::unitary, rng);
    t.unitaries = {u.block(1), u.block(0)};
    t.w = positive ? Element::identity(kTwoBlock)
                   : random_element(kTwoBlock, RandomKind::unitary, rng);
    t.p = p;
    return t;
}

} // namespace

TEST_CASE("superoperator algebra basics") {
    Rng rng(50);
    SuperOperator id = SuperOperator::identity(kM2);
    Element x = random_element(kM2, RandomKind::generic, rng);
    CHECK((id.apply(x) - x).frobenius() == 0.0);

    Element u = random_element(kM2, RandomKind::unitary, rng);
    SuperOperator t = make_unitary_conjugation(u);
    CHECK((t.power(0).matrix() - CMat::identity(4)).frobenius() == 0.0);

    Element v = random_element(kM2, RandomKind::unitary, rng);
    SuperOperator s = make_unitary_conjugation(v);
    Element y = random_element(kM2, RandomKind::generic, rng);
    CHECK((t.compose(s).apply(y) - t.apply(s.apply(y))).frobenius() <= 1e-12);
}

TEST_CASE("adjoint against the pairing bracket") {
    Rng rng(51);
    AlgebraShape shape{{2, 1}, {1.0, 2.0}};
    CMat m(shape.dim_total(), shape.dim_total());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rng.cnormal();
    SuperOperator t = SuperOperator::from_matrix(shape, shape, m);
    SuperOperator ta = t.adjoint_wrt_pairing();
    for (int trial = 0; trial < 20; ++trial) {
        Element x = random_element(shape, RandomKind::generic, rng);
        Element y = random_element(shape, RandomKind::generic, rng);
        const cplx lhs = pairing(t.apply(x), y);
        const cplx rhs = pairing(x, ta.apply(y));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
    // involution (weights are powers of two, so the ratios cancel exactly)
    SuperOperator taa = ta.adjoint_wrt_pairing();
    CHECK((taa.matrix() - t.matrix()).frobenius() == 0.0);
}

TEST_CASE("unitary conjugation is an isometry on every exponent") {
    Rng rng(52);
    Element u = random_element(kM2, RandomKind::unitary, rng);
    SuperOperator t = make_unitary_conjugation(u);
    CHECK(t.certificates().unitary_conjugation);
    CHECK(t.certificates().positive);

    SuperOperator tid = make_unitary_conjugation(Element::identity(kM2));
    Element z = random_element(kM2, RandomKind::generic, rng);
    CHECK((tid.apply(z) - z).frobenius() <= 1e-13);

    for (int trial = 0; trial < 10; ++trial) {
        Element x = random_element(kM2, RandomKind::generic, rng);
        for (double p : {1.0, 1.7, 2.0, 3.0}) {
            CHECK(lp_norm(t.apply(x), PExp::finite(p)).value ==
                  doctest::Approx(lp_norm(x, PExp::finite(p)).value).epsilon(1e-10));
        }
        CHECK(lp_norm(t.apply(x), PExp::infinity()).value ==
              doctest::Approx(lp_norm(x, PExp::infinity()).value).epsilon(1e-10));
    }

    SuperOperator tinv = t.inverse_map();
    SuperOperator tstar = make_unitary_conjugation(u.adjoint());
    CHECK((tinv.matrix() - tstar.matrix()).frobenius() <= 1e-10);
    CHECK_THROWS_AS(make_unitary_conjugation(2.0 * u), NotUnitary);
}

TEST_CASE("factored isometries hit their exponent exactly") {
    // two-block swap with weights (1,2) at p = 3: b carries 2^{+-1/3}
    YeadonTriple t = swap_triple(3.0, false, 60);
    Element b = t.derived_b();
    CHECK(b.block(0)(0, 0).real() == doctest::Approx(std::pow(2.0, 1.0 / 3.0)));
    CHECK(b.block(1)(0, 0).real() == doctest::Approx(std::pow(2.0, -1.0 / 3.0)));

    SuperOperator iso = make_yeadon(t);
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        Element x = random_element(kTwoBlock, RandomKind::generic, rng);
        CHECK(lp_norm(iso.apply(x), PExp::finite(3.0)).value ==
              doctest::Approx(lp_norm(x, PExp::finite(3.0)).value).epsilon(1e-9));
    }
    // and misses other exponents on these weights
    Element probe(kTwoBlock);
    probe.block(0)(0, 0) = 1.0;
    CHECK(lp_norm(iso.apply(probe), PExp::finite(2.0)).value !=
          doctest::Approx(lp_norm(probe, PExp::finite(2.0)).value).epsilon(1e-3));
}

TEST_CASE("identity triple gives the identity map") {
    YeadonTriple t;
    t.shape = kTwoBlock;
    t.perm = {0, 1};
    t.anti = {false, false};
    t.unitaries = {CMat::identity(2), CMat::identity(2)};
    t.w = Element::identity(kTwoBlock);
    t.p = 2.5;
    SuperOperator iso = make_yeadon(t);
    Element x = random_element(kTwoBlock, RandomKind::generic, 62);
    CHECK((iso.apply(x) - x).frobenius() <= 1e-12);
}

TEST_CASE("anti-homomorphism blocks reverse products") {
    YeadonTriple t;
    t.shape = AlgebraShape{{2, 2}, {1.0, 1.0}};
    t.perm = {0, 1};
    t.anti = {true, false};
    t.unitaries = {CMat::identity(2), CMat::identity(2)};
    t.w = Element::identity(t.shape);
    t.p = 3.0; // identity permutation with equal weights: b = 1
    SuperOperator iso = make_yeadon(t);
    Rng rng(63);
    for (int trial = 0; trial < 20; ++trial) {
        Element x = random_element(t.shape, RandomKind::generic, rng);
        Element y = random_element(t.shape, RandomKind::generic, rng);
        Element lhs = t.jordan_apply(x * y);
        Element rhs_anti = t.jordan_apply(y) * t.jordan_apply(x);
        // block 0 is anti-multiplicative, block 1 multiplicative
        CHECK((lhs.block(0) - rhs_anti.block(0)).frobenius() <= 1e-12);
        Element rhs_hom = t.jordan_apply(x) * t.jordan_apply(y);
        CHECK((lhs.block(1) - rhs_hom.block(1)).frobenius() <= 1e-12);
        // isometry for every exponent under equal weights
        for (double p : {1.5, 2.0, 3.0})
            CHECK(lp_norm(iso.apply(x), PExp::finite(p)).value ==
                  doctest::Approx(lp_norm(x, PExp::finite(p)).value).epsilon(1e-9));
    }
}

TEST_CASE("triple validation catches malformed data") {
    YeadonTriple t = swap_triple(3.0, false, 64);
    t.perm = {0, 0};
    CHECK_THROWS_AS(make_yeadon(t), BlockDimMismatch);

    YeadonTriple t2 = swap_triple(3.0, false, 65);
    t2.unitaries[0] *= cplx(2.0, 0.0);
    CHECK_THROWS_AS(make_yeadon(t2), NotUnitary);
}

TEST_CASE("sandwiched conjugations are power bounded with certificate") {
    Rng rng(66);
    Element u = random_element(kM2, RandomKind::unitary, rng);

    SuperOperator plain = make_power_bounded(Element::identity(kM2), u);
    CHECK(*plain.certificates().power_bound == doctest::Approx(1.0));

    Element a(kM2);
    a.block(0)(0, 0) = 2.0;
    a.block(0)(1, 1) = 0.5;
    SuperOperator t = make_power_bounded(a, u);
    CHECK(*t.certificates().power_bound == doctest::Approx(16.0));

    const double kappa = *t.certificates().power_bound;
    SuperOperator tinv = t.inverse_map();
    for (double p : {1.5, 2.0, 3.0}) {
        Element x = random_element(kM2, RandomKind::generic, rng);
        const double xn = lp_norm(x, PExp::finite(p)).value;
        Element fwd = x, bwd = x;
        for (int k = 1; k <= 64; ++k) {
            fwd = t.apply(fwd);
            bwd = tinv.apply(bwd);
            CHECK(lp_norm(fwd, PExp::finite(p)).value <= kappa * xn * (1.0 + 1e-9));
            CHECK(lp_norm(bwd, PExp::finite(p)).value <= kappa * xn * (1.0 + 1e-9));
        }
    }

    // T^k T^{-k} = identity
    SuperOperator round = t.power(5).compose(t.power(-5));
    CHECK((round.matrix() - CMat::identity(4)).frobenius() <= 1e-10);

    Element singular(kM2);
    singular.block(0)(0, 0) = 1.0;
    CHECK_THROWS_AS(make_power_bounded(singular, u), NotInvertible);
}

TEST_CASE("support-separation certification") {
    Rng rng(67);
    YeadonTriple t = swap_triple(3.0, false, 68);
    SuperOperator iso = make_yeadon(t);
    CertReport lam = class_certify(iso, OperatorClass::lamperti, 200, 3.0, rng.next_u64());
    CHECK(lam.max_violation <= 1e-9);
    CHECK(lam.certified_by_construction);

    // the normalized trace map is far from support separating
    SuperOperator avg = SuperOperator::from_action(kM2, kM2, [](const Element& x) {
        const cplx tr = trace_of(x) / trace_of(Element::identity(kM2));
        return tr * Element::identity(kM2);
    });
    CertReport bad = class_certify(avg, OperatorClass::lamperti, 200, 3.0, rng.next_u64());
    CHECK(bad.max_violation > 0.1);

    SuperOperator id = SuperOperator::identity(kM2);
    CHECK(class_certify(id, OperatorClass::lamperti, 50, 2.0, 1).max_violation <= 1e-14);
    CHECK(class_certify(id, OperatorClass::isometry, 50, 2.0, 2).max_violation <= 1e-14);
    CHECK(class_certify(id, OperatorClass::positive, 50, 2.0, 3).max_violation <= 1e-14);
}

TEST_CASE("rc extension ratios across the exponent ranges") {
    Rng rng(69);
    auto random_seq = [&](int n) {
        ElementSequence s{kTwoBlock, {}};
        for (int i = 0; i < n; ++i)
            s.items.push_back(random_element(kTwoBlock, RandomKind::generic, rng));
        return s;
    };

    SuperOperator iso3 = make_yeadon(swap_triple(3.0, false, 70));
    ExtensionRatio r3 = extension_rc_check(iso3, PExp::finite(3.0), random_seq(3));
    CHECK(r3.ratio == doctest::Approx(1.0).epsilon(1e-8));

    SuperOperator iso15 = make_yeadon(swap_triple(1.5, false, 71));
    ExtensionRatio r15 = extension_rc_check(iso15, PExp::finite(1.5), random_seq(2));
    CHECK(r15.ratio <= 1.0 + 0.02);

    SuperOperator pos15 = make_yeadon(swap_triple(1.5, true, 72));
    ExtensionRatio rp = extension_rc_check(pos15, PExp::finite(1.5), random_seq(2));
    CHECK(rp.ratio == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("factored modulus identity for positive isometries") {
    Rng rng(73);
    YeadonTriple t = swap_triple(2.5, true, 74);
    t.anti = {true, false};
    SuperOperator iso = make_yeadon(t);
    Element b = t.derived_b();
    Element b2 = b * b;
    for (int trial = 0; trial < 20; ++trial) {
        Element x = random_element(kTwoBlock, RandomKind::generic, rng);
        Element tx = iso.apply(x);
        Element lhs = tx.adjoint() * tx;
        Element rhs = b2 * t.jordan_apply(x.adjoint() * x) * t.hom_indicator() +
                      b2 * t.jordan_apply(x * x.adjoint()) * t.anti_indicator();
        CHECK((lhs - rhs).frobenius() <= 1e-10 * std::max(1.0, lhs.frobenius()));
    }
}

TEST_CASE("row/column exchange under factored isometries") {
    Rng rng(75);
    for (double p : {2.0, 3.0, 4.0}) {
        YeadonTriple t = swap_triple(p, false, 76 + static_cast<std::uint64_t>(p));
        SuperOperator iso = make_yeadon(t);
        ElementSequence s{kTwoBlock, {}};
        for (int i = 0; i < 3; ++i)
            s.items.push_back(random_element(kTwoBlock, RandomKind::generic, rng));
        ElementSequence mapped{kTwoBlock, {}};
        for (const auto& x : s.items) mapped.items.push_back(iso.apply(x));
        auto sum_pth = [&](const ElementSequence& q) {
            return std::pow(col_row_norm(q, PExp::finite(p), Side::column).value, p) +
                   std::pow(col_row_norm(q, PExp::finite(p), Side::row).value, p);
        };
        const double lhs = sum_pth(mapped);
        const double rhs = sum_pth(s);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("dilation witnesses verify and fail as designed") {
    Rng rng(77);
    Element u = random_element(kM2, RandomKind::unitary, rng);
    SuperOperator iso = make_unitary_conjugation(u);
    DilationWitness triv = trivial_dilation_witness(iso, 5, 2.0);
    DilationReport rep = dilation_verify(iso, triv, 30, rng.next_u64());
    CHECK(rep.max_defect <= 1e-12);
    CHECK(rep.u_isometry_defect <= 1e-10);
    CHECK(rep.q_contraction_excess <= 1e-10);

    DilationWitness broken = triv;
    broken.u = iso.power(2);
    DilationReport bad = dilation_verify(iso, broken, 30, rng.next_u64());
    CHECK(bad.max_defect > 0.1);
}

TEST_CASE("composition shape mismatches are rejected") {
    SuperOperator a = SuperOperator::identity(kM2);
    SuperOperator b = SuperOperator::identity(kTwoBlock);
    CHECK_THROWS_AS(a.compose(b), ShapeMismatch);
    Element x = random_element(kTwoBlock, RandomKind::generic, 78);
    CHECK_THROWS_AS(a.apply(x), ShapeMismatch);
}
