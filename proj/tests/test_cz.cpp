#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ncerg/cz.hpp"
#include "ncerg/errors.hpp"
#include "oracle_helpers.hpp"

using namespace ncerg;

namespace {

const AlgebraShape kScalar{{1}, {1.0}};
const AlgebraShape kM2{{2}, {1.0}};

Element scalar(double v) {
    Element x(kScalar);
    x.block(0)(0, 0) = v;
    return x;
}

double sval(const Element& x) { return x.block(0)(0, 0).real(); }

OperatorSequence random_positive(const AlgebraShape& shape, int window, Rng& rng,
                                 double density = 0.5) {
    OperatorSequence f(shape, window);
    for (long pos = 0; pos < (1L << window); ++pos)
        if (rng.uniform() < density)
            f.set(pos, random_element(shape, RandomKind::positive, rng));
    if (f.empty()) f.set(0, random_element(shape, RandomKind::positive, rng));
    return f;
}

} // namespace

TEST_CASE("worked scalar example: one atom of mass four") {
    OperatorSequence f(kScalar, 2);
    f.set(0, scalar(4.0));
    const double lambda = 1.0;

    CuculescuResult cu = cuculescu(f, lambda);
    CHECK(cu.m_lambda == 2);
    // q_1 distinguishes the two level-one cells
    CHECK(sval(cu.q_at(1, 0)) == doctest::Approx(0.0));
    CHECK(sval(cu.q_at(1, 1)) == doctest::Approx(0.0));
    CHECK(sval(cu.q_at(1, 2)) == doctest::Approx(1.0));
    CHECK(sval(cu.q_at(1, 3)) == doctest::Approx(1.0));
    // q_0 = q is the indicator of the untouched half
    for (long pos : {0L, 1L}) CHECK(sval(cu.q_final(pos)) == doctest::Approx(0.0));
    for (long pos : {2L, 3L}) CHECK(sval(cu.q_final(pos)) == doctest::Approx(1.0));
    // far away everything is trivial
    CHECK(sval(cu.q_final(100)) == doctest::Approx(1.0));
    CHECK(sval(cu.q_final(-10)) == doctest::Approx(1.0));

    // lambda phi(1 - q) = 2 <= ||f||_1 = 4
    double stopped = 0;
    for (long pos = -8; pos < 16; ++pos) stopped += 1.0 - sval(cu.q_final(pos));
    CHECK(lambda * stopped == doctest::Approx(2.0));

    CZResult cz = cz_decompose(f, lambda);
    CHECK(sval(cz.good.at_or_zero(0)) == doctest::Approx(2.0));
    CHECK(sval(cz.good.at_or_zero(1)) == doctest::Approx(2.0));
    CHECK(sval(cz.good.at_or_zero(2)) == doctest::Approx(0.0));
    CHECK(seq_lp_norm(cz.good, PExp::infinity()) == doctest::Approx(2.0 * lambda));
    CHECK(seq_lp_norm(cz.good, PExp::finite(1.0)) == doctest::Approx(4.0));

    REQUIRE(cz.bad.size() == 2);
    CHECK(sval(cz.bad[1].at_or_zero(0)) == doctest::Approx(2.0));
    CHECK(sval(cz.bad[1].at_or_zero(1)) == doctest::Approx(-2.0));
    OperatorSequence e1b1 = cond_expectation(cz.bad[1], 1);
    CHECK(seq_lp_norm(e1b1, PExp::infinity()) <= 1e-13);

    CHECK(cz_verify(f, lambda, cz).all_pass());
}

TEST_CASE("already-small sequences stop immediately") {
    Rng rng(40);
    OperatorSequence f(kM2, 3);
    for (long pos = 0; pos < 8; ++pos) {
        Element v = random_element(kM2, RandomKind::positive, rng);
        f.set(pos, (0.4 / std::max(1.0, v.sup_norm())) * v);
    }
    const double lambda = 1.0;
    CuculescuResult cu = cuculescu(f, lambda);
    CHECK(cu.m_lambda == 0);
    CHECK((cu.q_final(0) - Element::identity(kM2)).frobenius() == 0.0);

    CZResult cz = cz_decompose(f, lambda);
    CHECK(cz.bad.empty());
    for (const auto& [pos, v] : f.values())
        CHECK((cz.good.at_or_zero(pos) - v).frobenius() <= 1e-13);
    CHECK((cz.zeta_at(0) - Element::identity(kM2)).frobenius() == 0.0);
    CHECK(cz_verify(f, lambda, cz).all_pass());
}

TEST_CASE("single-site projection mass stops only its own direction") {
    // f = 2 lambda e11 at the origin: the orthogonal direction stays
    const double lambda = 1.0;
    OperatorSequence f(kM2, 2);
    Element v(kM2);
    v.block(0)(0, 0) = 2.0 * lambda;
    f.set(0, v);

    CuculescuResult cu = cuculescu(f, lambda);
    Element q0 = cu.q_final(0);
    // e11 is annihilated, e22 survives
    Element e11(kM2), e22(kM2);
    e11.block(0)(0, 0) = 1.0;
    e22.block(0)(1, 1) = 1.0;
    CHECK((q0 * e11).frobenius() <= 1e-10);

    double stopped = 0;
    for (long pos = -8; pos < 8; ++pos)
        stopped += (trace_of(Element::identity(kM2)) - trace_of(cu.q_final(pos))).real();
    CHECK(lambda * stopped <= seq_lp_norm(f, PExp::finite(1.0)) + 1e-9);
}

TEST_CASE("scalar stopping projections match the classical recursion") {
    Rng rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const int window = 3 + trial % 2;
        OperatorSequence f(kScalar, window);
        std::map<long, double> fmap;
        for (long pos = 0; pos < (1L << window); ++pos) {
            if (rng.uniform() < 0.6) {
                const double v = rng.uniform(0.0, 4.0);
                f.set(pos, scalar(v));
                fmap[pos] = v;
            }
        }
        if (f.empty()) {
            f.set(1, scalar(2.0));
            fmap[1] = 2.0;
        }
        const double lambda = rng.uniform(0.2, 2.5);
        CuculescuResult cu = cuculescu(f, lambda);
        oracle::ScalarStop ref = oracle::scalar_cuculescu(fmap, lambda, window);
        CHECK(cu.m_lambda == ref.m_lambda);
        const long span = 1L << std::max(window, cu.m_lambda);
        for (int n = 0; n <= cu.m_lambda; ++n) {
            for (long pos = 0; pos < span; ++pos) {
                const long w = 1L << n;
                const long start = (pos / w) * w;
                const double expect = ref.q[static_cast<size_t>(n)].at(start);
                CHECK(sval(cu.q_at(n, pos)) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("random matrix decompositions reconstruct exactly") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const AlgebraShape shape =
            trial % 2 == 0 ? kM2 : AlgebraShape{{1, 2}, {0.5, 2.0}};
        OperatorSequence f = random_positive(shape, 4, rng);
        double top = 0;
        for (const auto& [pos, v] : f.values()) top = std::max(top, v.sup_norm());
        const double lambda = rng.uniform(0.05, 1.2) * top;
        CZResult cz = cz_decompose(f, lambda);

        OperatorSequence resid = f - cz.good;
        for (const auto& bn : cz.bad) resid -= bn;
        double worst = 0;
        for (const auto& [pos, v] : resid.values()) worst = std::max(worst, v.frobenius());
        CHECK(worst <= 1e-11 * std::max(1.0, top));
    }
}

TEST_CASE("verification reports are data, not exceptions") {
    OperatorSequence f(kScalar, 2);
    f.set(0, scalar(4.0));
    CZResult cz = cz_decompose(f, 1.0);
    VerificationReport good = cz_verify(f, 1.0, cz);
    CHECK(good.all_pass());

    // scaling the good part breaks the saturated l1 bound
    CZResult tampered = cz;
    tampered.good *= cplx(1.01, 0.0);
    VerificationReport bad = cz_verify(f, 1.0, tampered);
    CHECK_FALSE(bad.all_pass());
    const CheckResult* l1 = bad.find("good-l1");
    REQUIRE(l1 != nullptr);
    CHECK_FALSE(l1->pass);
    const CheckResult* rec = bad.find("reconstruction");
    REQUIRE(rec != nullptr);
    CHECK_FALSE(rec->pass);
}

TEST_CASE("cuculescu rejects bad inputs") {
    OperatorSequence f(kM2, 2);
    f.set(0, random_element(kM2, RandomKind::positive, 43));
    CHECK_THROWS_AS(cuculescu(f, 0.0), LambdaNonpositive);
    CHECK_THROWS_AS(cuculescu(f, -1.0), LambdaNonpositive);

    OperatorSequence h(kM2, 2);
    h.set(0, random_element(kM2, RandomKind::hermitian, 44) -
                 2.0 * Element::identity(kM2));
    CHECK_THROWS_AS(cuculescu(h, 1.0), NotPositive);

    OperatorSequence out(kM2, 2);
    out.set(7, random_element(kM2, RandomKind::positive, 45));
    CHECK_THROWS_AS(cuculescu(out, 1.0), ShapeMismatch);
}

TEST_CASE("stopping projections are cell-constant at every level") {
    Rng rng(46);
    OperatorSequence f = random_positive(kM2, 3, rng);
    const double lambda = 0.8;
    CuculescuResult cu = cuculescu(f, lambda);
    const long span = 1L << 3;
    for (int n = 0; n <= cu.m_lambda; ++n) {
        const long w = 1L << n;
        OperatorSequence qn = cu.q_sequence(n, {0, span - 1});
        for (long start = 0; start < span; start += w)
            for (long pos = start; pos < std::min(start + w, span); ++pos) {
                CHECK((cu.q_at(n, pos) - cu.q_at(n, start)).frobenius() == 0.0);
                CHECK((qn.at_or_zero(pos) - cu.q_at(n, pos)).frobenius() == 0.0);
            }
    }
}

TEST_CASE("five-fold cells share the center of their base cell") {
    CHECK(five_i({0, 0}).lo == -2);
    CHECK(five_i({0, 0}).hi == 2);
    CHECK(five_i({1, 4}).lo == 0);
    CHECK(five_i({1, 4}).hi == 9);
    CHECK(five_i({2, 8}).length() == 20);
}
