#include <doctest.h>

#include <cmath>

#include "ncerg/errors.hpp"
#include "ncerg/lp.hpp"
#include "oracle_helpers.hpp"

using namespace ncerg;

namespace {

const AlgebraShape kM2{{2}, {1.0}};

Element diag2(double a, double b) {
    Element x(kM2);
    x.block(0)(0, 0) = a;
    x.block(0)(1, 1) = b;
    return x;
}

} // namespace

TEST_CASE("p exponent rejects values below one") {
    CHECK_THROWS_AS(PExp::finite(0.5), InvalidP);
    CHECK(PExp::finite(1.5).conjugate().value() == doctest::Approx(3.0));
    CHECK(PExp::finite(1.0).conjugate().is_inf());
}

TEST_CASE("lp norms of simple elements") {
    AlgebraShape m3{{3}, {1.0}};
    Element id3 = Element::identity(m3);
    CHECK(lp_norm(id3, PExp::finite(2.0)).value == doctest::Approx(std::sqrt(3.0)));
    CHECK(lp_norm(id3, PExp::infinity()).value == doctest::Approx(1.0));
    CHECK(lp_norm(diag2(3.0, 1.0), PExp::finite(1.0)).value == doctest::Approx(4.0));
}

TEST_CASE("distribution counts strictly exceeding weight") {
    Element x = diag2(3.0, 1.0);
    CHECK(distribution(x, 2.0) == doctest::Approx(1.0));
    CHECK(distribution(x, 0.5) == doctest::Approx(2.0));
    CHECK(distribution(x, 3.0) == doctest::Approx(0.0));
    CHECK(distribution(x, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("weak quasi-norm attains the threshold maximum") {
    CHECK(weak_lp_quasinorm(diag2(3.0, 1.0), 1.0).value == doctest::Approx(3.0));

    // scaled rank-one projection: a single threshold
    AlgebraShape shape{{2}, {0.7}};
    Element p(shape);
    p.block(0)(0, 0) = 1.0;
    const double c = 2.5;
    for (double expo : {1.0, 1.5, 2.0})
        CHECK(weak_lp_quasinorm(c * p, expo).value ==
              doctest::Approx(c * std::pow(0.7, 1.0 / expo)));

    CHECK(weak_lp_quasinorm(Element::zero(kM2), 1.0).value == doctest::Approx(0.0));
}

TEST_CASE("weak quasi-norm dominates every grid point and is nearly attained") {
    AlgebraShape shape{{3, 2}, {1.0, 2.0}};
    for (int trial = 0; trial < 20; ++trial) {
        Element x = random_element(shape, RandomKind::hermitian, 600 + trial);
        for (double p : {1.0, 2.0}) {
            const double exact = weak_lp_quasinorm(x, p).value;
            const double grid = oracle::weak_norm_grid(x, p, 4000);
            CHECK(grid <= exact + 1e-9);
            CHECK(grid >= exact * (1.0 - 5e-3));
        }
    }
}

TEST_CASE("pairing matches the l2 norm and separates matrix units") {
    Element x(kM2);
    x.block(0)(0, 1) = cplx(0.3, -1.2);
    x.block(0)(1, 0) = 2.0;
    const double n2 = lp_norm(x, PExp::finite(2.0)).value;
    CHECK(pairing(x, x).real() == doctest::Approx(n2 * n2).epsilon(1e-12));

    Element e11(kM2), e22(kM2);
    e11.block(0)(0, 0) = 1.0;
    e22.block(0)(1, 1) = 1.0;
    CHECK(std::abs(pairing(e11, e22)) == doctest::Approx(0.0));
}

TEST_CASE("pairing is conjugate-linear in the second slot") {
    Rng rng(4242);
    AlgebraShape shape{{2, 2}, {1.0, 3.0}};
    Element x = random_element(shape, RandomKind::generic, rng);
    Element y = random_element(shape, RandomKind::generic, rng);
    const cplx s(0.4, -1.1);
    CHECK(std::abs(pairing(x, s * y) - std::conj(s) * pairing(x, y)) < 1e-12);
}

TEST_CASE("Hoelder inequality holds across random pairs") {
    AlgebraShape shape{{2, 3}, {1.0, 0.5}};
    Rng rng(31337);
    for (int trial = 0; trial < 500; ++trial) {
        Element x = random_element(shape, RandomKind::generic, rng);
        Element y = random_element(shape, RandomKind::generic, rng);
        const double p = (trial % 3 == 0) ? 1.5 : (trial % 3 == 1 ? 2.0 : 3.0);
        const PExp pe = PExp::finite(p);
        const double lhs = std::abs(pairing(x, y));
        const double rhs = lp_norm(x, pe).value * lp_norm(y, pe.conjugate()).value;
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("distribution quasi-triangle at half height") {
    AlgebraShape shape{{3}, {1.0}};
    Rng rng(555);
    for (int trial = 0; trial < 40; ++trial) {
        Element a = random_element(shape, RandomKind::hermitian, rng);
        Element b = random_element(shape, RandomKind::hermitian, rng);
        const double top = lp_norm(a + b, PExp::infinity()).value + 1e-6;
        for (int i = 1; i <= 20; ++i) {
            const double lam = top * static_cast<double>(i) / 20.0;
            CHECK(distribution(a + b, lam) <=
                  distribution(a, lam / 2.0) + distribution(b, lam / 2.0) + 1e-12);
        }
    }
}

TEST_CASE("weak norm is dominated by the strong norm") {
    AlgebraShape shape{{2, 2}, {1.0, 2.0}};
    Rng rng(808);
    for (int trial = 0; trial < 40; ++trial) {
        Element x = random_element(shape, RandomKind::generic, rng);
        for (double p : {1.0, 1.5, 2.0, 3.0})
            CHECK(weak_lp_quasinorm(x, p).value <=
                  lp_norm(x, PExp::finite(p)).value + 1e-12);
    }
}

TEST_CASE("lp norms are unitarily invariant") {
    AlgebraShape shape{{3, 2}, {1.0, 0.5}};
    Rng rng(909);
    for (int trial = 0; trial < 25; ++trial) {
        Element x = random_element(shape, RandomKind::generic, rng);
        Element u = random_element(shape, RandomKind::unitary, rng);
        Element v = random_element(shape, RandomKind::unitary, rng);
        for (double p : {1.0, 1.7, 2.0, 3.0}) {
            const double base = lp_norm(x, PExp::finite(p)).value;
            const double moved = lp_norm(u * x * v, PExp::finite(p)).value;
            CHECK(moved == doctest::Approx(base).epsilon(1e-10));
        }
        CHECK(lp_norm(u * x * v, PExp::infinity()).value ==
              doctest::Approx(lp_norm(x, PExp::infinity()).value).epsilon(1e-10));
    }
}

TEST_CASE("norm reports carry the method and exponent") {
    NormReport r = lp_norm(diag2(1.0, 2.0), PExp::finite(2.0));
    CHECK(r.method == NormMethod::exact_spectral);
    CHECK(r.p.value() == doctest::Approx(2.0));
    CHECK(r.tolerance_used > 0.0);
}
