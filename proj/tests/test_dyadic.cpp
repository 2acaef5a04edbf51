#include <doctest.h>

#include <cmath>

#include "ncerg/dyadic.hpp"
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

OperatorSequence random_seq(const AlgebraShape& shape, int window, Rng& rng,
                            double density = 0.7) {
    OperatorSequence f(shape, window);
    for (long pos = 0; pos < (1L << window); ++pos)
        if (rng.uniform() < density)
            f.set(pos, random_element(shape, RandomKind::generic, rng));
    if (f.empty()) f.set(0, random_element(shape, RandomKind::generic, rng));
    return f;
}

} // namespace

TEST_CASE("conditional expectation averages dyadic cells") {
    Rng rng(20);
    Element a = random_element(kM2, RandomKind::generic, rng);
    Element b = random_element(kM2, RandomKind::generic, rng);
    OperatorSequence f(kM2, 2);
    f.set(0, a);
    f.set(1, b);
    OperatorSequence e1 = cond_expectation(f, 1);
    Element mean = 0.5 * (a + b);
    CHECK((e1.at_or_zero(0) - mean).frobenius() == 0.0);
    CHECK((e1.at_or_zero(1) - mean).frobenius() == 0.0);
    CHECK(e1.find(2) == nullptr);

    // level zero is the identity
    OperatorSequence e0 = cond_expectation(f, 0);
    CHECK((e0.at_or_zero(0) - a).frobenius() == 0.0);
    CHECK((e0.at_or_zero(1) - b).frobenius() == 0.0);
}

TEST_CASE("tower property holds bitwise") {
    Rng rng(21);
    OperatorSequence f = random_seq(kM2, 4, rng);
    OperatorSequence lhs = cond_expectation(cond_expectation(f, 1), 2);
    OperatorSequence rhs = cond_expectation(f, 2);
    for (long pos = 0; pos < 16; ++pos)
        CHECK((lhs.at_or_zero(pos) - rhs.at_or_zero(pos)).frobenius() == 0.0);

    OperatorSequence lhs2 = cond_expectation(cond_expectation(f, 3), 1);
    OperatorSequence rhs2 = cond_expectation(f, 3);
    for (long pos = 0; pos < 16; ++pos)
        CHECK((lhs2.at_or_zero(pos) - rhs2.at_or_zero(pos)).frobenius() == 0.0);
}

TEST_CASE("conditional expectations preserve the trace mass") {
    Rng rng(22);
    OperatorSequence f = random_seq(kM2, 4, rng);
    const cplx mass = seq_trace(f);
    for (int n : {1, 2, 3, 4}) {
        const cplx mn = seq_trace(cond_expectation(f, n));
        CHECK(std::abs(mn - mass) <= 1e-12 * std::max(1.0, std::abs(mass)));
    }
}

TEST_CASE("averaging windows shift and normalize") {
    Element a = random_element(kM2, RandomKind::generic, 23);
    OperatorSequence f(kM2, 3);
    f.set(0, a);
    OperatorSequence m = average(f, {0, 1});
    CHECK((m.at_or_zero(-1) - 0.5 * a).frobenius() == 0.0);
    CHECK((m.at_or_zero(0) - 0.5 * a).frobenius() == 0.0);
    CHECK(m.find(1) == nullptr);

    OperatorSequence same = average(f, {0, 0});
    CHECK((same.at_or_zero(0) - a).frobenius() == 0.0);

    CHECK_THROWS_AS(average(f, {3, 2}), EmptyInterval);
}

TEST_CASE("interior values of a constant sequence survive averaging") {
    Element c = random_element(kM2, RandomKind::generic, 24);
    OperatorSequence f(kM2, 4);
    for (long pos = 0; pos < 16; ++pos) f.set(pos, c);
    OperatorSequence m = average(f, {0, 3});
    for (long pos = 0; pos <= 12; ++pos)
        CHECK((m.at_or_zero(pos) - c).frobenius() <= 1e-14 * c.frobenius());
}

TEST_CASE("mass is conserved by averaging over the full line") {
    Rng rng(25);
    OperatorSequence f = random_seq(kM2, 3, rng);
    const cplx mass = seq_trace(f);
    OperatorSequence m = average(f, {0, 4});
    CHECK(std::abs(seq_trace(m) - mass) <= 1e-12 * std::max(1.0, std::abs(mass)));
}

TEST_CASE("boundary cells of a shifted interval") {
    // [0,3] at level 1: both endpoint cells, inner positions all survive
    BoundarySets bs = boundary_sets({0, 3}, 0, 1);
    CHECK(bs.inner == std::vector<long>{0, 1, 2, 3});
    CHECK(bs.full == std::vector<long>{0, 1, 2, 3});

    // level 0: the endpoint singletons only
    BoundarySets bs0 = boundary_sets({0, 3}, 0, 0);
    CHECK(bs0.inner == std::vector<long>{0, 3});
    CHECK(bs0.full == std::vector<long>{0, 3});

    // level 2 with a shift off the grid
    BoundarySets bs2 = boundary_sets({0, 3}, 1, 2);
    CHECK(bs2.inner == std::vector<long>{1, 2, 3, 4});
    CHECK(bs2.full == std::vector<long>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("boundary sets shift equivariantly on grid multiples") {
    for (int n : {0, 1, 2}) {
        const long shift = 3L << n;
        BoundarySets base = boundary_sets({2, 9}, 0, n);
        BoundarySets moved = boundary_sets({2, 9}, shift, n);
        REQUIRE(base.inner.size() == moved.inner.size());
        REQUIRE(base.full.size() == moved.full.size());
        for (size_t i = 0; i < base.inner.size(); ++i)
            CHECK(moved.inner[i] == base.inner[i] + shift);
        for (size_t i = 0; i < base.full.size(); ++i)
            CHECK(moved.full[i] == base.full[i] + shift);
    }
}

TEST_CASE("boundary set containments and size bound") {
    Rng rng(26);
    for (int trial = 0; trial < 50; ++trial) {
        const long lo = rng.uniform_long(-20, 20);
        const long hi = lo + rng.uniform_long(0, 30);
        const long x = rng.uniform_long(-10, 10);
        const int n = rng.uniform_int(0, 4);
        BoundarySets bs = boundary_sets({lo, hi}, x, n);
        for (long pos : bs.inner) {
            CHECK(pos >= x + lo);
            CHECK(pos <= x + hi);
            CHECK(std::find(bs.full.begin(), bs.full.end(), pos) != bs.full.end());
        }
        CHECK(static_cast<long>(bs.full.size()) <= 2L << n);
    }
}

TEST_CASE("two displayed quadratic bounds for boundary sums") {
    Rng rng(27);
    AlgebraShape shape{{2}, {1.0}};
    for (int trial = 0; trial < 100; ++trial) {
        OperatorSequence h = random_seq(shape, 4, rng);
        const long x = rng.uniform_long(-4, 4);
        const int n = rng.uniform_int(0, 3);
        const long blo = rng.uniform_long(0, 6);
        const long bhi = blo + rng.uniform_long(0, 8);
        BoundarySets bs = boundary_sets({blo, bhi}, x, n);

        Element inner_sum(shape);
        for (long y : bs.inner) inner_sum += h.at_or_zero(y);
        const double lhs = pairing(inner_sum, inner_sum).real();

        // restriction of h to the shifted interval, conditioned to level n
        OperatorSequence cut(shape, h.window());
        for (const auto& [pos, v] : h.values())
            if (pos >= x + blo && pos <= x + bhi) cut.set(pos, v);
        OperatorSequence en = cond_expectation(cut, n);
        double rhs1 = 0;
        for (long y : bs.full) {
            Element e = en.at_or_zero(y);
            rhs1 += pairing(e, e).real();
        }
        rhs1 *= static_cast<double>(bs.full.size());
        CHECK(lhs <= rhs1 + 1e-9);

        double rhs2 = 0;
        for (long y : bs.inner) {
            Element e = h.at_or_zero(y);
            rhs2 += pairing(e, e).real();
        }
        rhs2 *= static_cast<double>(bs.inner.size());
        CHECK(lhs <= rhs2 + 1e-9);
    }
}

TEST_CASE("level-compensated averages vanish where they should") {
    // constant input, deep interior
    Element c = random_element(kM2, RandomKind::generic, 28);
    OperatorSequence f(kM2, 5);
    for (long pos = 0; pos < 32; ++pos) f.set(pos, c);
    OperatorSequence l2 = level_compensated_average(f, 2);
    for (long pos = 0; pos <= 32 - 8; ++pos)
        CHECK(l2.at_or_zero(pos).frobenius() <= 1e-13 * std::max(1.0, c.frobenius()));

    // k = 0 compensates the two-point window against the identity level
    Rng rng(29);
    OperatorSequence g = random_seq(kM2, 3, rng);
    OperatorSequence l0 = level_compensated_average(g, 0);
    OperatorSequence direct = average(g, {0, 1}) - g;
    for (long pos = -2; pos < 10; ++pos)
        CHECK((l0.at_or_zero(pos) - direct.at_or_zero(pos)).frobenius() == 0.0);
}

TEST_CASE("level-compensated averages carry no mass") {
    Rng rng(30);
    OperatorSequence f = random_seq(kM2, 4, rng);
    for (int k : {1, 2, 3}) {
        const cplx mass = seq_trace(level_compensated_average(f, k));
        CHECK(std::abs(mass) <= 1e-11 * std::max(1.0, std::abs(seq_trace(f))));
    }
}

TEST_CASE("positive sequences keep their l1 mass under conditioning") {
    Rng rng(31);
    OperatorSequence f(kM2, 4);
    for (long pos = 0; pos < 16; ++pos)
        if (rng.uniform() < 0.6) f.set(pos, random_element(kM2, RandomKind::positive, rng));
    if (f.empty()) f.set(3, random_element(kM2, RandomKind::positive, rng));
    const double l1 = seq_lp_norm(f, PExp::finite(1.0));
    for (int n : {1, 2, 3, 4})
        CHECK(seq_lp_norm(cond_expectation(f, n), PExp::finite(1.0)) ==
              doctest::Approx(l1).epsilon(1e-11));
}

TEST_CASE("oscillation norm of a constant family vanishes") {
    Element c = random_element(kM2, RandomKind::hermitian, 32);
    OperatorSequence f(kM2, 3);
    for (long pos = 0; pos < 8; ++pos) f.set(pos, c);
    CHECK(bmo_norm({f}, Side::column).value <= 1e-13);
    CHECK(bmo_norm({f}, Side::row).value <= 1e-13);
}

TEST_CASE("scalar oscillation norm matches the classical computation") {
    std::vector<double> vals = {1.0, -2.0, 0.5, 3.0, -1.0, 0.0, 2.0, -0.5};
    OperatorSequence f(kScalar, 3);
    for (size_t i = 0; i < vals.size(); ++i) f.set(static_cast<long>(i), scalar(vals[i]));
    const double expect = oracle::scalar_bmo(vals);
    CHECK(bmo_norm({f}, Side::column).value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(bmo_norm({f}, Side::row).value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("row norm of a family equals the column norm of its adjoint") {
    Rng rng(33);
    std::vector<OperatorSequence> family;
    for (int i = 0; i < 3; ++i) family.push_back(random_seq(kM2, 3, rng));
    std::vector<OperatorSequence> adj;
    for (const auto& f : family) adj.push_back(f.adjoint_pointwise());
    CHECK(bmo_norm(family, Side::row).value ==
          doctest::Approx(bmo_norm(adj, Side::column).value).epsilon(1e-12));
}

TEST_CASE("oscillation norm is dominated by twice the sup norm") {
    Rng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        OperatorSequence f = random_seq(kM2, 3, rng);
        const double sup = seq_lp_norm(f, PExp::infinity());
        CHECK(bmo_norm({f}, Side::column).value <= 2.0 * sup + 1e-9);
    }
}

TEST_CASE("martingale differences telescope") {
    Rng rng(35);
    OperatorSequence f = random_seq(kM2, 3, rng);
    OperatorSequence d1 = martingale_diff(f, 1);
    OperatorSequence check = cond_expectation(f, 0) - cond_expectation(f, 1);
    for (long pos = 0; pos < 8; ++pos)
        CHECK((d1.at_or_zero(pos) - check.at_or_zero(pos)).frobenius() == 0.0);
    CHECK(martingale_diff(f, 0).empty());
}
