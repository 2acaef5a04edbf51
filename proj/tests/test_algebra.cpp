#include <doctest.h>

#include <cmath>

#include "ncerg/algebra.hpp"
#include "ncerg/errors.hpp"

using namespace ncerg;

namespace {

const AlgebraShape kM2{{2}, {1.0}};
const AlgebraShape kM3{{3}, {1.0}};

Element diag2(double a, double b) {
    Element x(kM2);
    x.block(0)(0, 0) = a;
    x.block(0)(1, 1) = b;
    return x;
}

} // namespace

TEST_CASE("eigensystem of a diagonal matrix is the identity basis") {
    Element x = diag2(3.0, 1.0);
    EigenSystem es = eig_hermitian(x);
    CHECK(es.eigenvalues[0][0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(es.eigenvalues[0][1] == doctest::Approx(1.0).epsilon(1e-14));
    Element id = Element::identity(kM2);
    CHECK((es.basis - id).frobenius() < 1e-12);
}

TEST_CASE("eigensystem of the symmetric flip") {
    Element x(kM2);
    x.block(0)(0, 1) = 1.0;
    x.block(0)(1, 0) = 1.0;
    EigenSystem es = eig_hermitian(x);
    CHECK(es.eigenvalues[0][0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(es.eigenvalues[0][1] == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("random hermitian eigensystems reconstruct and are orthonormal") {
    AlgebraShape shape{{4, 3}, {1.0, 2.0}};
    for (int trial = 0; trial < 25; ++trial) {
        Element h = random_element(shape, RandomKind::hermitian, 1000 + trial);
        EigenSystem es = eig_hermitian(h);
        Element rec = es.reconstruct();
        CHECK((rec - h).frobenius() <= 1e-10 * std::max(1.0, h.frobenius()));
        Element gram = es.basis.adjoint() * es.basis;
        CHECK((gram - Element::identity(shape)).sup_norm() <= 1e-12);
        for (const auto& evs : es.eigenvalues)
            for (size_t i = 0; i + 1 < evs.size(); ++i) CHECK(evs[i] >= evs[i + 1]);
    }
}

TEST_CASE("eig_hermitian rejects non-selfadjoint input") {
    Element x(kM2);
    x.block(0)(0, 1) = 1.0;
    CHECK_THROWS_AS(eig_hermitian(x), NotSelfAdjoint);
}

TEST_CASE("indicator calculus on a diagonal element") {
    Element x = diag2(0.5, 2.0);
    const double inf = std::numeric_limits<double>::infinity();
    Element p = func_calc(x, FunctionSpec::indicator({1.0, inf, true, true}));
    CHECK(p.block(0)(0, 0).real() == doctest::Approx(0.0));
    CHECK(p.block(0)(1, 1).real() == doctest::Approx(1.0));
    CHECK(p.is_projection(1e-12));
}

TEST_CASE("modulus of a nilpotent matrix unit") {
    Element x(kM2);
    x.block(0)(0, 1) = 1.0; // e_12
    Element m = modulus(x);
    CHECK(m.block(0)(0, 0).real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.block(0)(1, 1).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero is outside the half-open interval (0,1]") {
    Element x(kM2); // zero element
    Element p = func_calc(x, FunctionSpec::indicator({0.0, 1.0, true, false}));
    CHECK(p.frobenius() == doctest::Approx(0.0));
}

TEST_CASE("function specs reject nonsensical powers") {
    Element x = diag2(1.0, 2.0);
    CHECK_THROWS_AS(func_calc(x, FunctionSpec::power(-0.5)), InvalidFunctionSpec);
    CHECK_THROWS_AS(func_calc(diag2(1.0, -1.0), FunctionSpec::sqrt()), InvalidFunctionSpec);
}

TEST_CASE("indicator outputs are exact projections after re-rounding") {
    AlgebraShape shape{{4}, {1.0}};
    for (int trial = 0; trial < 20; ++trial) {
        Element h = random_element(shape, RandomKind::hermitian, 500 + trial);
        Element p = func_calc(h, FunctionSpec::indicator({0.0, 10.0, true, false}));
        CHECK((p * p - p).sup_norm() <= 1e-12);
        CHECK((p - p.adjoint()).sup_norm() <= 1e-12);
    }
}

TEST_CASE("trace and support of simple elements") {
    Element id3 = Element::identity(kM3);
    auto [tr, supp] = trace_and_support(id3);
    CHECK(tr.real() == doctest::Approx(3.0));
    CHECK((supp - id3).frobenius() < 1e-12);

    AlgebraShape weighted{{2}, {2.0}};
    Element x(weighted);
    x.block(0)(0, 0) = 1.0;
    auto [tr2, supp2] = trace_and_support(x);
    CHECK(tr2.real() == doctest::Approx(2.0));
    CHECK((supp2 - x).frobenius() < 1e-12);
}

TEST_CASE("support of a rank-one positive element is the matching projection") {
    AlgebraShape shape{{3}, {1.5}};
    Rng rng(77);
    CMat v(3, 1);
    double nrm = 0;
    for (int i = 0; i < 3; ++i) {
        v(i, 0) = rng.cnormal();
        nrm += std::norm(v(i, 0));
    }
    nrm = std::sqrt(nrm);
    for (int i = 0; i < 3; ++i) v(i, 0) /= nrm;
    Element x(shape);
    x.block(0) = v * v.adjoint();
    auto [tr, supp] = trace_and_support(x);
    CHECK(tr.real() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK((supp - x).frobenius() < 1e-9);
}

TEST_CASE("support projection requires positivity") {
    Element x = diag2(1.0, -1.0);
    CHECK_THROWS_AS(support_projection(x), NotPositive);
}

TEST_CASE("random element kinds have their defining properties") {
    AlgebraShape shape{{3, 2}, {1.0, 0.5}};
    Element u = random_element(shape, RandomKind::unitary, 42);
    CHECK((u.adjoint() * u - Element::identity(shape)).sup_norm() <= 1e-12);

    Element p = random_element(shape, RandomKind::positive, 43);
    CHECK(p.is_positive(1e-12));

    Element proj = random_element(shape, RandomKind::projection, 44);
    CHECK(proj.is_projection(1e-10));

    Element h = random_element(shape, RandomKind::hermitian, 45);
    CHECK(h.is_selfadjoint(1e-14));
}

TEST_CASE("same seed reproduces the element bitwise") {
    AlgebraShape shape{{3, 2}, {1.0, 0.5}};
    Element a = random_element(shape, RandomKind::generic, 12345);
    Element b = random_element(shape, RandomKind::generic, 12345);
    CHECK((a - b).frobenius() == 0.0);
}

TEST_CASE("trace is faithful, linear, and cyclic") {
    AlgebraShape shape{{2, 3}, {1.0, 0.25}};
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        Element x = random_element(shape, RandomKind::generic, rng);
        Element y = random_element(shape, RandomKind::generic, rng);
        if (x.frobenius() > 0) CHECK(trace_of(x.adjoint() * x).real() > 0.0);
        cplx lhs = trace_of(x * y);
        cplx rhs = trace_of(y * x);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
        cplx lin = trace_of(x + y) - trace_of(x) - trace_of(y);
        CHECK(std::abs(lin) <= 1e-12 * std::max(1.0, std::abs(trace_of(x))));
    }
}

TEST_CASE("modulus is positive with the right square") {
    AlgebraShape shape{{3}, {1.0}};
    for (int trial = 0; trial < 20; ++trial) {
        Element x = random_element(shape, RandomKind::generic, 900 + trial);
        Element m = modulus(x);
        CHECK(m.is_positive(1e-10));
        CHECK((m * m - x.adjoint() * x).frobenius() <= 1e-10 * std::max(1.0, x.frobenius()));
    }
}

TEST_CASE("degenerate spectra stay orthonormal") {
    // doubly degenerate eigenvalue: projection must still be exact
    AlgebraShape shape{{4}, {1.0}};
    Element u = random_element(shape, RandomKind::unitary, 321);
    Element d(shape);
    d.block(0)(0, 0) = 2.0;
    d.block(0)(1, 1) = 2.0;
    d.block(0)(2, 2) = 1.0;
    d.block(0)(3, 3) = 0.5;
    Element x = u * d * u.adjoint();
    EigenSystem es = eig_hermitian(x);
    CHECK((es.basis.adjoint() * es.basis - Element::identity(shape)).sup_norm() <= 1e-12);
    const double inf = std::numeric_limits<double>::infinity();
    Element p = func_calc(x, FunctionSpec::indicator({1.5, inf, true, true}));
    CHECK(p.is_projection(1e-12));
    CHECK(trace_of(p).real() == doctest::Approx(2.0).epsilon(1e-10));
}
