#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ncerg/cmatrix.hpp"
#include "ncerg/rng.hpp"

namespace ncerg {

// A finite von Neumann algebra model: a direct sum of full matrix blocks
// M_{d_k} carrying a weighted trace  tau(x) = sum_k w_k tr(x_k).
struct AlgebraShape {
    std::vector<int> block_dims;
    std::vector<double> trace_weights;

    int blocks() const { return static_cast<int>(block_dims.size()); }
    int dim_total() const; // sum of d_k^2, the vectorized dimension
    double weight_total() const;

    bool operator==(const AlgebraShape&) const = default;
    void validate() const; // throws ShapeMismatch on malformed shapes
};

// One element of the algebra: a dense complex matrix per block.
class Element {
public:
    Element() = default;
    explicit Element(AlgebraShape shape); // zero element

    static Element zero(const AlgebraShape& s) { return Element(s); }
    static Element identity(const AlgebraShape& s);

    const AlgebraShape& shape() const { return shape_; }
    int blocks() const { return static_cast<int>(blocks_.size()); }
    CMat& block(int k) { return blocks_[k]; }
    const CMat& block(int k) const { return blocks_[k]; }

    Element& operator+=(const Element& o);
    Element& operator-=(const Element& o);
    Element& operator*=(cplx s);

    Element adjoint() const;
    double frobenius() const;
    double sup_norm() const; // largest singular value across blocks

    bool is_selfadjoint(double tolerance) const;
    bool is_positive(double tolerance) const;   // min eigenvalue >= -tolerance
    bool is_projection(double tolerance) const;

private:
    AlgebraShape shape_;
    std::vector<CMat> blocks_;
};

Element operator+(Element a, const Element& b);
Element operator-(Element a, const Element& b);
Element operator*(const Element& a, const Element& b); // blockwise product
Element operator*(cplx s, Element a);
Element operator*(Element a, cplx s);

// Spectral data of a selfadjoint element: per-block eigenvalues in
// descending order and a unitary basis element with U Lambda U* = x.
struct EigenSystem {
    AlgebraShape shape;
    std::vector<std::vector<double>> eigenvalues;
    Element basis;
    double tolerance_used;

    Element reconstruct() const;
    Element apply(const std::function<double(double)>& fn) const;
};

// pre: x selfadjoint to kSelfAdjoint in sup norm.
EigenSystem eig_hermitian(const Element& x);

// Interval with explicit open/closed endpoints; membership is decided by
// exact comparison, no fuzz.  Use +-infinity endpoints for half lines.
struct IntervalSpec {
    double lo;
    double hi;
    bool lo_open = true;
    bool hi_open = true;
    bool contains(double t) const {
        if (lo_open ? !(t > lo) : !(t >= lo)) return false;
        if (hi_open ? !(t < hi) : !(t <= hi)) return false;
        return true;
    }
};

// Scalar function applied through the spectral theorem.
struct FunctionSpec {
    enum class Kind { indicator, abs_value, power, sqrt };
    Kind kind;
    IntervalSpec interval{};
    double alpha = 1.0;

    static FunctionSpec indicator(IntervalSpec iv) { return {Kind::indicator, iv, 0.0}; }
    static FunctionSpec abs_value() { return {Kind::abs_value, {}, 0.0}; }
    static FunctionSpec power(double a) { return {Kind::power, {}, a}; }
    static FunctionSpec sqrt() { return {Kind::sqrt, {}, 0.5}; }
};

// pre: x selfadjoint.  Indicator outputs are re-rounded to exact
// projections (eigenvalues mapped strictly to {0,1}, result re-symmetrized).
Element func_calc(const Element& x, const FunctionSpec& f);

// |x| = (x* x)^{1/2}, defined for every x.
Element modulus(const Element& x);

cplx trace_of(const Element& x);

// Least projection e with ex = xe = x; pre: x positive.
Element support_projection(const Element& x);

std::pair<cplx, Element> trace_and_support(const Element& x);

enum class RandomKind { hermitian, positive, unitary, projection, generic };

Element random_element(const AlgebraShape& shape, RandomKind kind, Rng& rng);
Element random_element(const AlgebraShape& shape, RandomKind kind, std::uint64_t seed);

// Orthogonal pair of projections (e f = 0), both conjugated by one random
// unitary so the pair is in generic position.
std::pair<Element, Element> random_orthogonal_projections(const AlgebraShape& shape, Rng& rng);

} // namespace ncerg
