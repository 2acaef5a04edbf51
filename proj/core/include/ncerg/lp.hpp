#pragma once

#include <utility>
#include <vector>

#include "ncerg/algebra.hpp"

namespace ncerg {

// Exponent p in [1, inf].  Infinity is a distinguished state, not a float
// sentinel, so no NaN arithmetic can leak into norm formulas.
class PExp {
public:
    static PExp finite(double p);
    static PExp infinity() { return PExp(0.0, true); }

    bool is_inf() const { return inf_; }
    double value() const { return v_; } // meaningful only when finite
    PExp conjugate() const;             // p' with 1/p + 1/p' = 1

    bool operator==(const PExp&) const = default;

private:
    PExp(double v, bool inf) : v_(v), inf_(inf) {}
    double v_;
    bool inf_;
};

enum class NormMethod { exact_spectral, optimizer, surrogate };

enum class Side { column, row };

struct NormReport {
    double value = 0.0;
    PExp p = PExp::finite(1.0);
    NormMethod method = NormMethod::exact_spectral;
    double tolerance_used = 0.0;
};

// ||x||_p = tau(|x|^p)^{1/p}; p = inf gives the largest singular value.
NormReport lp_norm(const Element& x, PExp p);

// tau of the spectral projection of |x| onto (lambda, inf); pre: lambda > 0.
double distribution(const Element& x, double lambda);

// sup_{lambda>0} lambda * distribution(x,lambda)^{1/p}, computed exactly by
// enumerating the eigenvalue thresholds of |x|.
NormReport weak_lp_quasinorm(const Element& x, double p);

// Anti-duality bracket tau(x y*); conjugate-linear in y.
cplx pairing(const Element& x, const Element& y);

// Singular values of x paired with their block trace weights.
std::vector<std::pair<double, double>> weighted_singular_values(const Element& x);

// Weak quasi-norm of a nonnegative weighted spectrum (shared by the
// Element path and by dilated surrogates).
double weak_quasinorm_from_spectrum(std::vector<std::pair<double, double>> spectrum,
                                    double p);

} // namespace ncerg
