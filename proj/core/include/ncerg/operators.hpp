#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncerg/algebra.hpp"
#include "ncerg/lp.hpp"
#include "ncerg/rc.hpp"

namespace ncerg {

// Construction-time facts about a map.  Construction certificates are
// authoritative; sampled certification can refute but never prove.
struct Certificates {
    bool unitary_conjugation = false;
    bool positive = false;
    bool lamperti = false;
    std::optional<double> isometry_p;   // exponent the map is isometric for
    std::optional<double> power_bound;  // kappa with sup_k ||T^k|| <= kappa
    std::optional<std::vector<double>> convex_weights;
};

// Linear map between algebra shapes, held as a dense matrix acting on
// vectorized elements (per-block row-major stacking).
class SuperOperator {
public:
    SuperOperator() = default;

    static SuperOperator identity(const AlgebraShape& s);
    static SuperOperator from_matrix(AlgebraShape domain, AlgebraShape codomain, CMat m,
                                     Certificates cert = {});
    // Build the matrix column by column from an element-level action.
    static SuperOperator from_action(const AlgebraShape& domain, const AlgebraShape& codomain,
                                     const std::function<Element(const Element&)>& action,
                                     Certificates cert = {});

    const AlgebraShape& domain() const { return dom_; }
    const AlgebraShape& codomain() const { return cod_; }
    const CMat& matrix() const { return mat_; }
    const Certificates& certificates() const { return cert_; }
    Certificates& certificates() { return cert_; }
    bool endomorphism() const { return dom_ == cod_; }

    Element apply(const Element& x) const;

    SuperOperator compose(const SuperOperator& inner) const; // this(inner(x))
    SuperOperator power(int k) const;                        // k < 0 needs invertibility
    SuperOperator scaled(cplx s) const;
    SuperOperator plus(const SuperOperator& o) const;

    // Adjoint with respect to the anti-duality bracket tau(x y*).
    SuperOperator adjoint_wrt_pairing() const;

    bool invertible() const;
    SuperOperator inverse_map() const;
    double condition_estimate() const; // ||M||_F ||M^{-1}||_F

private:
    AlgebraShape dom_, cod_;
    CMat mat_;
    Certificates cert_;
    mutable std::optional<CMat> inv_cache_;
};

std::vector<cplx> vectorize(const Element& x);
Element unvectorize(const AlgebraShape& shape, const std::vector<cplx>& v);

// T(x) = u x u*.
SuperOperator make_unitary_conjugation(const Element& u);

// Data of an isometry in factored form T(x) = w b J(x): a block permutation,
// a per-block conjugating unitary with a homomorphism/anti-homomorphism
// switch, a unitary w, and the exponent.  b is derived from the trace
// weights and never stored.
struct YeadonTriple {
    AlgebraShape shape;
    std::vector<int> perm;       // block k of the input lands in block perm[k]
    std::vector<bool> anti;      // transpose first when true
    std::vector<CMat> unitaries; // u_k on block perm[k] (d_k x d_k)
    Element w;                   // unitary
    double p = 2.0;

    Element derived_b() const;
    Element jordan_apply(const Element& x) const; // J(x)
    Element hom_indicator() const;                // e: image blocks in hom mode
    Element anti_indicator() const;               // f = 1 - e
    void validate() const;
};

SuperOperator make_yeadon(const YeadonTriple& t);

// T = S Phi S^{-1} with S(x) = a x a and Phi conjugation by u; certificate
// kappa = (||a|| ||a^{-1}||)^2 bounds sup_k ||T^k||_{p->p} for every p.
SuperOperator make_power_bounded(const Element& a, const Element& u);

enum class OperatorClass { lamperti, isometry, positive };

struct CertReport {
    OperatorClass cls;
    int trials = 0;
    double max_violation = 0.0;
    bool certified_by_construction = false;
};

CertReport class_certify(const SuperOperator& t, OperatorClass cls, int trials,
                         double p_for_isometry, std::uint64_t seed);

struct ExtensionRatio {
    double ratio = 0.0;
    NormReport numerator;
    NormReport denominator;
};

// rc-norm ratio of (T x_n) against (x_n); both sides share optimizer settings.
ExtensionRatio extension_rc_check(const SuperOperator& t, PExp p, const ElementSequence& seq,
                                  const RcNormOptions& opt = {});

struct DilationWitness {
    int horizon = 0; // N
    SuperOperator q;
    SuperOperator u;
    SuperOperator j;
    double p = 2.0;
};

DilationWitness trivial_dilation_witness(const SuperOperator& isometry, int horizon, double p);

struct DilationReport {
    double max_defect = 0.0;        // max_n sampled ||T^n x - Q U^n J x||_p / ||x||_p
    double q_contraction_excess = 0.0;
    double j_contraction_excess = 0.0;
    double u_isometry_defect = 0.0;
    std::vector<double> per_n_defect;
};

DilationReport dilation_verify(const SuperOperator& t, const DilationWitness& w, int samples,
                               std::uint64_t seed);

} // namespace ncerg
