#include "ncerg/lp.hpp"

#include <algorithm>
#include <cmath>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

PExp PExp::finite(double p) {
    if (!(p >= 1.0)) throw InvalidP("PExp: exponent must satisfy p >= 1");
    return PExp(p, false);
}

PExp PExp::conjugate() const {
    if (inf_) return PExp::finite(1.0);
    if (v_ == 1.0) return PExp::infinity();
    return PExp::finite(v_ / (v_ - 1.0));
}

std::vector<std::pair<double, double>> weighted_singular_values(const Element& x) {
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < x.blocks(); ++k) {
        const CMat& b = x.block(k);
        // selfadjoint blocks: singular values are |eigenvalues|, which avoids
        // the precision loss of squaring near the kernel
        CMat herm(b.rows(), b.cols());
        double dev = 0;
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j) {
                herm(i, j) = 0.5 * (b(i, j) + std::conj(b(j, i)));
                dev += std::norm(b(i, j) - std::conj(b(j, i)));
            }
        if (std::sqrt(dev) <= 1e-13 * std::max(1.0, b.frobenius())) {
            HermEig e = eig_hermitian_matrix(herm);
            for (double t : e.values)
                out.emplace_back(std::abs(t), x.shape().trace_weights[k]);
            continue;
        }
        CMat sq = b.adjoint() * b;
        for (int i = 0; i < sq.rows(); ++i)
            for (int j = 0; j < sq.cols(); ++j)
                sq(i, j) = 0.5 * (sq(i, j) + std::conj(sq(j, i)));
        HermEig e = eig_hermitian_matrix(sq);
        for (double t : e.values)
            out.emplace_back(std::sqrt(std::max(t, 0.0)), x.shape().trace_weights[k]);
    }
    return out;
}

NormReport lp_norm(const Element& x, PExp p) {
    auto sv = weighted_singular_values(x);
    NormReport r;
    r.p = p;
    r.method = NormMethod::exact_spectral;
    r.tolerance_used = tol::kEigOffdiagRel;
    if (p.is_inf()) {
        double m = 0;
        for (auto& [s, w] : sv) m = std::max(m, s);
        r.value = m;
        return r;
    }
    double acc = 0;
    for (auto& [s, w] : sv) acc += w * std::pow(s, p.value());
    r.value = std::pow(acc, 1.0 / p.value());
    return r;
}

double distribution(const Element& x, double lambda) {
    if (!(lambda > 0)) throw LambdaNonpositive("distribution: lambda must be positive");
    double mass = 0;
    for (auto& [s, w] : weighted_singular_values(x))
        if (s > lambda) mass += w;
    return mass;
}

double weak_quasinorm_from_spectrum(std::vector<std::pair<double, double>> spectrum,
                                    double p) {
    if (!(p >= 1.0)) throw InvalidP("weak quasi-norm: exponent must satisfy p >= 1");
    std::sort(spectrum.begin(), spectrum.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    // For lambda just below a threshold mu the distribution equals the
    // cumulative weight of eigenvalues >= mu, so the sup is a finite max.
    double best = 0;
    double cum = 0;
    size_t i = 0;
    while (i < spectrum.size()) {
        const double mu = spectrum[i].first;
        if (mu <= 0) break;
        while (i < spectrum.size() && spectrum[i].first == mu) {
            cum += spectrum[i].second;
            ++i;
        }
        best = std::max(best, mu * std::pow(cum, 1.0 / p));
    }
    return best;
}

NormReport weak_lp_quasinorm(const Element& x, double p) {
    NormReport r;
    r.p = PExp::finite(p);
    r.method = NormMethod::exact_spectral;
    r.tolerance_used = tol::kEigOffdiagRel;
    r.value = weak_quasinorm_from_spectrum(weighted_singular_values(x), p);
    return r;
}

cplx pairing(const Element& x, const Element& y) {
    if (!(x.shape() == y.shape()))
        throw ShapeMismatch("pairing: operands live on different algebra shapes");
    cplx acc = 0;
    for (int k = 0; k < x.blocks(); ++k) {
        const CMat& a = x.block(k);
        const CMat& b = y.block(k);
        cplx t = 0;
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) t += a(i, j) * std::conj(b(i, j));
        acc += x.shape().trace_weights[k] * t;
    }
    return acc;
}

} // namespace ncerg
