#include "ncerg/rc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

void ElementSequence::validate() const {
    if (items.empty()) throw ShapeMismatch("ElementSequence: empty sequence");
    for (const auto& x : items)
        if (!(x.shape() == shape))
            throw ShapeMismatch("ElementSequence: mixed algebra shapes");
}

namespace {

CMat hermitian_part(const CMat& m) {
    CMat h(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

// Gram element sum_n x_n* x_n (column) or sum_n x_n x_n* (row), per block.
Element gram(const ElementSequence& seq, Side side) {
    Element s(seq.shape);
    for (const auto& x : seq.items) {
        for (int k = 0; k < s.blocks(); ++k) {
            const CMat& b = x.block(k);
            s.block(k) += (side == Side::column) ? b.adjoint() * b : b * b.adjoint();
        }
    }
    for (int k = 0; k < s.blocks(); ++k) s.block(k) = hermitian_part(s.block(k));
    return s;
}

// tau-weighted trace of g(S) for the positive Gram element S.
double spectral_sum(const Element& s, const std::function<double(double)>& g) {
    double acc = 0;
    for (int k = 0; k < s.blocks(); ++k) {
        HermEig e = eig_hermitian_matrix(s.block(k));
        for (double t : e.values) acc += s.shape().trace_weights[k] * g(std::max(t, 0.0));
    }
    return acc;
}

double side_norm_pth_power(const ElementSequence& seq, double p, Side side) {
    Element s = gram(seq, side);
    return spectral_sum(s, [p](double t) { return std::pow(t, p / 2.0); });
}

} // namespace

NormReport col_row_norm(const ElementSequence& seq, PExp p, Side side) {
    seq.validate();
    NormReport r;
    r.p = p;
    r.method = NormMethod::exact_spectral;
    r.tolerance_used = tol::kEigOffdiagRel;
    Element s = gram(seq, side);
    if (p.is_inf()) {
        double top = 0;
        for (int k = 0; k < s.blocks(); ++k) {
            HermEig e = eig_hermitian_matrix(s.block(k));
            if (!e.values.empty()) top = std::max(top, std::max(0.0, e.values.front()));
        }
        r.value = std::sqrt(top);
        return r;
    }
    const double pv = p.value();
    r.value = std::pow(spectral_sum(s, [pv](double t) { return std::pow(t, pv / 2.0); }),
                       1.0 / pv);
    return r;
}

namespace {

// ---- sum-norm optimizer (p < 2) -------------------------------------------

struct SumNormProblem {
    const ElementSequence& x;
    double p;

    int n() const { return x.size(); }

    double objective(const std::vector<Element>& y) const {
        ElementSequence ys{x.shape, y};
        ElementSequence zs{x.shape, residual(y)};
        return side_norm_pth_power(ys, p, Side::column) +
               side_norm_pth_power(zs, p, Side::row);
    }

    std::vector<Element> residual(const std::vector<Element>& y) const {
        std::vector<Element> z;
        z.reserve(y.size());
        for (int i = 0; i < n(); ++i) z.push_back(x.items[i] - y[i]);
        return z;
    }

    // Spectral derivative g'(S) with eigenvalues clamped away from zero;
    // this is the subgradient selection at non-smooth points.
    Element gram_derivative(const Element& s) const {
        Element r(s.shape());
        const double expo = p / 2.0 - 1.0;
        for (int k = 0; k < s.blocks(); ++k) {
            HermEig e = eig_hermitian_matrix(s.block(k));
            const int d = s.block(k).rows();
            double top = e.values.empty() ? 0.0 : std::max(0.0, e.values.front());
            const double clamp = std::max(1e-14 * std::max(top, 1.0), 1e-30);
            CMat lam(d, d);
            for (int i = 0; i < d; ++i)
                lam(i, i) = 0.5 * p * std::pow(std::max(e.values[i], clamp), expo);
            r.block(k) = e.vectors * lam * e.vectors.adjoint();
        }
        return r;
    }

    // Gradient of the objective with respect to (y_n).
    std::vector<Element> gradient(const std::vector<Element>& y) const {
        ElementSequence ys{x.shape, y};
        std::vector<Element> z = residual(y);
        ElementSequence zs{x.shape, z};
        Element dc = gram_derivative(gram(ys, Side::column));
        Element dr = gram_derivative(gram(zs, Side::row));
        std::vector<Element> g;
        g.reserve(y.size());
        for (int i = 0; i < n(); ++i) {
            Element gi(x.shape);
            for (int k = 0; k < gi.blocks(); ++k) {
                const double w = x.shape.trace_weights[k];
                gi.block(k) = (2.0 * w) * (y[i].block(k) * dc.block(k)) -
                              (2.0 * w) * (dr.block(k) * z[i].block(k));
            }
            g.push_back(std::move(gi));
        }
        return g;
    }
};

double seq_frobenius(const std::vector<Element>& v) {
    double s = 0;
    for (const auto& e : v) {
        double f = e.frobenius();
        s += f * f;
    }
    return std::sqrt(s);
}

// Intersection norm at the conjugate exponent q in (2, inf]; the infinite
// case (dual of p = 1) is the max of the two sides.
double intersection_norm(const ElementSequence& seq, PExp q) {
    if (q.is_inf()) {
        return std::max(col_row_norm(seq, q, Side::column).value,
                        col_row_norm(seq, q, Side::row).value);
    }
    double c = side_norm_pth_power(seq, q.value(), Side::column);
    double r = side_norm_pth_power(seq, q.value(), Side::row);
    return std::pow(c + r, 1.0 / q.value());
}

double dual_value(const ElementSequence& x, const std::vector<Element>& w, PExp q) {
    ElementSequence ws{x.shape, w};
    const double nrm = intersection_norm(ws, q);
    if (!(nrm > 0)) return 0.0;
    cplx acc = 0;
    for (int i = 0; i < x.size(); ++i) acc += pairing(x.items[i], w[i]);
    return std::abs(acc) / nrm;
}

// Norming-functional candidates read off the primal decomposition: at the
// optimum  y_n C^{p/2-1}  and  R^{p/2-1} z_n  coincide and certify the value.
std::vector<std::vector<Element>> kkt_candidates(const SumNormProblem& prob,
                                                 const std::vector<Element>& y) {
    std::vector<std::vector<Element>> out;
    const auto& x = prob.x;
    std::vector<Element> z = prob.residual(y);
    auto pseudo_power = [&](const Element& s) {
        Element r(s.shape());
        const double expo = prob.p / 2.0 - 1.0;
        for (int k = 0; k < s.blocks(); ++k) {
            HermEig e = eig_hermitian_matrix(s.block(k));
            const int d = s.block(k).rows();
            double top = e.values.empty() ? 0.0 : std::max(0.0, e.values.front());
            const double cut = 1e-12 * std::max(top, 1.0);
            CMat lam(d, d);
            for (int i = 0; i < d; ++i)
                lam(i, i) = (e.values[i] > cut) ? std::pow(e.values[i], expo) : 0.0;
            r.block(k) = e.vectors * lam * e.vectors.adjoint();
        }
        return r;
    };
    Element cpow = pseudo_power(gram(ElementSequence{x.shape, y}, Side::column));
    Element rpow = pseudo_power(gram(ElementSequence{x.shape, z}, Side::row));
    std::vector<Element> w1, w2, w3;
    for (int i = 0; i < x.size(); ++i) {
        Element a(x.shape), b(x.shape);
        for (int k = 0; k < a.blocks(); ++k) {
            a.block(k) = y[i].block(k) * cpow.block(k);
            b.block(k) = rpow.block(k) * z[i].block(k);
        }
        w3.push_back(0.5 * (a + b));
        w1.push_back(std::move(a));
        w2.push_back(std::move(b));
    }
    out.push_back(std::move(w1));
    out.push_back(std::move(w2));
    out.push_back(std::move(w3));
    return out;
}

SumNormSolution solve_sum_norm(const ElementSequence& x, double p,
                               const RcNormOptions& opt) {
    SumNormProblem prob{x, p};
    const int n = x.size();
    Rng rng(opt.seed);

    const double scale = seq_frobenius(x.items);
    std::vector<Element> best_y;
    double best_obj = std::numeric_limits<double>::infinity();

    auto consider = [&](const std::vector<Element>& y) {
        double v = prob.objective(y);
        if (v < best_obj) {
            best_obj = v;
            best_y = y;
        }
    };

    std::vector<Element> half(x.items);
    for (auto& e : half) e *= 0.5;
    std::vector<Element> zero(static_cast<size_t>(n), Element::zero(x.shape));

    for (int restart = 0; restart < opt.restarts; ++restart) {
        std::vector<Element> y;
        switch (restart % 5) {
            case 0: y = x.items; break;
            case 1: y = zero; break;
            case 2: y = half; break;
            default: {
                y = half;
                for (auto& e : y) {
                    Element noise = random_element(x.shape, RandomKind::generic, rng);
                    e += (0.25 * scale / std::max(1.0, noise.frobenius())) * noise;
                }
                break;
            }
        }
        consider(y);
        const double step0 = 0.25 * std::max(scale, 1e-12);
        for (int t = 1; t <= opt.iterations; ++t) {
            std::vector<Element> g = prob.gradient(y);
            const double gn = seq_frobenius(g);
            if (!(gn > 1e-300)) break;
            const double eta = step0 / (std::sqrt(static_cast<double>(t)) * gn);
            for (int i = 0; i < n; ++i) y[i] -= eta * g[i];
            consider(y);
        }
    }

    SumNormSolution sol;
    sol.value = std::pow(best_obj, 1.0 / p);
    sol.column_part = ElementSequence{x.shape, best_y};
    sol.row_part = ElementSequence{x.shape, prob.residual(best_y)};

    // dual lower bound: sampled unit-ball directions plus the KKT candidates
    const PExp q = PExp::finite(p).conjugate();
    double dual = 0;
    for (int s = 0; s < opt.dual_samples; ++s) {
        std::vector<Element> w;
        w.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            w.push_back(random_element(x.shape, RandomKind::generic, rng));
        dual = std::max(dual, dual_value(x, w, q));
    }
    for (auto& w : kkt_candidates(prob, best_y)) dual = std::max(dual, dual_value(x, w, q));

    sol.dual_lower_bound = dual;
    sol.gap = (sol.value - dual) / std::max(sol.value, 1e-12);
    sol.gap_exceeded = sol.gap > opt.gap_threshold;
    return sol;
}

} // namespace

RcNormResult rc_norm(const ElementSequence& seq, PExp p, const RcNormOptions& opt) {
    seq.validate();
    RcNormResult out;
    if (p.is_inf()) {
        double c = col_row_norm(seq, p, Side::column).value;
        double r = col_row_norm(seq, p, Side::row).value;
        out.report = {std::max(c, r), p, NormMethod::exact_spectral, tol::kEigOffdiagRel};
        return out;
    }
    const double pv = p.value();
    if (pv >= 2.0) {
        double c = side_norm_pth_power(seq, pv, Side::column);
        double r = side_norm_pth_power(seq, pv, Side::row);
        out.report = {std::pow(c + r, 1.0 / pv), p, NormMethod::exact_spectral,
                      tol::kEigOffdiagRel};
        return out;
    }
    SumNormSolution sol = solve_sum_norm(seq, pv, opt);
    out.report = {sol.value, p, NormMethod::optimizer, sol.gap};
    out.solution = std::move(sol);
    return out;
}

namespace {

// Flat real-coordinate view of a candidate decomposition (y_n).
struct FlatView {
    const ElementSequence* x;
    int n, dim; // dim = 2 * n * D

    std::vector<Element> unflatten(const std::vector<double>& v) const {
        std::vector<Element> y;
        y.reserve(static_cast<size_t>(n));
        size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            Element e(x->shape);
            for (int k = 0; k < e.blocks(); ++k) {
                CMat& b = e.block(k);
                for (int r = 0; r < b.rows(); ++r)
                    for (int c = 0; c < b.cols(); ++c) {
                        b(r, c) = cplx(v[idx], v[idx + 1]);
                        idx += 2;
                    }
            }
            y.push_back(std::move(e));
        }
        return y;
    }

    std::vector<double> flatten(const std::vector<Element>& y) const {
        std::vector<double> v(static_cast<size_t>(dim));
        size_t idx = 0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < y[i].blocks(); ++k) {
                const CMat& b = y[i].block(k);
                for (int r = 0; r < b.rows(); ++r)
                    for (int c = 0; c < b.cols(); ++c) {
                        v[idx++] = b(r, c).real();
                        v[idx++] = b(r, c).imag();
                    }
            }
        return v;
    }
};

double golden_line_min(const std::function<double(double)>& f, double lo, double hi,
                       double tol_t) {
    const double phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol_t) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

double rc_sum_oracle(const ElementSequence& seq, double p, int grid_resolution) {
    seq.validate();
    if (!(p >= 1.0) || p >= 2.0)
        throw InvalidP("rc_sum_oracle: exponent must satisfy 1 <= p < 2");
    if (grid_resolution < 1) grid_resolution = 1;

    SumNormProblem prob{seq, p};
    FlatView fv{&seq, seq.size(), 2 * seq.size() * seq.shape.dim_total()};

    const double combos = std::pow(static_cast<double>(grid_resolution),
                                   static_cast<double>(fv.dim));
    if (combos > 1e7)
        throw TooLarge("rc_sum_oracle: grid would exceed the evaluation budget");

    const std::vector<double> target = fv.flatten(seq.items);
    auto eval = [&](const std::vector<double>& v) { return prob.objective(fv.unflatten(v)); };

    // coarse grid over fractions of the target coordinates
    std::vector<std::pair<double, std::vector<double>>> ranked;
    {
        std::vector<double> v(static_cast<size_t>(fv.dim), 0.0);
        std::vector<int> idx(static_cast<size_t>(fv.dim), 0);
        const long total = static_cast<long>(combos);
        for (long it = 0; it < total; ++it) {
            long rem = it;
            for (int j = 0; j < fv.dim; ++j) {
                idx[j] = static_cast<int>(rem % grid_resolution);
                rem /= grid_resolution;
            }
            for (int j = 0; j < fv.dim; ++j) {
                const double t = (grid_resolution == 1)
                                     ? 0.5
                                     : static_cast<double>(idx[j]) / (grid_resolution - 1);
                v[j] = target[j] * t;
            }
            ranked.emplace_back(eval(v), v);
        }
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // local refinement: exact coordinate line searches until stall
    double scale = 0;
    for (double t : target) scale = std::max(scale, std::abs(t));
    scale = std::max(scale, 1e-6);

    auto refine = [&](std::vector<double> v) {
        double cur = eval(v);
        for (int pass = 0; pass < 80; ++pass) {
            const double before = cur;
            for (int j = 0; j < fv.dim; ++j) {
                const double vj = v[j];
                auto f1 = [&](double t) {
                    v[j] = t;
                    double r = eval(v);
                    v[j] = vj;
                    return r;
                };
                const double span = 2.0 * scale + std::abs(vj);
                double t = golden_line_min(f1, vj - span, vj + span, 1e-9 * scale);
                double ft = f1(t);
                if (ft < cur) {
                    v[j] = t;
                    cur = ft;
                }
            }
            if (before - cur <= 1e-10 * std::max(1.0, cur)) break;
        }
        return cur;
    };

    double best = ranked.empty() ? eval(std::vector<double>(fv.dim, 0.0)) : ranked[0].first;
    const size_t starts = std::min<size_t>(ranked.size(), 3);
    for (size_t s = 0; s < starts; ++s) best = std::min(best, refine(ranked[s].second));
    // endpoint starts: all-column, all-row
    best = std::min(best, refine(target));
    best = std::min(best, refine(std::vector<double>(static_cast<size_t>(fv.dim), 0.0)));

    return std::pow(best, 1.0 / p);
}

NormReport khintchine_norm(const ElementSequence& seq, PExp p, KhintchineMode mode,
                           std::uint64_t seed) {
    seq.validate();
    if (p.is_inf()) throw InvalidP("khintchine_norm: finite exponent required");
    const int n = seq.size();
    NormReport r;
    r.p = p;
    const double pv = p.value();

    auto signed_sum_norm_pow = [&](std::uint64_t mask) {
        Element s(seq.shape);
        for (int i = 0; i < n; ++i) {
            if (mask & (1ull << i))
                s += seq.items[i];
            else
                s -= seq.items[i];
        }
        return std::pow(lp_norm(s, p).value, pv);
    };

    if (mode.exact) {
        if (n > 14) throw TooManyItems("khintchine_norm: exact mode limited to n <= 14");
        double acc = 0;
        const std::uint64_t total = 1ull << n;
        for (std::uint64_t mask = 0; mask < total; ++mask) acc += signed_sum_norm_pow(mask);
        r.value = std::pow(acc / static_cast<double>(total), 1.0 / pv);
        r.method = NormMethod::exact_spectral;
        r.tolerance_used = tol::kEigOffdiagRel;
        return r;
    }

    if (mode.trials < 1) throw InvalidP("khintchine_norm: monte-carlo needs trials >= 1");
    Rng rng(seed);
    double sum = 0, sumsq = 0;
    for (int t = 0; t < mode.trials; ++t) {
        const double v = signed_sum_norm_pow(rng.next_u64());
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / mode.trials;
    const double var = std::max(0.0, sumsq / mode.trials - mean * mean);
    const double se_mean = std::sqrt(var / mode.trials);
    r.value = std::pow(mean, 1.0 / pv);
    r.method = NormMethod::surrogate;
    // delta-method standard error of mean^{1/p}
    r.tolerance_used = (mean > 0) ? se_mean * std::pow(mean, 1.0 / pv - 1.0) / pv : se_mean;
    return r;
}

NormReport weak_rc_surrogate(const ElementSequence& seq) {
    seq.validate();
    const int n = seq.size();
    if (n > 12) throw TooManyItems("weak_rc_surrogate: dilation limited to n <= 12");
    const std::uint64_t total = 1ull << n;
    const double wscale = 1.0 / static_cast<double>(total);
    std::vector<std::pair<double, double>> spectrum;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Element s(seq.shape);
        for (int i = 0; i < n; ++i) {
            if (mask & (1ull << i))
                s += seq.items[i];
            else
                s -= seq.items[i];
        }
        for (auto& [sv, w] : weighted_singular_values(s))
            spectrum.emplace_back(sv, w * wscale);
    }
    NormReport r;
    r.p = PExp::finite(1.0);
    r.method = NormMethod::surrogate;
    r.tolerance_used = tol::kEigOffdiagRel;
    r.value = weak_quasinorm_from_spectrum(std::move(spectrum), 1.0);
    return r;
}

} // namespace ncerg
