#include "ncerg/cmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncerg/errors.hpp"
#include "ncerg/tolerances.hpp"

namespace ncerg {

CMat CMat::identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat& CMat::operator+=(const CMat& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMat& CMat::operator-=(const CMat& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMat& CMat::operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
}

CMat CMat::adjoint() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMat CMat::transpose() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMat CMat::conjugate() const {
    CMat r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(i, j) = std::conj((*this)(i, j));
    return r;
}

cplx CMat::trace() const {
    cplx t = 0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double CMat::frobenius() const {
    double s = 0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double CMat::max_abs() const {
    double m = 0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

CMat operator+(CMat a, const CMat& b) { return a += b; }
CMat operator-(CMat a, const CMat& b) { return a -= b; }
CMat operator*(cplx s, CMat a) { return a *= s; }
CMat operator*(CMat a, cplx s) { return a *= s; }

CMat operator*(const CMat& a, const CMat& b) {
    CMat r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            cplx aik = a(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

namespace {

double offdiag_frobenius(const CMat& a) {
    double s = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p,q).  The 2x2 pivot block is first
// phase-rotated to a real symmetric block, then the standard symmetric Schur
// rotation is applied; the combined plane transform on columns {p,q} is
//   col_p <- u*c*col_p - s*col_q,   col_q <- u*s*col_p + c*col_q
// with u the unimodular phase of a(p,q).
void jacobi_rotate(CMat& a, CMat& v, int p, int q) {
    const cplx g = a(p, q);
    const double r = std::abs(g);
    if (r == 0.0) return;
    const cplx u = g / r;
    const double alpha = a(p, p).real();
    const double beta = a(q, q).real();
    const double tau = (beta - alpha) / (2.0 * r);
    double t;
    if (tau >= 0)
        t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
    else
        t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const int n = a.rows();
    // A <- J^* A J with J acting on columns {p,q}
    for (int i = 0; i < n; ++i) {
        const cplx aip = a(i, p);
        const cplx aiq = a(i, q);
        a(i, p) = aip * (u * c) - aiq * s;
        a(i, q) = aip * (u * s) + aiq * c;
    }
    for (int j = 0; j < n; ++j) {
        const cplx apj = a(p, j);
        const cplx aqj = a(q, j);
        a(p, j) = std::conj(u * c) * apj - s * aqj;
        a(q, j) = std::conj(u * s) * apj + c * aqj;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = cplx(a(p, p).real(), 0.0);
    a(q, q) = cplx(a(q, q).real(), 0.0);
    for (int i = 0; i < n; ++i) {
        const cplx vip = v(i, p);
        const cplx viq = v(i, q);
        v(i, p) = vip * (u * c) - viq * s;
        v(i, q) = vip * (u * s) + viq * c;
    }
}

// Modified Gram-Schmidt on a set of columns, in place.
void orthonormalize_columns(CMat& v, const std::vector<int>& cols) {
    for (size_t a = 0; a < cols.size(); ++a) {
        const int ca = cols[a];
        for (size_t b = 0; b < a; ++b) {
            const int cb = cols[b];
            cplx dot = 0;
            for (int i = 0; i < v.rows(); ++i) dot += std::conj(v(i, cb)) * v(i, ca);
            for (int i = 0; i < v.rows(); ++i) v(i, ca) -= dot * v(i, cb);
        }
        double nrm = 0;
        for (int i = 0; i < v.rows(); ++i) nrm += std::norm(v(i, ca));
        nrm = std::sqrt(nrm);
        if (nrm > 0)
            for (int i = 0; i < v.rows(); ++i) v(i, ca) /= nrm;
    }
}

} // namespace

HermEig eig_hermitian_matrix(const CMat& h) {
    const int n = h.rows();
    CMat a = h;
    CMat v = CMat::identity(n);
    const double scale = h.frobenius();
    const double thresh = tol::kEigOffdiagRel * std::max(scale, 1e-300);

    double off = offdiag_frobenius(a);
    int sweep = 0;
    while (off > thresh) {
        if (sweep++ >= tol::kEigSweepBudget)
            throw NoConvergence("eig_hermitian: sweep budget exhausted");
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > thresh / (n + 1.0)) jacobi_rotate(a, v, p, q);
        off = offdiag_frobenius(a);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return diag[i] > diag[j]; });

    HermEig out;
    out.values.resize(n);
    out.vectors = CMat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    out.off_diagonal = off;

    const double gap = tol::kClusterGap * std::max(1.0, scale);
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && out.values[end - 1] - out.values[end] < gap) ++end;
        if (end - start > 1) {
            std::vector<int> cols(static_cast<size_t>(end - start));
            std::iota(cols.begin(), cols.end(), start);
            orthonormalize_columns(out.vectors, cols);
        }
        start = end;
    }
    return out;
}

UnitaryEig eig_unitary_matrix(const CMat& u) {
    const int n = u.rows();
    const CMat ua = u.adjoint();
    CMat h1(n, n), h2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            h1(i, j) = 0.5 * (u(i, j) + ua(i, j));
            h2(i, j) = cplx(0, -0.5) * (u(i, j) - ua(i, j));
        }
    HermEig e1 = eig_hermitian_matrix(h1);
    CMat vecs = e1.vectors;

    // diagonalize the anti-Hermitian part inside each degenerate cluster
    const double gap = 1e-8 * std::max(1.0, u.frobenius());
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && e1.values[end - 1] - e1.values[end] < gap) ++end;
        const int m = end - start;
        if (m > 1) {
            CMat sub(n, m);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) sub(i, j) = vecs(i, start + j);
            CMat comp = sub.adjoint() * (h2 * sub);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    comp(i, j) = 0.5 * (comp(i, j) + std::conj(comp(j, i)));
            HermEig ec = eig_hermitian_matrix(comp);
            CMat rot = sub * ec.vectors;
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) vecs(i, start + j) = rot(i, j);
        }
        start = end;
    }

    UnitaryEig out;
    out.vectors = vecs;
    out.values.resize(n);
    for (int j = 0; j < n; ++j) {
        cplx lam = 0;
        for (int i = 0; i < n; ++i) {
            cplx uv = 0;
            for (int k = 0; k < n; ++k) uv += u(i, k) * vecs(k, j);
            lam += std::conj(vecs(i, j)) * uv;
        }
        out.values[j] = lam;
    }
    return out;
}

CMat inverse(const CMat& m) {
    const int n = m.rows();
    CMat a = m;
    CMat inv = CMat::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int i = col + 1; i < n; ++i) {
            if (std::abs(a(i, col)) > best) {
                best = std::abs(a(i, col));
                piv = i;
            }
        }
        if (best < 1e-300) throw NotInvertible("inverse: singular matrix");
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const cplx d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            const cplx f = a(i, col);
            if (f == cplx(0.0)) continue;
            for (int j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

} // namespace ncerg
