#pragma once

#include <complex>
#include <vector>

namespace ncerg {

using cplx = std::complex<double>;

// Dense complex matrix, row-major.  Sized for desk-scale operator work
// (block dimensions <= 16, vectorized maps up to a few hundred rows);
// everything is plain O(n^3) linear algebra with no external dependency.
class CMat {
public:
    CMat() : rows_(0), cols_(0) {}
    CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

    static CMat identity(int n);
    static CMat zeros(int rows, int cols) { return CMat(rows, cols); }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    CMat& operator+=(const CMat& o);
    CMat& operator-=(const CMat& o);
    CMat& operator*=(cplx s);

    CMat adjoint() const;
    CMat transpose() const;
    CMat conjugate() const;

    cplx trace() const;
    double frobenius() const;
    double max_abs() const;

    bool same_dims(const CMat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    int rows_, cols_;
    std::vector<cplx> a_;
};

CMat operator+(CMat a, const CMat& b);
CMat operator-(CMat a, const CMat& b);
CMat operator*(const CMat& a, const CMat& b);
CMat operator*(cplx s, CMat a);
CMat operator*(CMat a, cplx s);

// Hermitian eigensystem, eigenvalues descending, eigenvectors as columns.
struct HermEig {
    std::vector<double> values;
    CMat vectors;
    double off_diagonal; // residual off-diagonal mass at convergence
};

// Cyclic Jacobi for complex Hermitian matrices.  Throws NoConvergence when
// the sweep budget is exhausted.  Eigenvector columns inside an eigenvalue
// cluster (gap below the cluster tolerance) are re-orthonormalized so that
// spectral projections are stable under degeneracy.
HermEig eig_hermitian_matrix(const CMat& h);

// Eigensystem of a unitary matrix via simultaneous diagonalization of its
// Hermitian and anti-Hermitian parts.
struct UnitaryEig {
    std::vector<cplx> values;
    CMat vectors;
};
UnitaryEig eig_unitary_matrix(const CMat& u);

// Gaussian elimination with partial pivoting.  Throws NotInvertible.
CMat inverse(const CMat& m);

} // namespace ncerg
