#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace wkit {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Everything in this project is at most
// 16x16 (four qubits during GHZ assembly), so no sparsity and no BLAS.
class CMat {
 public:
  CMat() : rows_(0), cols_(0) {}
  CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static CMat identity(int n);
  static CMat zero(int n) { return CMat(n, n); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<cplx>& data() const { return a_; }

  CMat& operator+=(const CMat& o);
  CMat& operator-=(const CMat& o);
  CMat& operator*=(cplx s);

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }

  CMat dagger() const;
  cplx trace() const;
  double frobenius_norm() const;

  // max_ij |A_ij - (A^dagger)_ij|
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  double max_abs() const;

 private:
  int rows_, cols_;
  std::vector<cplx> a_;
};

CMat matmul(const CMat& a, const CMat& b);
CMat kron(const CMat& a, const CMat& b);
CMat kron(const std::vector<CMat>& factors);

// Re tr(A B); the full product is never formed.
double real_trace_product(const CMat& a, const CMat& b);

struct EigResult {
  std::vector<double> values;  // ascending
  CMat vectors;                // eigenvector k in column k
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Sweeps until the
// off-diagonal Frobenius norm drops below 1e-12 (relative to the matrix norm).
// Throws ValidationError if the input is not Hermitian within 1e-10.
EigResult eig_hermitian(const CMat& a);

// max |eigenvalue| of a Hermitian matrix.
double operator_norm(const CMat& a);

double min_eigenvalue(const CMat& a);

}  // namespace wkit
