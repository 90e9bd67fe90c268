#include "witnesskit/cmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "witnesskit/errors.hpp"

namespace wkit {

CMat CMat::identity(int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat& CMat::operator+=(const CMat& o) {
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

CMat& CMat::operator-=(const CMat& o) {
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

CMat& CMat::operator*=(cplx s) {
  for (auto& v : a_) v *= s;
  return *this;
}

CMat CMat::dagger() const {
  CMat m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

cplx CMat::trace() const {
  cplx t = 0.0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double CMat::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double CMat::hermiticity_defect() const {
  double d = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return d;
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

CMat matmul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: dimension mismatch");
  CMat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == 0.0) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return c;
}

CMat kron(const std::vector<CMat>& factors) {
  if (factors.empty()) throw ValidationError("kron: empty factor list");
  CMat acc = factors[0];
  for (size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i]);
  return acc;
}

double real_trace_product(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw ValidationError("real_trace_product: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx& x = a(i, j);
      const cplx& y = b(j, i);
      s += x.real() * y.real() - x.imag() * y.imag();
    }
  return s;
}

namespace {

double off_diagonal_norm(const CMat& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

EigResult eig_hermitian(const CMat& a) {
  if (a.rows() != a.cols()) throw ValidationError("eig_hermitian: matrix not square");
  if (a.hermiticity_defect() > 1e-10)
    throw ValidationError("eig_hermitian: matrix not Hermitian within 1e-10");

  const int n = a.rows();
  CMat w = a;
  // Symmetrize exactly so rounding in the input cannot bias the iteration.
  for (int i = 0; i < n; ++i) {
    w(i, i) = cplx(w(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const cplx avg = 0.5 * (w(i, j) + std::conj(w(j, i)));
      w(i, j) = avg;
      w(j, i) = std::conj(avg);
    }
  }
  CMat v = CMat::identity(n);

  const double tol = 1e-12 * std::max(1.0, w.frobenius_norm());
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(w) > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = w(p, q);
        const double beta = std::abs(apq);
        if (beta <= tol / (n * n)) continue;
        const double phi = std::arg(apq);
        const double app = w(p, p).real();
        const double aqq = w(q, q).real();
        // Rotation angle for the phase-aligned 2x2 real block.
        const double tau = (aqq - app) / (2.0 * beta);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // Unitary G: columns p,q mix as  col_p' = c*col_p - s*e^{-i phi}*col_q,
        //                                col_q' = s*e^{i phi}*col_p + c*col_q.
        const cplx eip(std::cos(phi), std::sin(phi));
        for (int k = 0; k < n; ++k) {
          const cplx wp = w(k, p), wq = w(k, q);
          w(k, p) = c * wp - s * std::conj(eip) * wq;
          w(k, q) = s * eip * wp + c * wq;
        }
        for (int k = 0; k < n; ++k) {
          const cplx wp = w(p, k), wq = w(q, k);
          w(p, k) = c * wp - s * eip * wq;
          w(q, k) = s * std::conj(eip) * wp + c * wq;
        }
        for (int k = 0; k < n; ++k) {
          const cplx vp = v(k, p), vq = v(k, q);
          v(k, p) = c * vp - s * std::conj(eip) * vq;
          v(k, q) = s * eip * vp + c * vq;
        }
        w(p, q) = 0.0;
        w(q, p) = 0.0;
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return w(i, i).real() < w(j, j).real(); });

  EigResult r;
  r.values.resize(n);
  r.vectors = CMat(n, n);
  for (int k = 0; k < n; ++k) {
    r.values[k] = w(order[k], order[k]).real();
    for (int i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
  }
  return r;
}

double operator_norm(const CMat& a) {
  const auto eig = eig_hermitian(a);
  double m = 0.0;
  for (double v : eig.values) m = std::max(m, std::abs(v));
  return m;
}

double min_eigenvalue(const CMat& a) {
  return eig_hermitian(a).values.front();
}

}  // namespace wkit
