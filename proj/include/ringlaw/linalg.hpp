#pragma once

// Dense complex linear algebra on top of Eigen: Haar sampling, Hermitian
// eigensystems and log|det|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "ringlaw/errors.hpp"
#include "ringlaw/rng.hpp"

namespace ringlaw {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  return g;
}

/// Haar unitary: Q from the QR of a complex Ginibre matrix, column j scaled by
/// the phase r_jj/|r_jj| so that R has a positive diagonal.
inline CMatrix haar_unitary(Eigen::Index n, Rng& rng) {
  if (n < 1) throw StructuralError("haar_unitary needs n >= 1");
  const CMatrix g = complex_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::complex<double> r = qr.matrixQR()(j, j);
    const double a = std::abs(r);
    if (a > 0.0) q.col(j) *= r / a;
  }
  return q;
}

/// Haar orthogonal, returned with real entries in a complex matrix.
inline CMatrix haar_orthogonal(Eigen::Index n, Rng& rng) {
  if (n < 1) throw StructuralError("haar_orthogonal needs n >= 1");
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  return q.cast<std::complex<double>>();
}

inline double hermitian_defect(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

struct HermitianSpectrum {
  RVector eigenvalues;                  // ascending
  std::optional<CMatrix> eigenvectors;  // columns, orthonormal
  /// max_k |M v_k - lambda_k v_k| with vectors; eps * |M| otherwise.
  double residual = 0.0;
};

inline HermitianSpectrum hermitian_eigensystem(const CMatrix& m, bool want_vectors) {
  if (m.rows() != m.cols()) throw StructuralError("hermitian_eigensystem needs a square matrix");
  const double norm = m.rows() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  if (hermitian_defect(m) > 1e-10 * std::max(1.0, norm)) throw DomainError("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("Hermitian eigensolver did not converge", std::numeric_limits<double>::quiet_NaN());
  HermitianSpectrum out;
  out.eigenvalues = es.eigenvalues();
  if (want_vectors) {
    out.eigenvectors = es.eigenvectors();
    const CMatrix r = m * es.eigenvectors() - es.eigenvectors() * out.eigenvalues.asDiagonal();
    out.residual = r.colwise().norm().maxCoeff();
  } else {
    out.residual = std::numeric_limits<double>::epsilon() * m.rows() * norm;
  }
  return out;
}

struct LogAbsDet {
  double value = 0.0;   // -inf when singular
  double rcond = 1.0;   // reciprocal condition estimate
  bool singular = false;
};

/// Sum of log|u_ii| of an LU factorization with partial pivoting.
inline LogAbsDet log_abs_det(const CMatrix& m) {
  if (m.rows() != m.cols()) throw StructuralError("log_abs_det needs a square matrix");
  LogAbsDet out;
  if (m.rows() == 0) return out;
  Eigen::PartialPivLU<CMatrix> lu(m);
  const auto& f = lu.matrixLU();
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double a = std::abs(f(i, i));
    if (a == 0.0) {
      out.singular = true;
      out.value = -std::numeric_limits<double>::infinity();
      out.rcond = 0.0;
      return out;
    }
    out.value += std::log(a);
  }
  out.rcond = lu.rcond();
  return out;
}

/// log|det(X - w)| for many shifts w. X is reduced once to upper Hessenberg
/// form; each shift then costs one O(N^2) elimination with adjacent-row pivoting.
class ShiftedLogDet {
 public:
  explicit ShiftedLogDet(const CMatrix& x) : n_(x.rows()) {
    if (x.rows() != x.cols()) throw StructuralError("ShiftedLogDet needs a square matrix");
    if (n_ == 0) return;
    Eigen::HessenbergDecomposition<CMatrix> hd(x);
    h_ = hd.matrixH();
  }

  Eigen::Index size() const { return n_; }

  double operator()(std::complex<double> w) const {
    if (n_ == 0) return 0.0;
    const Eigen::Index n = n_;
    Eigen::Matrix<std::complex<double>, 1, Eigen::Dynamic> cur(n), next(n);
    cur = h_.row(0);
    cur(0) -= w;
    double acc = 0.0;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      next.tail(n - k) = h_.row(k + 1).tail(n - k);
      next(k + 1) -= w;
      if (std::abs(next(k)) > std::abs(cur(k))) cur.tail(n - k).swap(next.tail(n - k));
      const double piv = std::abs(cur(k));
      if (piv == 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(piv);
      const std::complex<double> l = next(k) / cur(k);
      cur.tail(n - k - 1) = next.tail(n - k - 1) - l * cur.tail(n - k - 1);
    }
    const double last = std::abs(cur(n - 1));
    if (last == 0.0) return -std::numeric_limits<double>::infinity();
    return acc + std::log(last);
  }

 private:
  Eigen::Index n_;
  Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> h_;
};

}  // namespace ringlaw
