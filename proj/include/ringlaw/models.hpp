#pragma once

// Random matrix models: X = U Sigma V*, its hermitization H^w, and the block
// additive model H = A + U B U* with its dual.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "ringlaw/errors.hpp"
#include "ringlaw/linalg.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/rng.hpp"

namespace ringlaw {

enum class Symmetry { unitary, orthogonal };

inline std::string to_string(Symmetry s) { return s == Symmetry::unitary ? "unitary" : "orthogonal"; }

inline Symmetry symmetry_from_string(const std::string& s) {
  if (s == "unitary") return Symmetry::unitary;
  if (s == "orthogonal") return Symmetry::orthogonal;
  throw StructuralError("unknown symmetry class '" + s + "'");
}

inline CMatrix haar(Symmetry s, Eigen::Index n, Rng& rng) {
  return s == Symmetry::unitary ? haar_unitary(n, rng) : haar_orthogonal(n, rng);
}

struct SingleRingEnsemble {
  std::vector<double> sigma_diag;
  Symmetry symmetry = Symmetry::unitary;
  std::uint64_t seed = 0;

  std::size_t N() const { return sigma_diag.size(); }

  void validate() const {
    if (sigma_diag.empty()) throw StructuralError("ensemble needs N >= 1");
    for (double s : sigma_diag)
      if (!(s >= 0.0) || !std::isfinite(s)) throw StructuralError("singular values must be finite and nonnegative");
  }
};

struct SingleRingSample {
  CMatrix U;
  CMatrix V;
  CMatrix X;
};

inline CMatrix diag_matrix(const std::vector<std::complex<double>>& d) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return m;
}

/// X = U Sigma V* with independent Haar U, V; U is drawn first.
inline SingleRingSample sample_X_with_factors(const SingleRingEnsemble& e, Rng& rng) {
  e.validate();
  const auto n = static_cast<Eigen::Index>(e.N());
  SingleRingSample s;
  s.U = haar(e.symmetry, n, rng);
  s.V = haar(e.symmetry, n, rng);
  Eigen::VectorXd sig(n);
  for (Eigen::Index i = 0; i < n; ++i) sig(i) = e.sigma_diag[static_cast<std::size_t>(i)];
  s.X = s.U * sig.asDiagonal() * s.V.adjoint();
  return s;
}

inline CMatrix sample_X(const SingleRingEnsemble& e, Rng& rng) { return sample_X_with_factors(e, rng).X; }

/// H^w = [[0, X - w], [(X - w)*, 0]].
inline CMatrix hermitization(const CMatrix& x, std::complex<double> w) {
  if (x.rows() != x.cols()) throw StructuralError("hermitization needs a square matrix");
  const Eigen::Index n = x.rows();
  const CMatrix y = x - w * CMatrix::Identity(n, n);
  CMatrix h = CMatrix::Zero(2 * n, 2 * n);
  h.topRightCorner(n, n) = y;
  h.bottomLeftCorner(n, n) = y.adjoint();
  return h;
}

/// Spectrum of H^w as {-s_i} ∪ {s_i} from the singular values s_i of X - w.
inline HermitianSpectrum hermitization_spectrum(const CMatrix& x, std::complex<double> w) {
  const Eigen::Index n = x.rows();
  const CMatrix y = x - w * CMatrix::Identity(n, n);
  Eigen::BDCSVD<CMatrix> svd(y);
  const Eigen::VectorXd s = svd.singularValues();  // descending
  HermitianSpectrum out;
  out.eigenvalues.resize(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = -s(i);
    out.eigenvalues(2 * n - 1 - i) = s(i);
  }
  out.residual = std::numeric_limits<double>::epsilon() * n * (n > 0 ? s(0) : 0.0);
  return out;
}

/// m^w(i eta) = (1/2N) Tr (H^w - i eta)^-1 = (1/2N) sum_k i eta / (lambda_k^2 + eta^2).
inline std::complex<double> m_w(const HermitianSpectrum& spec, double eta) {
  if (!(eta > 0.0)) throw DomainError("m_w needs eta > 0");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    const double l = spec.eigenvalues(k);
    acc += eta / (l * l + eta * eta);
  }
  return {0.0, acc / static_cast<double>(spec.eigenvalues.size())};
}

/// lambda_1^w = min_k |lambda_k|.
inline double smallest_sv(const HermitianSpectrum& spec) { return spec.eigenvalues.cwiseAbs().minCoeff(); }

// ---------------------------------------------------------------------------
// K-split of (1/2N) Tr log|H^w|

/// (1/2N) sum log|lambda_k|.
inline double trace_log_abs(const HermitianSpectrum& spec) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) acc += std::log(std::abs(spec.eigenvalues(k)));
  return acc / static_cast<double>(spec.eigenvalues.size());
}

/// (1/2N) sum log|lambda_k - iK|.
inline double trace_log_abs_shifted(const HermitianSpectrum& spec, double K) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
    const double l = spec.eigenvalues(k);
    acc += 0.5 * std::log(l * l + K * K);
  }
  return acc / static_cast<double>(spec.eigenvalues.size());
}

/// int_a^b Im m^w(i eta) d eta by Gauss-Kronrod on geometrically growing
/// panels starting at the smallest |lambda|, where the integrand varies fastest.
inline double im_m_w_integral(const HermitianSpectrum& spec, double a, double b) {
  if (!(b >= a) || a < 0.0) throw DomainError("need 0 <= a <= b");
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double eta) { return m_w(spec, std::max(eta, 1e-300)).imag(); };
  const double l1 = std::max(smallest_sv(spec), 1e-12 * std::max(1.0, b));
  std::vector<double> cuts{a};
  for (double c = l1 / 4.0; c < b; c *= 2.0)
    if (c > a) cuts.push_back(c);
  cuts.push_back(b);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    acc += GK::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14);
  }
  return acc;
}

struct KSplit {
  double lhs = 0.0;      // (1/2N) Tr log|H^w|
  double shifted = 0.0;  // (1/2N) Tr log|H^w - iK|
  double integral = 0.0; // int_0^K Im m^w(i eta) d eta
  double defect() const { return lhs - (shifted - integral); }
};

inline KSplit k_split(const HermitianSpectrum& spec, double K) {
  KSplit s;
  s.lhs = trace_log_abs(spec);
  s.shifted = trace_log_abs_shifted(spec, K);
  s.integral = im_m_w_integral(spec, 0.0, K);
  return s;
}

/// The eta-integral split at eta_star: the small-eta part is controlled by the
/// smallest singular value.
struct EtaSplit {
  double eta_star = 0.0;
  double small_part = 0.0;  // int_0^eta_star
  double large_part = 0.0;  // int_eta_star^K
  double lambda1 = 0.0;
  std::size_t below = 0;    // #{k : |lambda_k| <= eta_star}
};

inline EtaSplit eta_split(const HermitianSpectrum& spec, double eta_star, double K) {
  EtaSplit s;
  s.eta_star = eta_star;
  s.small_part = im_m_w_integral(spec, 0.0, eta_star);
  s.large_part = im_m_w_integral(spec, eta_star, K);
  s.lambda1 = smallest_sv(spec);
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
    if (std::abs(spec.eigenvalues(k)) <= eta_star) ++s.below;
  return s;
}

// ---------------------------------------------------------------------------
// Block additive model

struct BlockAdditiveEnsemble {
  std::vector<std::complex<double>> sigma_diag;
  std::vector<std::complex<double>> xi_diag;
  Symmetry symmetry = Symmetry::unitary;
  std::uint64_t seed = 0;

  std::size_t N() const { return sigma_diag.size(); }

  void validate() const {
    if (sigma_diag.empty()) throw StructuralError("ensemble needs N >= 1");
    if (xi_diag.size() != sigma_diag.size()) throw StructuralError("Sigma and Xi differ in size");
    for (auto v : sigma_diag)
      if (!std::isfinite(std::abs(v))) throw StructuralError("Sigma entries must be finite");
    for (auto v : xi_diag)
      if (!std::isfinite(std::abs(v))) throw StructuralError("Xi entries must be finite");
  }
};

/// [[0, D], [D*, 0]].
inline CMatrix block_offdiag(const std::vector<std::complex<double>>& d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  CMatrix m = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, n + i) = d[static_cast<std::size_t>(i)];
    m(n + i, i) = std::conj(d[static_cast<std::size_t>(i)]);
  }
  return m;
}

struct BlockSample {
  CMatrix H;
  CMatrix H_dual;
  CMatrix A;
  CMatrix B;
  CMatrix U;
  CMatrix V;
};

/// Assembles H = A + W B W* and its dual B + W* A W for W = U ⊕ V.
inline BlockSample block_H_from_factors(const BlockAdditiveEnsemble& e, CMatrix U, CMatrix V) {
  const auto n = static_cast<Eigen::Index>(e.N());
  BlockSample s;
  s.A = block_offdiag(e.xi_diag);
  s.B = block_offdiag(e.sigma_diag);
  CMatrix W = CMatrix::Zero(2 * n, 2 * n);
  W.topLeftCorner(n, n) = U;
  W.bottomRightCorner(n, n) = V;
  s.H = s.A + W * s.B * W.adjoint();
  s.H_dual = s.B + W.adjoint() * s.A * W;
  // exact Hermitian symmetry for the eigensolver
  s.H = (s.H + s.H.adjoint()).eval() / 2.0;
  s.H_dual = (s.H_dual + s.H_dual.adjoint()).eval() / 2.0;
  s.U = std::move(U);
  s.V = std::move(V);
  return s;
}

/// Draws U then V, matching sample_X_with_factors.
inline BlockSample block_H(const BlockAdditiveEnsemble& e, Rng& rng) {
  e.validate();
  const auto n = static_cast<Eigen::Index>(e.N());
  CMatrix U = haar(e.symmetry, n, rng);
  CMatrix V = haar(e.symmetry, n, rng);
  return block_H_from_factors(e, std::move(U), std::move(V));
}

/// (1/2N) Tr (H - z)^-1 from a spectrum.
inline std::complex<double> trace_resolvent(const HermitianSpectrum& spec, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) acc += 1.0 / (spec.eigenvalues(k) - z);
  return acc / static_cast<double>(spec.eigenvalues.size());
}

struct ResolventObservables {
  std::complex<double> m_H;
  std::complex<double> tau1;
  std::complex<double> tau2;
  std::complex<double> omega_A_c;
  std::complex<double> omega_B_c;
  double Lambda_d = 0.0;
  double eigvec_sup = 0.0;  // sqrt(N) max ||u_k||_inf over the window; 0 if the window is empty
  std::size_t window_count = 0;
  double identity_residual = 0.0;  // |w_A^c + w_B^c - z + 1/m_H|
};

/// Observables of G = (H - z)^-1 assembled from a full eigensystem of H.
/// Lambda_d compares the 2x2 blocks (i, i+N) of G with the subordination
/// targets built from omega_B; eigvec_sup runs over eigenvalues in [lo, hi].
inline ResolventObservables resolvent_observables(const HermitianSpectrum& spec,
                                                  const std::vector<std::complex<double>>& xi_diag,
                                                  std::complex<double> z, std::complex<double> omega_B,
                                                  double window_lo, double window_hi) {
  if (!(z.imag() > 0.0)) throw DomainError("resolvent observables need Im z > 0");
  if (!spec.eigenvectors) throw StructuralError("resolvent observables need eigenvectors");
  const CMatrix& Q = *spec.eigenvectors;
  const Eigen::Index n2 = Q.rows();
  const Eigen::Index n = n2 / 2;
  if (static_cast<Eigen::Index>(xi_diag.size()) != n) throw StructuralError("Xi size does not match H");

  CVector g(n2);
  for (Eigen::Index k = 0; k < n2; ++k) g(k) = 1.0 / (spec.eigenvalues(k) - z);
  const CMatrix G = Q * g.asDiagonal() * Q.adjoint();

  ResolventObservables o;
  const std::complex<double> trG = G.trace() / static_cast<double>(n2);
  o.m_H = trG;
  o.tau1 = G.topLeftCorner(n, n).trace() / static_cast<double>(n);
  o.tau2 = G.bottomRightCorner(n, n).trace() / static_cast<double>(n);

  // tr(A G) with A = [[0, Xi], [Xi*, 0]]: sum_i xi_i G_{i^,i} + conj(xi_i) G_{i,i^}
  std::complex<double> trAG = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = xi_diag[static_cast<std::size_t>(i)];
    trAG += xi * G(n + i, i) + std::conj(xi) * G(i, n + i);
  }
  trAG /= static_cast<double>(n2);
  // tr(B~ G) = tr(H G) - tr(A G) = 1 + z tr G - tr(A G)
  const std::complex<double> trBG = 1.0 + z * trG - trAG;
  o.omega_A_c = z - trAG / trG;
  o.omega_B_c = z - trBG / trG;
  o.identity_residual = std::abs(o.omega_A_c + o.omega_B_c - z + 1.0 / o.m_H);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = xi_diag[static_cast<std::size_t>(i)];
    const std::complex<double> den = std::norm(xi) - omega_B * omega_B;
    const double d = std::max({std::abs(G(i, i) - omega_B / den), std::abs(G(n + i, n + i) - omega_B / den),
                               std::abs(G(i, n + i) - xi / den), std::abs(G(n + i, i) - std::conj(xi) / den)});
    o.Lambda_d = std::max(o.Lambda_d, d);
  }

  double sup = 0.0;
  for (Eigen::Index k = 0; k < n2; ++k) {
    const double l = spec.eigenvalues(k);
    if (l < window_lo || l > window_hi) continue;
    ++o.window_count;
    sup = std::max(sup, Q.col(k).cwiseAbs().maxCoeff());
  }
  o.eigvec_sup = std::sqrt(static_cast<double>(n)) * sup;
  return o;
}

inline ResolventObservables resolvent_observables(const CMatrix& H, const std::vector<std::complex<double>>& xi_diag,
                                                  std::complex<double> z, std::complex<double> omega_B,
                                                  double window_lo, double window_hi) {
  if (!(z.imag() > 0.0)) throw DomainError("resolvent observables need Im z > 0");
  return resolvent_observables(hermitian_eigensystem(H, true), xi_diag, z, omega_B, window_lo, window_hi);
}

}  // namespace ringlaw
