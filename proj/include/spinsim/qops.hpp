#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace spinsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Density-matrix validity tolerances (double precision, dim <= 64).
constexpr double kStateHermTol = 1e-12;  // entry-wise
constexpr double kTraceTol = 1e-10;
constexpr double kMinEigTol = -1e-10;

enum class Axis { x, y, z };

inline Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

// Single spin-1/2 operator; |g> (index 0) is the +1/2 eigenstate of I_z.
inline Matrix spin_half(Axis a) {
  Matrix m(2, 2);
  switch (a) {
    case Axis::x:
      m << 0.0, 0.5, 0.5, 0.0;
      break;
    case Axis::y:
      m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
      break;
    case Axis::z:
      m << 0.5, 0.0, 0.0, -0.5;
      break;
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("kron: inputs must be square");
  return Eigen::kroneckerProduct(a, b);
}

// Embed a 2x2 operator at `site` (1-based; site 1 is the leftmost factor).
inline Matrix embed_single(int n_qubits, int site, const Matrix& op) {
  if (n_qubits < 1) throw std::invalid_argument("embed_single: n_qubits < 1");
  if (site < 1 || site > n_qubits)
    throw std::invalid_argument("embed_single: site out of range");
  if (op.rows() != 2 || op.cols() != 2)
    throw std::invalid_argument("embed_single: operator must be 2x2");
  Matrix out = op;
  if (site > 1) out = kron(identity(1 << (site - 1)), out);
  if (site < n_qubits) out = kron(out, identity(1 << (n_qubits - site)));
  return out;
}

inline Matrix spin_op(int n_qubits, int site, Axis axis) {
  return embed_single(n_qubits, site, spin_half(axis));
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-10) {
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

// Largest |eigenvalue|; input must be Hermitian.
inline double spectral_norm_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// U = exp(-i h t) by eigendecomposition. h in rad/s, t in seconds.
inline Matrix expm_hermitian(const Matrix& h, double t) {
  if (!is_hermitian(h))
    throw std::invalid_argument("expm_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& lam = es.eigenvalues();
  Vector phase(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    phase(k) = std::exp(Complex(0.0, -lam(k) * t));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

namespace detail {

inline int qubit_count_of(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index(1) << n) < dim) ++n;
  if ((Eigen::Index(1) << n) != dim)
    throw std::invalid_argument("dimension is not a power of two");
  return n;
}

}  // namespace detail

// Reduced density matrix on `keep` (1-based sites, reported in ascending
// site order). Trace is preserved.
inline Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("partial_trace: non-square input");
  const int n = detail::qubit_count_of(rho.rows());
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");

  std::vector<int> ks = keep;
  std::sort(ks.begin(), ks.end());
  if (std::unique(ks.begin(), ks.end()) != ks.end())
    throw std::invalid_argument("partial_trace: duplicate site in keep set");
  for (int s : ks)
    if (s < 1 || s > n)
      throw std::invalid_argument("partial_trace: site out of range");

  std::vector<int> tr;
  for (int s = 1; s <= n; ++s)
    if (!std::binary_search(ks.begin(), ks.end(), s)) tr.push_back(s);

  const int nk = static_cast<int>(ks.size());
  const int nt = n - nk;
  const int dk = 1 << nk;
  const int dt = 1 << nt;

  // Bit position of site s in a full index (site 1 = most significant bit).
  auto pos = [n](int s) { return n - s; };
  auto full_index = [&](int rk, int tau) {
    int idx = 0;
    for (int a = 0; a < nk; ++a)
      idx |= ((rk >> (nk - 1 - a)) & 1) << pos(ks[a]);
    for (int b = 0; b < nt; ++b)
      idx |= ((tau >> (nt - 1 - b)) & 1) << pos(tr[b]);
    return idx;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (int tau = 0; tau < dt; ++tau)
        acc += rho(full_index(r, tau), full_index(c, tau));
      out(r, c) = acc;
    }
  return out;
}

struct StateReport {
  double hermiticity_defect = 0.0;  // max entry-wise |rho - rho^dag|
  double trace_defect = 0.0;        // |Tr(rho) - 1|
  double min_eigenvalue = 0.0;
  bool pass = false;
};

inline StateReport validate_state(const Matrix& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("validate_state: non-square input");
  StateReport rep;
  rep.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  rep.trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  Matrix sym = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.pass = rep.hermiticity_defect <= kStateHermTol &&
             rep.trace_defect <= kTraceTol && rep.min_eigenvalue >= kMinEigTol;
  return rep;
}

inline void require_valid_state(const Matrix& rho, const char* where) {
  StateReport rep = validate_state(rho);
  if (!rep.pass)
    throw std::invalid_argument(std::string(where) + ": invalid density matrix");
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

// (1/2)||a - b||_1 for Hermitian a, b.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  Matrix d = a - b;
  d = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline std::vector<double> populations_of(const Matrix& rho) {
  std::vector<double> p(static_cast<size_t>(rho.rows()));
  for (Eigen::Index k = 0; k < rho.rows(); ++k) p[static_cast<size_t>(k)] = rho(k, k).real();
  return p;
}

}  // namespace spinsim
