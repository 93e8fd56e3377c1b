#pragma once

#include <spinsim/model.hpp>
#include <spinsim/qops.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace spinsim {

// Index of a basis label such as "ge" or "010" (g/0 = ground, site 1 is the
// leftmost character).
inline int basis_index(const std::string& label) {
  if (label.empty()) throw std::invalid_argument("basis_index: empty label");
  int idx = 0;
  for (char c : label) {
    int bit;
    if (c == 'g' || c == '0')
      bit = 0;
    else if (c == 'e' || c == '1')
      bit = 1;
    else
      throw std::invalid_argument("basis_index: bad character in label");
    idx = (idx << 1) | bit;
  }
  return idx;
}

inline std::string basis_label(int index, int n_qubits) {
  if (n_qubits < 1 || index < 0 || index >= (1 << n_qubits))
    throw std::invalid_argument("basis_label: index out of range");
  std::string s(static_cast<size_t>(n_qubits), 'g');
  for (int i = 0; i < n_qubits; ++i)
    if ((index >> (n_qubits - 1 - i)) & 1) s[static_cast<size_t>(i)] = 'e';
  return s;
}

inline Vector basis_state(int n_qubits, int index) {
  if (index < 0 || index >= (1 << n_qubits))
    throw std::invalid_argument("basis_state: index out of range");
  Vector v = Vector::Zero(1 << n_qubits);
  v(index) = 1.0;
  return v;
}

inline Vector ground_state(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("ground_state: n_qubits < 1");
  return basis_state(n_qubits, 0);
}

// (|eg> + |ge>)/sqrt2 and (|eg> - |ge>)/sqrt2.
inline std::pair<Vector, Vector> plus_minus_states() {
  Vector plus = Vector::Zero(4), minus = Vector::Zero(4);
  const double r = 1.0 / std::sqrt(2.0);
  plus(basis_index("eg")) = r;
  plus(basis_index("ge")) = r;
  minus(basis_index("eg")) = r;
  minus(basis_index("ge")) = -r;
  return {std::move(plus), std::move(minus)};
}

// Gram-Schmidt W basis of the three-qubit single-excitation subspace:
//   W1 = (|001> + |010> + |100>)/sqrt3
//   W2 = (2|001> - |010> - |100>)/sqrt6
//   W3 = (|010> - |100>)/sqrt2
inline std::array<Vector, 3> w_basis(int n_qubits = 3) {
  if (n_qubits != 3) throw std::invalid_argument("w_basis: only n_qubits = 3 supported");
  const int i001 = basis_index("001");
  const int i010 = basis_index("010");
  const int i100 = basis_index("100");
  Vector w1 = Vector::Zero(8), w2 = Vector::Zero(8), w3 = Vector::Zero(8);
  w1(i001) = w1(i010) = w1(i100) = 1.0 / std::sqrt(3.0);
  w2(i001) = 2.0 / std::sqrt(6.0);
  w2(i010) = w2(i100) = -1.0 / std::sqrt(6.0);
  w3(i010) = 1.0 / std::sqrt(2.0);
  w3(i100) = -1.0 / std::sqrt(2.0);
  return {std::move(w1), std::move(w2), std::move(w3)};
}

inline Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

// rho = (1 - eps) I/2^n + eps |psi><psi|
inline Matrix pseudopure(const Vector& psi, double eps) {
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("pseudopure: eps must lie in [0, 1]");
  if (std::abs(psi.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("pseudopure: state vector is not normalized");
  const double dim = static_cast<double>(psi.size());
  return (1.0 - eps) / dim * identity(static_cast<int>(psi.size())) + eps * projector(psi);
}

// rho_th = I/2^n + sum_i eps_i I_z^i (deviation form of the thermal state).
inline Matrix thermal_state(const SpinSystem& s) {
  s.validate();
  if (s.purity.empty())
    throw std::invalid_argument("thermal_state: system has no purity factors");
  const int n = s.n_qubits;
  Matrix rho = identity(1 << n) / static_cast<double>(1 << n);
  for (int i = 1; i <= n; ++i)
    rho += s.purity[static_cast<size_t>(i - 1)] * spin_op(n, i, Axis::z);
  double min_diag = rho.diagonal().real().minCoeff();
  if (min_diag < 0.0)
    throw std::invalid_argument("thermal_state: purity factors violate positivity");
  return rho;
}

inline SpinSystem with_uniform_purity(SpinSystem s, double eps) {
  s.purity.assign(static_cast<size_t>(s.n_qubits), eps);
  return s;
}

}  // namespace spinsim
