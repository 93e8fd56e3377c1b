#pragma once

#include <spinsim/qops.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinsim {

constexpr double kTwoPi = 2.0 * M_PI;

// Driven Rydberg register. Frequencies in rad/s; r_ij in any consistent
// length unit (c6 carries the matching power).
struct RydbergParams {
  int n_atoms = 0;
  std::vector<double> rabi;      // Omega_i, rad/s
  std::vector<double> detuning;  // Delta_i, rad/s
  double c6 = 0.0;               // rad/s * length^6
  Eigen::MatrixXd separations;   // r_ij, symmetric, used for i != j

  void validate() const {
    if (n_atoms < 1) throw std::invalid_argument("RydbergParams: n_atoms < 1");
    if (static_cast<int>(rabi.size()) != n_atoms ||
        static_cast<int>(detuning.size()) != n_atoms)
      throw std::invalid_argument("RydbergParams: per-atom array length mismatch");
    if (n_atoms > 1) {
      if (separations.rows() != n_atoms || separations.cols() != n_atoms)
        throw std::invalid_argument("RydbergParams: separations must be n x n");
      for (int i = 0; i < n_atoms; ++i)
        for (int j = i + 1; j < n_atoms; ++j) {
          if (separations(i, j) <= 0.0)
            throw std::invalid_argument("RydbergParams: r_ij must be positive");
          if (separations(i, j) != separations(j, i))
            throw std::invalid_argument("RydbergParams: separations not symmetric");
        }
    }
  }
};

// Rotating-frame spin register. User-facing frequencies in Hz, times in
// seconds; the 2*pi conversion happens only inside the Hamiltonian builders.
struct SpinSystem {
  int n_qubits = 0;
  std::vector<double> offsets;  // nu_i, Hz
  Eigen::MatrixXd couplings;    // J_ij, Hz, symmetric, zero diagonal
  std::vector<double> t1;       // seconds; empty => closed system
  std::vector<double> t2;       // seconds; empty => closed system
  std::vector<double> purity;   // eps_i for thermal/PPS modes; may be empty

  bool open_system() const { return !t1.empty() || !t2.empty(); }

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("SpinSystem: n_qubits < 1");
    if (static_cast<int>(offsets.size()) != n_qubits)
      throw std::invalid_argument("SpinSystem: offsets length mismatch");
    if (couplings.rows() != n_qubits || couplings.cols() != n_qubits)
      throw std::invalid_argument("SpinSystem: couplings must be n x n");
    for (int i = 0; i < n_qubits; ++i) {
      if (couplings(i, i) != 0.0)
        throw std::invalid_argument("SpinSystem: J_ii must be zero");
      for (int j = 0; j < n_qubits; ++j)
        if (couplings(i, j) != couplings(j, i))
          throw std::invalid_argument("SpinSystem: couplings not symmetric");
    }
    if (!t1.empty() || !t2.empty()) {
      if (static_cast<int>(t1.size()) != n_qubits ||
          static_cast<int>(t2.size()) != n_qubits)
        throw std::invalid_argument("SpinSystem: t1/t2 must both be per-qubit");
      for (int i = 0; i < n_qubits; ++i) {
        if (t1[i] <= 0.0 || t2[i] <= 0.0)
          throw std::invalid_argument("SpinSystem: relaxation times must be positive");
        if (t2[i] > 2.0 * t1[i])
          throw std::invalid_argument("SpinSystem: T2 > 2*T1 is unphysical");
      }
    }
    if (!purity.empty() && static_cast<int>(purity.size()) != n_qubits)
      throw std::invalid_argument("SpinSystem: purity length mismatch");
  }
};

// Per-qubit RF drive; phase 0 is the x axis.
struct DriveConfig {
  std::vector<double> amplitudes;  // nu_i^RF, Hz, non-negative
  std::vector<double> phases;      // radians; empty => all zero

  void validate(int n_qubits) const {
    if (static_cast<int>(amplitudes.size()) != n_qubits)
      throw std::invalid_argument("DriveConfig: amplitudes length mismatch");
    for (double a : amplitudes)
      if (a < 0.0) throw std::invalid_argument("DriveConfig: negative amplitude");
    if (!phases.empty() && static_cast<int>(phases.size()) != n_qubits)
      throw std::invalid_argument("DriveConfig: phases length mismatch");
  }

  double phase(int i) const { return phases.empty() ? 0.0 : phases[static_cast<size_t>(i)]; }

  DriveConfig scaled(double factor) const {
    DriveConfig out = *this;
    for (double& a : out.amplitudes) a *= factor;
    return out;
  }
};

inline double vdw_interaction(double c6, double r) {
  if (r <= 0.0) throw std::invalid_argument("vdw_interaction: r must be positive");
  return c6 / std::pow(r, 6);
}

namespace detail {

// sigma_ee = |e><e| embedded at `site`.
inline Matrix excited_projector(int n, int site) {
  Matrix p(2, 2);
  p << 0.0, 0.0, 0.0, 1.0;
  return embed_single(n, site, p);
}

}  // namespace detail

// H = sum_i Omega_i sigma_x^i + sum_{i<j} V_ij sigma_ee^i sigma_ee^j
//     - sum_i Delta_i sigma_ee^i          (rad/s)
inline Matrix build_rydberg_hamiltonian(const RydbergParams& p) {
  p.validate();
  const int n = p.n_atoms;
  const int dim = 1 << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i <= n; ++i) {
    h += p.rabi[static_cast<size_t>(i - 1)] * 2.0 * spin_op(n, i, Axis::x);
    h -= p.detuning[static_cast<size_t>(i - 1)] * detail::excited_projector(n, i);
  }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      double v = vdw_interaction(p.c6, p.separations(i - 1, j - 1));
      h += v * detail::excited_projector(n, i) * detail::excited_projector(n, j);
    }
  return h;
}

// Map Eq.-1/2 parameters onto the rotating-frame spin form:
//   nu_i^RF = Omega_i / pi,  nu_i = Vbar_i / (2 pi),  J_ij = V_ij / (2 pi)
// with Vbar_i = sum_j V_ij / 2. Valid only at zero detuning.
inline std::pair<SpinSystem, DriveConfig> rydberg_to_spin(const RydbergParams& p) {
  p.validate();
  for (double d : p.detuning)
    if (d != 0.0)
      throw std::invalid_argument("rydberg_to_spin: requires zero detuning");
  const int n = p.n_atoms;
  SpinSystem s;
  s.n_qubits = n;
  s.offsets.assign(static_cast<size_t>(n), 0.0);
  s.couplings = Eigen::MatrixXd::Zero(n, n);
  DriveConfig d;
  d.amplitudes.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    d.amplitudes[static_cast<size_t>(i)] = p.rabi[static_cast<size_t>(i)] / M_PI;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = vdw_interaction(p.c6, p.separations(i, j));
      s.couplings(i, j) = v / kTwoPi;
      s.offsets[static_cast<size_t>(i)] += v / (2.0 * kTwoPi);
    }
  return {std::move(s), std::move(d)};
}

// Uniform spectral offset between the Rydberg and spin forms:
// eig(H_rydberg) = eig(H_nmr) + sum_{i<j} V_ij / 4.
inline double identity_shift(const RydbergParams& p) {
  p.validate();
  double shift = 0.0;
  for (int i = 0; i < p.n_atoms; ++i)
    for (int j = i + 1; j < p.n_atoms; ++j)
      shift += vdw_interaction(p.c6, p.separations(i, j)) / 4.0;
  return shift;
}

// H = 2 pi sum_i nu_i^RF (cos phi_i I_x^i + sin phi_i I_y^i)
//   - 2 pi sum_i nu_i I_z^i + 2 pi sum_{i<j} J_ij I_z^i I_z^j    (rad/s)
inline Matrix build_nmr_hamiltonian(const SpinSystem& s, const DriveConfig& d) {
  s.validate();
  d.validate(s.n_qubits);
  const int n = s.n_qubits;
  const int dim = 1 << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i <= n; ++i) {
    double amp = d.amplitudes[static_cast<size_t>(i - 1)];
    if (amp != 0.0) {
      double ph = d.phase(i - 1);
      h += kTwoPi * amp *
           (std::cos(ph) * spin_op(n, i, Axis::x) + std::sin(ph) * spin_op(n, i, Axis::y));
    }
    h -= kTwoPi * s.offsets[static_cast<size_t>(i - 1)] * spin_op(n, i, Axis::z);
  }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (s.couplings(i - 1, j - 1) != 0.0)
        h += kTwoPi * s.couplings(i - 1, j - 1) * spin_op(n, i, Axis::z) * spin_op(n, j, Axis::z);
  return h;
}

// Drive-free variant (delays, offset resonance checks).
inline Matrix build_free_hamiltonian(const SpinSystem& s) {
  DriveConfig d;
  d.amplitudes.assign(static_cast<size_t>(s.n_qubits), 0.0);
  return build_nmr_hamiltonian(s, d);
}

}  // namespace spinsim
