#pragma once

#include <spinsim/dynamics.hpp>
#include <spinsim/model.hpp>
#include <spinsim/qops.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinsim {

// One step of a pulse program: an instantaneous rotation (hard pulse), a free
// evolution delay, or a pulsed-field-gradient crusher.
struct PulseElement {
  enum class Kind { rotation, delay, gradient };

  Kind kind = Kind::gradient;
  std::vector<int> sites;  // rotation targets, 1-based
  double angle = 0.0;      // rotation angle, rad
  double phase = 0.0;      // rotation phase, rad: 0 = x, pi/2 = y
  double duration = 0.0;   // delay length, s

  static PulseElement rotation(std::vector<int> targets, double angle, double phase) {
    PulseElement e;
    e.kind = Kind::rotation;
    e.sites = std::move(targets);
    e.angle = angle;
    e.phase = phase;
    return e;
  }
  static PulseElement delay(double duration) {
    PulseElement e;
    e.kind = Kind::delay;
    e.duration = duration;
    return e;
  }
  static PulseElement gradient() { return PulseElement{}; }

  void validate(int n_qubits) const {
    switch (kind) {
      case Kind::rotation:
        if (sites.empty())
          throw std::invalid_argument("PulseElement: rotation needs at least one site");
        for (int s : sites)
          if (s < 1 || s > n_qubits)
            throw std::invalid_argument("PulseElement: rotation site out of range");
        if (!std::isfinite(angle) || !std::isfinite(phase))
          throw std::invalid_argument("PulseElement: rotation angle/phase not finite");
        break;
      case Kind::delay:
        if (!(duration >= 0.0))
          throw std::invalid_argument("PulseElement: delay duration must be >= 0");
        break;
      case Kind::gradient:
        break;
    }
  }
};

struct PulseSequence {
  std::vector<PulseElement> elements;
  SpinSystem system;
};

inline Matrix apply_element(const PulseElement& e, const Matrix& rho, const SpinSystem& s) {
  require_valid_state(rho, "apply_element");
  e.validate(s.n_qubits);
  switch (e.kind) {
    case PulseElement::Kind::rotation: {
      Matrix gen = Matrix::Zero(rho.rows(), rho.cols());
      for (int site : e.sites)
        gen += std::cos(e.phase) * spin_op(s.n_qubits, site, Axis::x) +
               std::sin(e.phase) * spin_op(s.n_qubits, site, Axis::y);
      Matrix u = expm_hermitian(gen, e.angle);
      return u * rho * u.adjoint();
    }
    case PulseElement::Kind::delay: {
      Matrix u = expm_hermitian(build_free_hamiltonian(s), e.duration);
      return u * rho * u.adjoint();
    }
    case PulseElement::Kind::gradient:
      return dephase_pfg(rho);
  }
  throw std::logic_error("apply_element: unreachable");
}

inline Matrix run_sequence(const PulseSequence& seq, const Matrix& rho0) {
  Matrix rho = rho0;
  for (const PulseElement& e : seq.elements) rho = apply_element(e, rho, seq.system);
  require_valid_state(rho, "run_sequence");
  return rho;
}

enum class RegisterKind { two_qubit, three_qubit };

// Coupling-delay durations of the PPS preparation sequences. Site order is
// F,P for the two-spin register and F,H,C for the three-spin one, so the
// heteronuclear couplings are J_FP = J_12, J_HF = J_12, J_FC = J_13,
// J_HC = J_23.
inline std::map<std::string, double> delay_durations(const SpinSystem& s, RegisterKind reg) {
  auto coupling = [&](int i, int j, const char* name) {
    const double v = s.couplings(i - 1, j - 1);
    if (v == 0.0)
      throw std::invalid_argument(std::string("delay_durations: coupling ") + name + " is zero");
    return v;
  };
  std::map<std::string, double> out;
  if (reg == RegisterKind::two_qubit) {
    if (s.n_qubits != 2)
      throw std::invalid_argument("delay_durations: two_qubit register needs n_qubits == 2");
    out["tau_fp"] = 1.0 / (2.0 * coupling(1, 2, "J_FP"));
  } else {
    if (s.n_qubits != 3)
      throw std::invalid_argument("delay_durations: three_qubit register needs n_qubits == 3");
    const double j_hf = coupling(1, 2, "J_HF");
    const double j_fc = coupling(1, 3, "J_FC");
    const double j_hc = coupling(2, 3, "J_HC");
    out["tau_hc"] = 1.0 / (2.0 * j_hc);
    out["tau_fc"] = 4.0 * (1.0 / j_fc - 1.0 / (8.0 * j_hc));
    out["tau_hf"] = 1.0 / (2.0 * j_hf);
  }
  return out;
}

namespace detail {

// tau/2 - pi_x(i,j) - tau/2 - pi_x(i,j): pure exp(-i 2 pi J tau Iz_i Iz_j)
// regardless of offsets or spectator couplings.
inline void append_echoed_delay(std::vector<PulseElement>& out, int i, int j, double j_hz) {
  const double tau = 1.0 / (2.0 * std::abs(j_hz));
  out.push_back(PulseElement::delay(0.5 * tau));
  out.push_back(PulseElement::rotation({i, j}, M_PI, 0.0));
  out.push_back(PulseElement::delay(0.5 * tau));
  out.push_back(PulseElement::rotation({i, j}, M_PI, 0.0));
}

// Spatial-averaging gadget: x-rotation on i, echoed J_ij delay, closing
// rotation about -y (+y when the coupling is negative), gradient crusher.
inline void append_transfer(std::vector<PulseElement>& out, const SpinSystem& s, int i, int j,
                            double open_angle, double close_angle) {
  const double j_hz = s.couplings(i - 1, j - 1);
  if (j_hz == 0.0)
    throw std::invalid_argument("pps sequence: required coupling is zero");
  out.push_back(PulseElement::rotation({i}, open_angle, 0.0));
  append_echoed_delay(out, i, j, j_hz);
  out.push_back(PulseElement::rotation({i}, close_angle, j_hz > 0.0 ? -M_PI / 2 : M_PI / 2));
  out.push_back(PulseElement::gradient());
}

}  // namespace detail

// Spatial-averaging preparation of the |gg> pseudopure state from thermal
// equilibrium. With equal site polarizations eps the output is
// pseudopure(|gg>, eps) exactly.
inline PulseSequence pps_sequence_2q(const SpinSystem& s) {
  if (s.n_qubits != 2)
    throw std::invalid_argument("pps_sequence_2q: needs a two-qubit system");
  PulseSequence seq;
  seq.system = s;
  seq.elements.push_back(PulseElement::rotation({2}, M_PI / 3, 0.0));
  seq.elements.push_back(PulseElement::gradient());
  detail::append_transfer(seq.elements, s, 1, 2, M_PI / 4, M_PI / 4);
  return seq;
}

// Three-spin spatial-averaging preparation of |ggg>. With equal site
// polarizations eps the output is pseudopure(|ggg>, 4eps/3) exactly.
inline PulseSequence pps_sequence_3q(const SpinSystem& s) {
  if (s.n_qubits != 3)
    throw std::invalid_argument("pps_sequence_3q: needs a three-qubit system");
  const double a1 = std::acos(1.0 / std::sqrt(3.0));
  const double a2 = std::acos(std::sqrt(2.0 / 5.0));
  const double a3_open = 0.5 * (M_PI / 2 + std::acos(2.0 / 3.0));
  const double a3_close = 0.5 * (M_PI / 2 - std::acos(2.0 / 3.0));
  PulseSequence seq;
  seq.system = s;
  detail::append_transfer(seq.elements, s, 1, 2, a1, a1);
  detail::append_transfer(seq.elements, s, 2, 3, a2, a2);
  detail::append_transfer(seq.elements, s, 3, 1, a3_open, a3_close);
  detail::append_transfer(seq.elements, s, 2, 1, M_PI / 4, M_PI / 4);
  return seq;
}

namespace detail {

inline Matrix pauli_factor(char c) {
  switch (c) {
    case 'I': return identity(2);
    case 'X': return 2.0 * spin_half(Axis::x);
    case 'Y': return 2.0 * spin_half(Axis::y);
    case 'Z': return 2.0 * spin_half(Axis::z);
    default: throw std::invalid_argument("pauli_factor: label must be one of I, X, Y, Z");
  }
}

inline Matrix pauli_product(const std::string& label) {
  Matrix op = Matrix::Identity(1, 1);
  for (char c : label) op = kron(op, pauli_factor(c));
  return op;
}

}  // namespace detail

// Idealized tomography: expectation values of all 4^N products of
// {I, 2Ix, 2Iy, 2Iz}, keyed by label with site 1 first ("ZI" = 2Iz on
// site 1).
inline std::map<std::string, double> tomograph(const Matrix& rho) {
  require_valid_state(rho, "tomograph");
  const int n = detail::qubit_count_of(rho.rows());
  const char digits[4] = {'I', 'X', 'Y', 'Z'};
  std::map<std::string, double> record;
  const long total = 1L << (2 * n);
  for (long code = 0; code < total; ++code) {
    std::string label(static_cast<size_t>(n), 'I');
    long rem = code;
    for (int site = n - 1; site >= 0; --site) {
      label[static_cast<size_t>(site)] = digits[rem & 3];
      rem >>= 2;
    }
    record[label] = (rho * detail::pauli_product(label)).trace().real();
  }
  return record;
}

// rho = 2^{-N} sum <P> P. Throws on an incomplete record; clips and
// renormalizes if noise in the record pushed an eigenvalue below zero.
inline Matrix reconstruct(const std::map<std::string, double>& record) {
  if (record.empty()) throw std::invalid_argument("reconstruct: empty record");
  const size_t n = record.begin()->first.size();
  if (n == 0 || n > 24) throw std::invalid_argument("reconstruct: bad label length");
  if (record.size() != (1UL << (2 * n)))
    throw std::invalid_argument("reconstruct: incomplete record");
  const int dim = 1 << n;
  Matrix rho = Matrix::Zero(dim, dim);
  for (const auto& [label, value] : record) {
    if (label.size() != n)
      throw std::invalid_argument("reconstruct: inconsistent label length");
    rho += value * detail::pauli_product(label);
  }
  rho /= static_cast<double>(dim);
  return detail::positivity_floor(rho);
}

}  // namespace spinsim
