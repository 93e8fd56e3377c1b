#pragma once

#include <spinsim/qops.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinsim {

// Measured-vs-rest split of the register. `measured` is the subsystem the
// projective measurement acts on (a single qubit in this implementation).
struct Partition {
  std::vector<int> measured;
  std::vector<int> rest;

  void validate(int n_qubits) const {
    if (measured.empty()) throw std::invalid_argument("Partition: measured set empty");
    std::vector<bool> seen(static_cast<size_t>(n_qubits) + 1, false);
    auto mark = [&](const std::vector<int>& sites) {
      for (int s : sites) {
        if (s < 1 || s > n_qubits)
          throw std::invalid_argument("Partition: site out of range");
        if (seen[static_cast<size_t>(s)])
          throw std::invalid_argument("Partition: sets overlap or repeat a site");
        seen[static_cast<size_t>(s)] = true;
      }
    };
    mark(measured);
    mark(rest);
    for (int s = 1; s <= n_qubits; ++s)
      if (!seen[static_cast<size_t>(s)])
        throw std::invalid_argument("Partition: sets do not cover the register");
  }

  // e.g. measured {1}, rest {2,3} -> "1|23"
  std::string label() const {
    std::string out;
    std::vector<int> m = measured, r = rest;
    std::sort(m.begin(), m.end());
    std::sort(r.begin(), r.end());
    for (int s : m) out += std::to_string(s);
    out += '|';
    for (int s : r) out += std::to_string(s);
    return out;
  }

  static Partition single_measured(int site, int n_qubits) {
    Partition p;
    p.measured = {site};
    for (int s = 1; s <= n_qubits; ++s)
      if (s != site) p.rest.push_back(s);
    return p;
  }
};

// Bloch-sphere parametrization of the projector pair
//   |n0> = cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>,  |n1> orthogonal.
struct MeasurementBasis {
  double theta = 0.0;
  double phi = 0.0;
};

struct OptimizerSettings {
  int grid_theta = 24;
  int grid_phi = 48;
  double tol = 1e-9;   // termination spread in J
  int max_iter = 200;  // Nelder-Mead iterations
};

struct DiscordResult {
  double value = 0.0;                 // D(B|A), nats
  MeasurementBasis optimal_basis;
  double mutual_information = 0.0;    // I(A:B), nats
  double classical_correlation = 0.0; // max_basis J(A:B), nats
  bool converged = true;
};

namespace detail {

constexpr double kEntropyEigFloor = -1e-10;

inline double entropy_from_eigenvalues(const Eigen::VectorXd& lam) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    double v = lam(k);
    if (v < kEntropyEigFloor)
      throw std::invalid_argument("entropy: eigenvalue below validity floor");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace detail

// H(rho) = -Tr(rho log rho), natural-log units.
inline double von_neumann_entropy(const Matrix& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("von_neumann_entropy: non-square input");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("von_neumann_entropy: input not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8)
    throw std::invalid_argument("von_neumann_entropy: trace differs from one");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  return detail::entropy_from_eigenvalues(es.eigenvalues());
}

// I(A:B) = H(A) + H(B) - H(AB)
inline double mutual_information(const Matrix& rho, const Partition& p) {
  const int n = detail::qubit_count_of(rho.rows());
  p.validate(n);
  if (p.rest.empty())
    throw std::invalid_argument("mutual_information: rest set empty");
  double ha = von_neumann_entropy(partial_trace(rho, p.measured));
  double hb = von_neumann_entropy(partial_trace(rho, p.rest));
  double hab = von_neumann_entropy(rho);
  return ha + hb - hab;
}

namespace detail {

// Entropy contribution p * H(M/p) for an unnormalized PSD block M with
// trace p, written as sum(-mu log mu) + p log p over eigenvalues mu of M.
inline double weighted_branch_entropy(const Eigen::VectorXd& mu, double p) {
  if (p <= 1e-15) return 0.0;
  double h = 0.0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    double v = mu(k);
    if (v > 0.0) h -= v * std::log(v);
  }
  return h + p * std::log(p);
}

// J(A:B) for measurement of `site` in the (theta, phi) basis, given the
// precomputed H(B). Works directly on the unnormalized post-measurement
// blocks M_a = (<n_a| (x) I) rho (|n_a> (x) I).
inline double conditional_j(const Matrix& rho, int n, int site, double h_b, double theta,
                            double phi) {
  const int pos = n - site;  // bit position of the measured site
  const int dim_b = 1 << (n - 1);
  const Complex e = std::exp(Complex(0.0, phi));
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const std::array<std::array<Complex, 2>, 2> amp = {{{c, e * s}, {s, -e * c}}};

  auto full_index = [pos](int u, int b) {
    const int high = b >> pos;
    const int low = b & ((1 << pos) - 1);
    return (high << (pos + 1)) | (u << pos) | low;
  };

  double cond = 0.0;
  for (const auto& a : amp) {
    Matrix m(dim_b, dim_b);
    for (int r = 0; r < dim_b; ++r)
      for (int col = 0; col < dim_b; ++col) {
        Complex acc = 0.0;
        for (int u = 0; u < 2; ++u)
          for (int v = 0; v < 2; ++v)
            acc += std::conj(a[static_cast<size_t>(u)]) * a[static_cast<size_t>(v)] *
                   rho(full_index(u, r), full_index(v, col));
        m(r, col) = acc;
      }
    const double p = m.trace().real();
    if (p <= 1e-15) continue;
    if (dim_b == 2) {
      const double half_tr = 0.5 * (m(0, 0).real() + m(1, 1).real());
      const double rad =
          std::sqrt(std::pow(0.5 * (m(0, 0).real() - m(1, 1).real()), 2) + std::norm(m(0, 1)));
      Eigen::VectorXd mu(2);
      mu << std::max(half_tr - rad, 0.0), half_tr + rad;
      cond += weighted_branch_entropy(mu, p);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
      Eigen::VectorXd mu = es.eigenvalues().cwiseMax(0.0);
      cond += weighted_branch_entropy(mu, p);
    }
  }
  return h_b - cond;
}

}  // namespace detail

// J(A:B) = H(B) - sum_a p_a H(B | A = a) for one projective basis on the
// (single) measured qubit.
inline double conditional_mutual_information(const Matrix& rho, const Partition& p,
                                             const MeasurementBasis& m) {
  const int n = detail::qubit_count_of(rho.rows());
  p.validate(n);
  if (p.measured.size() != 1)
    throw std::invalid_argument(
        "conditional_mutual_information: measured subsystem must be one qubit");
  double h_b = von_neumann_entropy(partial_trace(rho, p.rest));
  return detail::conditional_j(rho, n, p.measured[0], h_b, m.theta, m.phi);
}

// D(B|A) = I(A:B) - max_basis J(A:B); coarse grid then Nelder-Mead.
inline DiscordResult discord(const Matrix& rho, const Partition& p,
                             const OptimizerSettings& opt = {}) {
  const int n = detail::qubit_count_of(rho.rows());
  p.validate(n);
  if (p.measured.size() != 1)
    throw std::invalid_argument("discord: measured subsystem must be one qubit");
  require_valid_state(rho, "discord");
  const int site = p.measured[0];

  const double h_b = von_neumann_entropy(partial_trace(rho, p.rest));
  const double mi = mutual_information(rho, p);

  auto j_of = [&](double theta, double phi) {
    return detail::conditional_j(rho, n, site, h_b, theta, phi);
  };

  double best_j = -1e300, best_theta = 0.0, best_phi = 0.0;
  for (int jt = 0; jt < opt.grid_theta; ++jt) {
    const double theta = M_PI * jt / (opt.grid_theta - 1);
    for (int kp = 0; kp < opt.grid_phi; ++kp) {
      const double phi = 2.0 * M_PI * kp / opt.grid_phi;
      const double j = j_of(theta, phi);
      if (j > best_j) {  // strict: ties keep the lowest grid index
        best_j = j;
        best_theta = theta;
        best_phi = phi;
      }
    }
  }

  // Nelder-Mead on f = -J, seeded half a grid cell around the best point.
  const double dt = 0.5 * M_PI / (opt.grid_theta - 1);
  const double dp = M_PI / opt.grid_phi;
  std::array<Eigen::Vector2d, 3> x = {Eigen::Vector2d(best_theta, best_phi),
                                      Eigen::Vector2d(best_theta + dt, best_phi),
                                      Eigen::Vector2d(best_theta, best_phi + dp)};
  std::array<double, 3> f;
  double refine_j = best_j, refine_theta = best_theta, refine_phi = best_phi;
  auto eval = [&](const Eigen::Vector2d& v) {
    const double j = j_of(v(0), v(1));
    if (j > refine_j) {
      refine_j = j;
      refine_theta = v(0);
      refine_phi = v(1);
    }
    return -j;
  };
  for (int k = 0; k < 3; ++k) f[static_cast<size_t>(k)] = eval(x[static_cast<size_t>(k)]);

  bool converged = false;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    std::array<int, 3> ord = {0, 1, 2};
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return f[static_cast<size_t>(a)] < f[static_cast<size_t>(b)]; });
    const int lo = ord[0], mid = ord[1], hi = ord[2];
    if (f[static_cast<size_t>(hi)] - f[static_cast<size_t>(lo)] < opt.tol) {
      converged = true;
      break;
    }
    const Eigen::Vector2d centroid =
        0.5 * (x[static_cast<size_t>(lo)] + x[static_cast<size_t>(mid)]);
    const Eigen::Vector2d xr = centroid + (centroid - x[static_cast<size_t>(hi)]);
    const double fr = eval(xr);
    if (fr < f[static_cast<size_t>(lo)]) {
      const Eigen::Vector2d xe = centroid + 2.0 * (centroid - x[static_cast<size_t>(hi)]);
      const double fe = eval(xe);
      x[static_cast<size_t>(hi)] = fe < fr ? xe : xr;
      f[static_cast<size_t>(hi)] = std::min(fe, fr);
    } else if (fr < f[static_cast<size_t>(mid)]) {
      x[static_cast<size_t>(hi)] = xr;
      f[static_cast<size_t>(hi)] = fr;
    } else {
      const Eigen::Vector2d toward =
          fr < f[static_cast<size_t>(hi)] ? xr : x[static_cast<size_t>(hi)];
      const double f_toward = std::min(fr, f[static_cast<size_t>(hi)]);
      const Eigen::Vector2d xc = centroid + 0.5 * (toward - centroid);
      const double fc = eval(xc);
      if (fc < f_toward) {
        x[static_cast<size_t>(hi)] = xc;
        f[static_cast<size_t>(hi)] = fc;
      } else {  // shrink toward the best vertex
        for (int k : {mid, hi}) {
          x[static_cast<size_t>(k)] =
              x[static_cast<size_t>(lo)] +
              0.5 * (x[static_cast<size_t>(k)] - x[static_cast<size_t>(lo)]);
          f[static_cast<size_t>(k)] = eval(x[static_cast<size_t>(k)]);
        }
      }
    }
  }

  DiscordResult result;
  result.mutual_information = mi;
  result.classical_correlation = refine_j;  // never below the grid best
  result.optimal_basis = {refine_theta, refine_phi};
  result.value = mi - refine_j;
  result.converged = converged;
  return result;
}

enum class DiscordUnits { ln2_per_eps2, ln2_per_2eps2 };

inline double discord_normalized(const Matrix& rho, const Partition& p, double eps,
                                 DiscordUnits units, const OptimizerSettings& opt = {}) {
  if (eps <= 0.0) throw std::invalid_argument("discord_normalized: eps must be positive");
  const double d = discord(rho, p, opt).value;
  const double denom = units == DiscordUnits::ln2_per_eps2 ? std::log(2.0) * eps * eps
                                                           : std::log(2.0) * 2.0 * eps * eps;
  return d / denom;
}

}  // namespace spinsim
