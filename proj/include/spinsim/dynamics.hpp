#pragma once

#include <spinsim/detail/parallel.hpp>
#include <spinsim/model.hpp>
#include <spinsim/qops.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinsim {

// Weighted ensemble of RF amplitude scale factors.
struct RfiDistribution {
  std::vector<std::pair<double, double>> samples;  // (scale, weight)

  void validate() const {
    if (samples.empty()) throw std::invalid_argument("RfiDistribution: empty");
    double sum = 0.0;
    for (auto [scale, weight] : samples) {
      if (weight < 0.0) throw std::invalid_argument("RfiDistribution: negative weight");
      if (scale < 0.8 || scale > 1.2)
        throw std::invalid_argument("RfiDistribution: scale outside [0.8, 1.2]");
      sum += weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("RfiDistribution: weights must sum to 1");
  }

  static RfiDistribution single() { return {{{1.0, 1.0}}}; }

  // 11 equally spaced scales across +-10% with truncated-Gaussian weights
  // (sigma = 0.05 about the nominal amplitude).
  static RfiDistribution default_distribution() {
    RfiDistribution d;
    const int n = 11;
    const double sigma = 0.05;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      double scale = 0.9 + 0.2 * k / (n - 1);
      double w = std::exp(-0.5 * std::pow((scale - 1.0) / sigma, 2));
      d.samples.emplace_back(scale, w);
      sum += w;
    }
    for (auto& [scale, weight] : d.samples) weight /= sum;
    return d;
  }
};

enum class Scheme { exact_unitary, fixed_step_rk4 };

struct EvolutionConfig {
  Scheme scheme = Scheme::exact_unitary;
  double step = 0.0;  // seconds; 0 lets evolve_open pick 1/(200 f_max)
  std::vector<double> sample_times;

  void validate() const {
    if (step < 0.0) throw std::invalid_argument("EvolutionConfig: negative step");
    if (sample_times.empty())
      throw std::invalid_argument("EvolutionConfig: no sample times");
    double prev = -0.0;
    for (double t : sample_times) {
      if (t < 0.0) throw std::invalid_argument("EvolutionConfig: negative sample time");
      if (t < prev) throw std::invalid_argument("EvolutionConfig: sample times not sorted");
      prev = t;
    }
  }

  static std::vector<double> uniform_times(double duration, int count) {
    std::vector<double> t(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k)
      t[static_cast<size_t>(k)] = duration * k / (count - 1);
    return t;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<std::vector<double>> populations;  // [time][basis index]
  std::vector<std::vector<double>> discord;      // [partition][time]
  std::vector<std::string> discord_labels;
};

namespace detail {

inline void fill_populations(Trajectory& tr) {
  tr.populations.resize(tr.states.size());
  for (size_t k = 0; k < tr.states.size(); ++k)
    tr.populations[k] = populations_of(tr.states[k]);
}

}  // namespace detail

// rho(t) = U rho0 U^dag with U from one eigendecomposition of h.
inline Trajectory evolve_closed(const Matrix& h, const Matrix& rho0,
                                const EvolutionConfig& cfg) {
  cfg.validate();
  if (!is_hermitian(h)) throw std::invalid_argument("evolve_closed: h not Hermitian");
  require_valid_state(rho0, "evolve_closed");

  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Matrix v = es.eigenvectors();
  const Matrix rho_eig = v.adjoint() * rho0 * v;

  Trajectory tr;
  tr.times = cfg.sample_times;
  tr.states.resize(tr.times.size());
  spinsim::detail::parallel_for(static_cast<int>(tr.times.size()), [&](int k) {
    const double t = tr.times[static_cast<size_t>(k)];
    Vector phase(lam.size());
    for (Eigen::Index m = 0; m < lam.size(); ++m)
      phase(m) = std::exp(Complex(0.0, -lam(m) * t));
    tr.states[static_cast<size_t>(k)] =
        v * (phase.asDiagonal() * rho_eig * phase.asDiagonal().toDenseMatrix().conjugate()) *
        v.adjoint();
  });
  detail::fill_populations(tr);
  return tr;
}

// Lindblad generator with amplitude damping toward |g> (rate 1/T1) and pure
// dephasing (rate 1/T2 - 1/(2 T1)); jump rates folded into the operators.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const SpinSystem& s) {
    s.validate();
    if (!s.open_system()) return;
    const int n = s.n_qubits;
    Matrix lower(2, 2);
    lower << 0.0, 1.0, 0.0, 0.0;  // |g><e|
    for (int i = 1; i <= n; ++i) {
      const double t1 = s.t1[static_cast<size_t>(i - 1)];
      const double t2 = s.t2[static_cast<size_t>(i - 1)];
      const double g1 = 1.0 / t1;
      const double gphi = 1.0 / t2 - 0.5 / t1;
      if (g1 > 0.0) add_channel(std::sqrt(g1) * embed_single(n, i, lower));
      if (gphi > 0.0)
        add_channel(std::sqrt(0.5 * gphi) * 2.0 * spin_op(n, i, Axis::z));
    }
  }

  Matrix rhs(const Matrix& h, const Matrix& rho) const {
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (size_t c = 0; c < jump_.size(); ++c)
      out += jump_[c] * rho * jump_[c].adjoint() -
             0.5 * (jump_sq_[c] * rho + rho * jump_sq_[c]);
    return out;
  }

  size_t channel_count() const { return jump_.size(); }

 private:
  void add_channel(Matrix l) {
    jump_sq_.push_back(l.adjoint() * l);
    jump_.push_back(std::move(l));
  }

  std::vector<Matrix> jump_;
  std::vector<Matrix> jump_sq_;  // L^dag L
};

// drho/dt for the stated model; requires relaxation times on the system.
inline Matrix lindblad_rhs(const Matrix& rho, const Matrix& h, const SpinSystem& s) {
  if (!s.open_system())
    throw std::invalid_argument("lindblad_rhs: system has no T1/T2");
  return LindbladGenerator(s).rhs(h, rho);
}

inline double default_step(const SpinSystem& s, const DriveConfig& d) {
  double f_max = 0.0;
  for (double a : d.amplitudes) f_max = std::max(f_max, std::abs(a));
  for (double nu : s.offsets) f_max = std::max(f_max, std::abs(nu));
  f_max = std::max(f_max, s.couplings.cwiseAbs().maxCoeff());
  if (f_max <= 0.0) f_max = 1.0;
  return 1.0 / (200.0 * f_max);
}

namespace detail {

inline Matrix rk4_step(const LindbladGenerator& gen, const Matrix& h, const Matrix& rho,
                       double dt) {
  Matrix k1 = gen.rhs(h, rho);
  Matrix k2 = gen.rhs(h, rho + 0.5 * dt * k1);
  Matrix k3 = gen.rhs(h, rho + 0.5 * dt * k2);
  Matrix k4 = gen.rhs(h, rho + dt * k3);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// RK4 truncation noise can push exact-zero eigenvalues of rank-deficient
// states slightly negative; project recorded samples back onto the physical
// set (the integration itself always continues from the raw state).
inline Matrix positivity_floor(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  if (es.eigenvalues().minCoeff() >= 0.0) return rho;
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Matrix out = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return out / out.trace().real();
}

}  // namespace detail

// Fixed-step RK4 integration of the Lindblad equation (closed system when the
// SpinSystem carries no relaxation times).
inline Trajectory evolve_open(const SpinSystem& s, const DriveConfig& d, const Matrix& rho0,
                              const EvolutionConfig& cfg) {
  cfg.validate();
  if (cfg.scheme != Scheme::fixed_step_rk4)
    throw std::invalid_argument("evolve_open: scheme must be fixed-step-rk4");
  require_valid_state(rho0, "evolve_open");

  const Matrix h = build_nmr_hamiltonian(s, d);
  const double step = cfg.step > 0.0 ? cfg.step : default_step(s, d);
  const double hnorm = spectral_norm_hermitian(h);
  if (hnorm * step > 0.1 + 1e-12)
    throw std::invalid_argument("evolve_open: step too large (||h||*step > 0.1)");

  const LindbladGenerator gen(s);

  Trajectory tr;
  tr.times = cfg.sample_times;
  tr.states.reserve(tr.times.size());

  Matrix rho = rho0;
  double t = 0.0;
  for (double target : tr.times) {
    double remaining = target - t;
    while (remaining > step * (1.0 + 1e-12)) {
      rho = detail::rk4_step(gen, h, rho, step);
      remaining -= step;
    }
    if (remaining > 1e-18) rho = detail::rk4_step(gen, h, rho, remaining);
    t = target;
    tr.states.push_back(detail::positivity_floor(rho));
  }
  detail::fill_populations(tr);
  return tr;
}

// rho_avg(t) = sum_k w_k rho(t; drive scaled by s_k). `evolve` maps a
// DriveConfig to a Trajectory; members run in parallel, the reduction is
// index-ordered so results do not depend on scheduling.
template <class EvolveFn>
Trajectory ensemble_average(const RfiDistribution& rfi, const DriveConfig& base_drive,
                            EvolveFn&& evolve) {
  rfi.validate();
  const int m = static_cast<int>(rfi.samples.size());
  std::vector<Trajectory> members(static_cast<size_t>(m));
  detail::parallel_for(m, [&](int k) {
    members[static_cast<size_t>(k)] =
        evolve(base_drive.scaled(rfi.samples[static_cast<size_t>(k)].first));
  });

  Trajectory avg;
  avg.times = members[0].times;
  for (const auto& tr : members)
    if (tr.times != avg.times)
      throw std::runtime_error("ensemble_average: member sample times differ");

  const size_t nt = avg.times.size();
  avg.states.resize(nt);
  for (size_t t = 0; t < nt; ++t) {
    Matrix acc = Matrix::Zero(members[0].states[t].rows(), members[0].states[t].cols());
    for (int k = 0; k < m; ++k)
      acc += rfi.samples[static_cast<size_t>(k)].second * members[static_cast<size_t>(k)].states[t];
    avg.states[t] = std::move(acc);
  }
  detail::fill_populations(avg);
  return avg;
}

// Pulsed-field-gradient crusher: erase computational-basis coherences.
inline Matrix dephase_pfg(const Matrix& rho) {
  require_valid_state(rho, "dephase_pfg");
  return Matrix(rho.diagonal().asDiagonal());
}

namespace detail {

// Sum of squared residuals of the least-squares fit a*cos + b*sin + c at
// fixed frequency f (times measured from t0).
inline double cosine_fit_residual(const std::vector<double>& t, const std::vector<double>& y,
                                  double t0, double f) {
  const double w = kTwoPi * f;
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  for (size_t j = 0; j < t.size(); ++j) {
    const double c = std::cos(w * (t[j] - t0));
    const double s = std::sin(w * (t[j] - t0));
    Eigen::Vector3d row(c, s, 1.0);
    m += row * row.transpose();
    r += row * y[j];
  }
  Eigen::Vector3d beta = m.ldlt().solve(r);
  double sse = 0.0;
  for (size_t j = 0; j < t.size(); ++j) {
    const double c = std::cos(w * (t[j] - t0));
    const double s = std::sin(w * (t[j] - t0));
    const double e = y[j] - beta(0) * c - beta(1) * s - beta(2);
    sse += e * e;
  }
  return sse;
}

}  // namespace detail

// Frequency of the dominant oscillation: DFT peak for the initial guess,
// then a golden-section least-squares refinement between the neighbor bins.
inline double dominant_frequency(const std::vector<double>& times,
                                 const std::vector<double>& signal) {
  const size_t n = times.size();
  if (n != signal.size())
    throw std::invalid_argument("dominant_frequency: size mismatch");
  if (n < 16) throw std::invalid_argument("dominant_frequency: too few samples");
  const double t0 = times.front();
  const double span = times.back() - t0;
  if (span <= 0.0) throw std::invalid_argument("dominant_frequency: zero time span");

  const auto [mn, mx] = std::minmax_element(signal.begin(), signal.end());
  if (0.5 * (*mx - *mn) <= 1e-3)
    throw std::invalid_argument("dominant_frequency: signal is flat");

  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(n);

  const int kmax = static_cast<int>(n) / 2;
  int k_peak = 1;
  double p_peak = -1.0;
  for (int k = 1; k <= kmax; ++k) {
    Complex acc = 0.0;
    const double w = kTwoPi * k / span;
    for (size_t j = 0; j < n; ++j)
      acc += (signal[j] - mean) * std::exp(Complex(0.0, -w * (times[j] - t0)));
    const double p = std::norm(acc);
    if (p > p_peak) {
      p_peak = p;
      k_peak = k;
    }
  }

  double lo = std::max(0.25, static_cast<double>(k_peak) - 1.0) / span;
  double hi = (static_cast<double>(k_peak) + 1.0) / span;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = detail::cosine_fit_residual(times, signal, t0, x1);
  double f2 = detail::cosine_fit_residual(times, signal, t0, x2);
  for (int it = 0; it < 120 && (b - a) > 1e-13 * hi; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = detail::cosine_fit_residual(times, signal, t0, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = detail::cosine_fit_residual(times, signal, t0, x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace spinsim
