#include <spinsim/dynamics.hpp>
#include <spinsim/states.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace spinsim;

namespace {

SpinSystem blockade2q_system(double scale = 1.0) {
  SpinSystem s;
  s.n_qubits = 2;
  s.offsets = {434.0 * scale, 434.0 * scale};
  s.couplings = Eigen::MatrixXd::Zero(2, 2);
  s.couplings(0, 1) = s.couplings(1, 0) = 868.0 * scale;
  return s;
}

DriveConfig drive2q(double a1, double a2) {
  DriveConfig d;
  d.amplitudes = {a1, a2};
  return d;
}

EvolutionConfig sampled(double duration, int count, Scheme scheme = Scheme::exact_unitary,
                        double step = 0.0) {
  EvolutionConfig cfg;
  cfg.scheme = scheme;
  cfg.step = step;
  cfg.sample_times = EvolutionConfig::uniform_times(duration, count);
  return cfg;
}

}  // namespace

TEST_CASE("evolve_closed at t=0 returns the initial state", "[dynamics]") {
  auto gen = testsupport::rng(201);
  Matrix rho0 = testsupport::random_state(4, gen);
  Matrix h = testsupport::random_hermitian(4, gen);
  EvolutionConfig cfg;
  cfg.sample_times = {0.0};
  Trajectory tr = evolve_closed(h, rho0, cfg);
  REQUIRE((tr.states[0] - rho0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("evolve_closed reproduces single-spin Rabi oscillations", "[dynamics]") {
  Matrix h = kTwoPi * 217.0 * spin_half(Axis::x);
  Matrix rho0 = projector(ground_state(1));
  Trajectory tr = evolve_closed(h, rho0, sampled(0.02, 257));
  for (size_t k = 0; k < tr.times.size(); ++k) {
    double expect = std::pow(std::cos(M_PI * 217.0 * tr.times[k]), 2);
    REQUIRE(tr.populations[k][0] == Catch::Approx(expect).margin(1e-10));
  }
}

TEST_CASE("closed evolution conserves purity and trace", "[dynamics]") {
  auto gen = testsupport::rng(211);
  Matrix h = testsupport::random_hermitian(8, gen);
  Matrix rho0 = testsupport::random_state(8, gen);
  double p0 = purity(rho0);
  Trajectory tr = evolve_closed(h, rho0, sampled(1.0, 33));
  for (const auto& rho : tr.states) {
    REQUIRE(std::abs(purity(rho) - p0) < 1e-9);
    REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-9);
  }
  for (const auto& pops : tr.populations) {
    double sum = 0.0;
    for (double p : pops) {
      REQUIRE(p > -1e-9);
      REQUIRE(p < 1.0 + 1e-9);
      sum += p;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("blockade run suppresses |ee> and oscillates at sqrt2 * 217 Hz", "[dynamics]") {
  Matrix h = build_nmr_hamiltonian(blockade2q_system(), drive2q(217.0, 217.0));
  Matrix rho0 = projector(ground_state(2));
  Trajectory tr = evolve_closed(h, rho0, sampled(0.020, 801));

  double max_ee = 0.0;
  std::vector<double> pgg(tr.times.size());
  for (size_t k = 0; k < tr.times.size(); ++k) {
    max_ee = std::max(max_ee, tr.populations[k][3]);
    pgg[k] = tr.populations[k][0];
  }
  REQUIRE(max_ee <= 0.1);

  double f = dominant_frequency(tr.times, pgg);
  const double f_expect = std::sqrt(2.0) * 217.0;
  REQUIRE(std::abs(f - f_expect) / f_expect < 0.02);

  // exact-diagonalization oracle: the P_gg oscillation frequency is the gap
  // between the eigenpair with the largest joint |<gg|v>|^2 weight
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  double best_w = -1.0, f_oracle = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      double w = std::norm(es.eigenvectors()(0, a)) * std::norm(es.eigenvectors()(0, b));
      if (w > best_w) {
        best_w = w;
        f_oracle = std::abs(es.eigenvalues()(b) - es.eigenvalues()(a)) / kTwoPi;
      }
    }
  REQUIRE(std::abs(f - f_oracle) / f_oracle < 2e-3);
  REQUIRE(std::abs(f_oracle - f_expect) / f_expect < 0.02);
}

TEST_CASE("eigenbasis-diagonal states keep their eigenspace populations", "[dynamics]") {
  Matrix h = build_nmr_hamiltonian(blockade2q_system(), drive2q(217.0, 217.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::Vector4d p(0.4, 0.3, 0.2, 0.1);
  Matrix rho0 = es.eigenvectors() * p.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  Trajectory tr = evolve_closed(h, rho0, sampled(0.01, 17));
  for (const auto& rho : tr.states)
    for (int k = 0; k < 4; ++k) {
      Complex pk = es.eigenvectors().col(k).adjoint() * rho * es.eigenvectors().col(k);
      REQUIRE(pk.real() == Catch::Approx(p(k)).margin(1e-10));
    }
}

TEST_CASE("uncoupled uniform drive gives the product-rule ground population", "[dynamics]") {
  const int n = 3;
  SpinSystem s;
  s.n_qubits = n;
  s.offsets = {0.0, 0.0, 0.0};
  s.couplings = Eigen::MatrixXd::Zero(n, n);
  DriveConfig d;
  d.amplitudes = {217.0, 217.0, 217.0};
  Matrix h = build_nmr_hamiltonian(s, d);
  Trajectory tr = evolve_closed(h, projector(ground_state(n)), sampled(0.012, 301));
  for (size_t k = 0; k < tr.times.size(); ++k) {
    double expect = std::pow(std::cos(M_PI * 217.0 * tr.times[k]), 2 * n);
    REQUIRE(tr.populations[k][0] == Catch::Approx(expect).margin(1e-8));
  }
}

TEST_CASE("lindblad rhs is traceless and requires relaxation data", "[dynamics]") {
  SpinSystem s = blockade2q_system();
  REQUIRE_THROWS_AS(lindblad_rhs(0.25 * identity(4), Matrix::Zero(4, 4), s),
                    std::invalid_argument);

  s.t1 = {0.050, 0.040};
  s.t2 = {0.030, 0.020};
  Matrix h = build_nmr_hamiltonian(s, drive2q(217.0, 217.0));
  auto gen = testsupport::rng(221);
  for (int rep = 0; rep < 4; ++rep) {
    Matrix rho = testsupport::random_state(4, gen);
    Matrix dr = lindblad_rhs(rho, h, s);
    REQUIRE(std::abs(dr.trace()) < 1e-12);
    REQUIRE(is_hermitian(dr, 1e-12));
  }
}

TEST_CASE("T1-only decay matches the exponential solution", "[dynamics]") {
  SpinSystem s;
  s.n_qubits = 1;
  s.offsets = {0.0};
  s.couplings = Eigen::MatrixXd::Zero(1, 1);
  s.t1 = {0.010};
  s.t2 = {0.020};  // T2 = 2 T1: pure amplitude damping
  Matrix rho0 = Matrix::Zero(2, 2);
  rho0(1, 1) = 1.0;
  Trajectory tr =
      evolve_open(s, DriveConfig{{0.0}, {}}, rho0, sampled(0.02, 41, Scheme::fixed_step_rk4, 1e-5));
  for (size_t k = 0; k < tr.times.size(); ++k)
    REQUIRE(tr.populations[k][1] ==
            Catch::Approx(std::exp(-tr.times[k] / 0.010)).margin(1e-9));
}

TEST_CASE("dephasing decays coherences at 1/T2", "[dynamics]") {
  SpinSystem s;
  s.n_qubits = 1;
  s.offsets = {0.0};
  s.couplings = Eigen::MatrixXd::Zero(1, 1);
  s.t1 = {1.0e9};  // effectively no repolarization
  s.t2 = {0.005};
  Matrix rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  Trajectory tr =
      evolve_open(s, DriveConfig{{0.0}, {}}, rho0, sampled(0.01, 21, Scheme::fixed_step_rk4, 1e-5));
  for (size_t k = 0; k < tr.times.size(); ++k)
    REQUIRE(tr.states[k](0, 1).real() ==
            Catch::Approx(0.5 * std::exp(-tr.times[k] / 0.005)).margin(1e-8));
}

TEST_CASE("evolve_open matches evolve_closed in the closed limit", "[dynamics]") {
  SpinSystem s = blockade2q_system();
  DriveConfig d = drive2q(217.0, 217.0);
  Matrix rho0 = projector(ground_state(2));
  EvolutionConfig cfg = sampled(0.008, 33, Scheme::fixed_step_rk4);
  Trajectory open_tr = evolve_open(s, d, rho0, cfg);
  Trajectory closed_tr =
      evolve_closed(build_nmr_hamiltonian(s, d), rho0, sampled(0.008, 33));
  for (size_t k = 0; k < open_tr.times.size(); ++k) {
    REQUIRE(trace_distance(open_tr.states[k], closed_tr.states[k]) < 1e-6);
    REQUIRE(validate_state(open_tr.states[k]).pass);
  }
}

TEST_CASE("evolve_open rejects oversized steps", "[dynamics]") {
  SpinSystem s = blockade2q_system();
  REQUIRE_THROWS_AS(evolve_open(s, drive2q(217.0, 217.0), projector(ground_state(2)),
                                sampled(0.01, 5, Scheme::fixed_step_rk4, 1e-3)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(evolve_open(s, drive2q(217.0, 217.0), projector(ground_state(2)),
                                sampled(0.01, 5, Scheme::exact_unitary)),
                    std::invalid_argument);
}

TEST_CASE("RK4 integrator is fourth-order self-convergent", "[dynamics]") {
  SpinSystem s = blockade2q_system();
  s.t1 = {0.050, 0.050};
  s.t2 = {0.040, 0.040};
  DriveConfig d = drive2q(217.0, 217.0);
  Matrix rho0 = projector(ground_state(2));
  const double t_end = 0.002;

  auto terminal = [&](double step) {
    EvolutionConfig cfg;
    cfg.scheme = Scheme::fixed_step_rk4;
    cfg.step = step;
    cfg.sample_times = {t_end};
    return evolve_open(s, d, rho0, cfg).states[0];
  };
  const double h0 = t_end / 100.0;
  Matrix ref = terminal(h0 / 8.0);
  double e1 = (terminal(h0) - ref).norm();
  double e2 = (terminal(h0 / 2.0) - ref).norm();
  double ratio = e1 / e2;
  REQUIRE(ratio > 13.0);
  REQUIRE(ratio < 19.0);
}

TEST_CASE("open blockade run decays but stays physical", "[dynamics]") {
  SpinSystem s = blockade2q_system();
  s.t1 = {0.030, 0.030};
  s.t2 = {0.015, 0.015};
  Trajectory tr = evolve_open(s, drive2q(217.0, 217.0), projector(ground_state(2)),
                              sampled(0.020, 101, Scheme::fixed_step_rk4));
  std::vector<double> pgg;
  for (const auto& pops : tr.populations) pgg.push_back(pops[0]);
  for (const auto& rho : tr.states) REQUIRE(validate_state(rho).pass);

  auto window_amp = [&](size_t from, size_t to) {
    double mn = 1e9, mx = -1e9;
    for (size_t k = from; k < to; ++k) {
      mn = std::min(mn, pgg[k]);
      mx = std::max(mx, pgg[k]);
    }
    return mx - mn;
  };
  const size_t n = pgg.size();
  REQUIRE(window_amp(4 * n / 5, n) < window_amp(0, n / 5) - 0.1);
}

TEST_CASE("ensemble averaging basics", "[dynamics]") {
  Matrix rho0 = projector(ground_state(1));
  SpinSystem s;
  s.n_qubits = 1;
  s.offsets = {0.0};
  s.couplings = Eigen::MatrixXd::Zero(1, 1);
  auto evolve = [&](const DriveConfig& d) {
    return evolve_closed(build_nmr_hamiltonian(s, d), rho0, sampled(0.02, 101));
  };

  DriveConfig base;
  base.amplitudes = {217.0};
  Trajectory single = ensemble_average(RfiDistribution::single(), base, evolve);
  Trajectory direct = evolve(base);
  for (size_t k = 0; k < single.times.size(); ++k)
    REQUIRE((single.states[k] - direct.states[k]).norm() < 1e-14);

  RfiDistribution two{{{0.95, 0.5}, {1.05, 0.5}}};
  Trajectory avg = ensemble_average(two, base, evolve);
  for (size_t k = 0; k < avg.times.size(); ++k) {
    double t = avg.times[k];
    double expect = 0.5 * (std::pow(std::cos(0.95 * M_PI * 217.0 * t), 2) +
                           std::pow(std::cos(1.05 * M_PI * 217.0 * t), 2));
    REQUIRE(avg.populations[k][0] == Catch::Approx(expect).margin(1e-10));
  }
}

TEST_CASE("RFI averaging damps the blockade oscillation but keeps its frequency",
          "[dynamics]") {
  SpinSystem s = blockade2q_system();
  Matrix rho0 = projector(ground_state(2));
  auto evolve = [&](const DriveConfig& d) {
    return evolve_closed(build_nmr_hamiltonian(s, d), rho0, sampled(0.020, 801));
  };
  Trajectory avg =
      ensemble_average(RfiDistribution::default_distribution(), drive2q(217.0, 217.0), evolve);

  std::vector<double> pgg;
  for (const auto& pops : avg.populations) pgg.push_back(pops[0]);

  double f = dominant_frequency(avg.times, pgg);
  REQUIRE(std::abs(f - std::sqrt(2.0) * 217.0) / (std::sqrt(2.0) * 217.0) < 0.02);

  auto window_amp = [&](size_t from, size_t to) {
    double mn = 1e9, mx = -1e9;
    for (size_t k = from; k < to; ++k) {
      mn = std::min(mn, pgg[k]);
      mx = std::max(mx, pgg[k]);
    }
    return mx - mn;
  };
  const size_t n = pgg.size();
  REQUIRE(window_amp(4 * n / 5, n) < window_amp(0, n / 5) - 0.05);

  // members themselves should agree with direct per-scale runs
  Trajectory member = evolve(drive2q(217.0 * 0.9, 217.0 * 0.9));
  REQUIRE(member.populations.back()[0] >= 0.0);
}

TEST_CASE("evolution is linear over convex mixtures of initial states", "[dynamics]") {
  auto gen = testsupport::rng(231);
  Matrix h = testsupport::random_hermitian(4, gen);
  Matrix a = testsupport::random_state(4, gen);
  Matrix b = testsupport::random_state(4, gen);
  const double lam = 0.3;
  EvolutionConfig cfg = sampled(0.5, 9);
  Trajectory ta = evolve_closed(h, a, cfg);
  Trajectory tb = evolve_closed(h, b, cfg);
  Trajectory tm = evolve_closed(h, lam * a + (1.0 - lam) * b, cfg);
  for (size_t k = 0; k < tm.times.size(); ++k)
    REQUIRE((tm.states[k] - lam * ta.states[k] - (1.0 - lam) * tb.states[k]).norm() < 1e-12);
}

TEST_CASE("dephase_pfg erases coherences only", "[dynamics]") {
  auto [plus, minus] = plus_minus_states();
  Matrix rho = projector(plus);
  Matrix out = dephase_pfg(rho);
  Matrix expect = Matrix::Zero(4, 4);
  expect(1, 1) = 0.5;
  expect(2, 2) = 0.5;
  REQUIRE((out - expect).norm() < 1e-14);

  auto gen = testsupport::rng(241);
  Matrix diag = dephase_pfg(testsupport::random_state(4, gen));
  REQUIRE((dephase_pfg(diag) - diag).norm() == 0.0);
  for (int i = 1; i <= 2; ++i) {
    Matrix z = spin_op(2, i, Axis::z);
    REQUIRE((diag * z - z * diag).norm() < 1e-14);
  }
}

TEST_CASE("dominant_frequency on synthetic and degenerate input", "[dynamics]") {
  std::vector<double> t, y;
  for (int k = 0; k < 200; ++k) {
    t.push_back(k * 1e-4);  // 10 kHz for 20 ms
    y.push_back(std::cos(kTwoPi * 306.9 * t.back()));
  }
  double f = dominant_frequency(t, y);
  REQUIRE(std::abs(f - 306.9) / 306.9 < 1e-3);

  std::vector<double> flat(t.size(), 0.42);
  REQUIRE_THROWS_AS(dominant_frequency(t, flat), std::invalid_argument);
  REQUIRE_THROWS_AS(dominant_frequency({0.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("rfi distribution validation", "[dynamics]") {
  RfiDistribution d = RfiDistribution::default_distribution();
  REQUIRE(d.samples.size() == 11);
  d.validate();
  REQUIRE(d.samples.front().first == Catch::Approx(0.9));
  REQUIRE(d.samples.back().first == Catch::Approx(1.1));
  REQUIRE(d.samples[5].first == Catch::Approx(1.0));
  // symmetric weights
  for (int k = 0; k < 5; ++k)
    REQUIRE(d.samples[static_cast<size_t>(k)].second ==
            Catch::Approx(d.samples[static_cast<size_t>(10 - k)].second));

  RfiDistribution bad{{{0.5, 1.0}}};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  RfiDistribution unnorm{{{1.0, 0.5}}};
  REQUIRE_THROWS_AS(unnorm.validate(), std::invalid_argument);
}
