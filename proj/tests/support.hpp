#pragma once

// Shared helpers for the test suites: seeded random-state generators and
// slow-but-independent oracles that the library results are checked against.

#include <spinsim/discord.hpp>
#include <spinsim/qops.hpp>

#include <complex>
#include <random>
#include <vector>

namespace testsupport {

using spinsim::Complex;
using spinsim::Matrix;
using spinsim::Vector;

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline Matrix random_complex(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(dist(gen), dist(gen));
  return m;
}

inline Matrix random_hermitian(int dim, std::mt19937_64& gen) {
  Matrix a = random_complex(dim, dim, gen);
  return 0.5 * (a + a.adjoint());
}

// Full-rank mixed state (Ginibre construction).
inline Matrix random_state(int dim, std::mt19937_64& gen) {
  Matrix a = random_complex(dim, dim, gen);
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline Vector random_pure(int dim, std::mt19937_64& gen) {
  Vector v = random_complex(dim, 1, gen).col(0);
  return v / v.norm();
}

// Haar-ish random single-qubit unitary via QR of a Ginibre matrix.
inline Matrix random_unitary(int dim, std::mt19937_64& gen) {
  Matrix a = random_complex(dim, dim, gen);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < dim; ++k) {
    Complex d = r(k, k);
    q.col(k) *= d / std::abs(d);
  }
  return q;
}

// Index-summation partial trace, independent of the library implementation:
// explicit loops over bit patterns of kept and traced sites.
inline Matrix naive_partial_trace(const Matrix& rho, int n,
                                  const std::vector<int>& keep_sorted) {
  const int nk = static_cast<int>(keep_sorted.size());
  const int dk = 1 << nk;
  Matrix out = Matrix::Zero(dk, dk);
  const int dim = 1 << n;
  auto reduced_index = [&](int full) {
    int idx = 0;
    for (int a = 0; a < nk; ++a) {
      int bit = (full >> (n - keep_sorted[static_cast<size_t>(a)])) & 1;
      idx = (idx << 1) | bit;
    }
    return idx;
  };
  auto traced_pattern = [&](int full) {
    int pat = 0;
    for (int s = 1; s <= n; ++s) {
      bool kept = false;
      for (int k : keep_sorted) kept = kept || (k == s);
      if (!kept) pat = (pat << 1) | ((full >> (n - s)) & 1);
    }
    return pat;
  };
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      if (traced_pattern(r) == traced_pattern(c))
        out(reduced_index(r), reduced_index(c)) += rho(r, c);
  return out;
}

// Exhaustive-grid discord oracle: a dense 100x100 basis scan followed by two
// local zoom rounds. Shares only the J evaluation with the library; the
// maximization strategy is entirely different from the production optimizer.
inline double brute_force_discord(const Matrix& rho, const spinsim::Partition& p) {
  const double mi = spinsim::mutual_information(rho, p);
  double best_j = -1e300, best_t = 0.0, best_f = 0.0;
  auto scan = [&](double t0, double t1, double f0, double f1, int nt, int nf) {
    for (int i = 0; i < nt; ++i) {
      const double theta = t0 + (t1 - t0) * i / (nt - 1);
      for (int j = 0; j < nf; ++j) {
        const double phi = f0 + (f1 - f0) * j / (nf - 1);
        const double val = spinsim::conditional_mutual_information(rho, p, {theta, phi});
        if (val > best_j) {
          best_j = val;
          best_t = theta;
          best_f = phi;
        }
      }
    }
  };
  scan(0.0, M_PI, 0.0, 2.0 * M_PI * 99.0 / 100.0, 100, 100);
  double span_t = M_PI / 99.0, span_f = 2.0 * M_PI / 100.0;
  for (int round = 0; round < 2; ++round) {
    scan(best_t - span_t, best_t + span_t, best_f - span_f, best_f + span_f, 21, 21);
    span_t /= 10.0;
    span_f /= 10.0;
  }
  return mi - best_j;
}

}  // namespace testsupport
