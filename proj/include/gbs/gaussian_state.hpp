// Copyright 2026 The gbsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Gaussian states in the quadrature representation.
//
// Conventions used throughout the library:
//   * hbar = 2, so the vacuum covariance is the identity;
//   * xxpp ordering: (x_0 .. x_{M-1}, p_0 .. p_{M-1});
//   * a = (x + i p) / 2, and a passive unitary U acts as a -> U a.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gbs/common.hpp"
#include "gbs/parallel.hpp"

namespace gbs {

class GaussianState {
 public:
  /// Validates shape, symmetry and the uncertainty relation cov + i*Omega >= 0.
  GaussianState(RealVector mean, RealMatrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    validate_shape();
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("covariance matrix is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    if (min_uncertainty_eigenvalue() < -1e-10 * scale) {
      throw std::invalid_argument("covariance violates the uncertainty relation");
    }
  }

  static GaussianState vacuum(int modes) {
    if (modes < 1) throw std::invalid_argument("vacuum: need at least one mode");
    return GaussianState(Unchecked{}, RealVector::Zero(2 * modes),
                         RealMatrix::Identity(2 * modes, 2 * modes));
  }

  int num_modes() const { return static_cast<int>(mean_.size() / 2); }
  const RealVector& mean() const { return mean_; }
  const RealMatrix& cov() const { return cov_; }
  bool has_displacement() const { return mean_.cwiseAbs().maxCoeff() > 0.0; }

  /// <n> summed over modes: (tr(cov) + |mean|^2 - 2M) / 4.
  double mean_photon_number() const {
    return (cov_.trace() + mean_.squaredNorm() - 2.0 * num_modes()) / 4.0;
  }

  double mode_mean_photon_number(int mode) const {
    const int m = num_modes();
    return (cov_(mode, mode) + cov_(mode + m, mode + m) + mean_(mode) * mean_(mode) +
            mean_(mode + m) * mean_(mode + m) - 2.0) /
           4.0;
  }

  /// Smallest eigenvalue of the Hermitian matrix cov + i*Omega.
  double min_uncertainty_eigenvalue() const {
    const int m = num_modes();
    ComplexMatrix h = cov_.cast<Complex>();
    for (int i = 0; i < m; ++i) {
      h(i, i + m) += Complex(0, 1);
      h(i + m, i) -= Complex(0, 1);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Marginal on the listed modes (in the given order).
  GaussianState marginal(std::span<const int> modes) const {
    const int m = num_modes();
    const int k = static_cast<int>(modes.size());
    std::vector<int> idx(2 * k);
    for (int i = 0; i < k; ++i) {
      if (modes[i] < 0 || modes[i] >= m) throw std::out_of_range("marginal: mode out of range");
      idx[i] = modes[i];
      idx[i + k] = modes[i] + m;
    }
    return GaussianState(Unchecked{}, mean_(idx), cov_(idx, idx));
  }

  /// Product state with `other` appended after this state's modes.
  GaussianState tensor(const GaussianState& other) const {
    const int a = num_modes(), b = other.num_modes(), n = a + b;
    RealVector mean(2 * n);
    mean << mean_.head(a), other.mean_.head(b), mean_.tail(a), other.mean_.tail(b);
    RealMatrix cov = RealMatrix::Zero(2 * n, 2 * n);
    auto place = [&](const RealMatrix& c, int offset, int width) {
      for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
          cov.block(bi * n + offset, bj * n + offset, width, width) =
              c.block(bi * width, bj * width, width, width);
    };
    place(cov_, 0, a);
    place(other.cov_, a, b);
    return GaussianState(Unchecked{}, std::move(mean), std::move(cov));
  }

  /// Affine Gaussian channel: mean -> X mean, cov -> X cov X^T + Y.
  /// Callers are responsible for X, Y describing a physical channel.
  GaussianState transformed(const RealMatrix& x, const RealMatrix& y) const {
    return GaussianState(Unchecked{}, x * mean_, x * cov_ * x.transpose() + y);
  }

 private:
  struct Unchecked {};
  GaussianState(Unchecked, RealVector mean, RealMatrix cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {}

  void validate_shape() const {
    if (mean_.size() == 0 || mean_.size() % 2 != 0)
      throw std::invalid_argument("mean vector must have even, nonzero length");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw std::invalid_argument("covariance shape does not match mean vector");
  }

  RealVector mean_;
  RealMatrix cov_;
};

// ---------------------------------------------------------------------------
// Constructors

inline GaussianState tmss(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("tmss: squeezing must be >= 0");
  const double c = std::cosh(2 * r), s = std::sinh(2 * r);
  RealMatrix cov(4, 4);
  cov << c, s, 0, 0,  //
      s, c, 0, 0,     //
      0, 0, c, -s,    //
      0, 0, -s, c;
  return GaussianState(RealVector::Zero(4), cov);
}

/// Single-mode squeezed vacuum, anti-squeezed along x.
inline GaussianState squeezed_vacuum(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("squeezed_vacuum: squeezing must be >= 0");
  RealMatrix cov = RealMatrix::Zero(2, 2);
  cov(0, 0) = std::exp(2 * r);
  cov(1, 1) = std::exp(-2 * r);
  return GaussianState(RealVector::Zero(2), cov);
}

inline GaussianState thermal_state(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("thermal_state: mean photon number must be >= 0");
  return GaussianState(RealVector::Zero(2), (1 + 2 * nbar) * RealMatrix::Identity(2, 2));
}

/// Vacuum variance in p, raised variance in x so that <n> = nbar.
inline GaussianState squashed_state(double nbar) {
  if (!(nbar >= 0.0)) throw std::invalid_argument("squashed_state: mean photon number must be >= 0");
  RealMatrix cov = RealMatrix::Identity(2, 2);
  cov(0, 0) = 1 + 4 * nbar;
  return GaussianState(RealVector::Zero(2), cov);
}

inline GaussianState coherent_state(Complex alpha) {
  RealVector mean(2);
  mean << 2 * alpha.real(), 2 * alpha.imag();
  return GaussianState(mean, RealMatrix::Identity(2, 2));
}

/// Reference-phase member of the phase-randomized coherent mixture with
/// |alpha|^2 = nbar. Samplers redraw the phase per sample.
inline GaussianState coherent_mockup_state(double nbar) {
  if (!(nbar >= 0.0))
    throw std::invalid_argument("coherent_mockup_state: mean photon number must be >= 0");
  return coherent_state(Complex(std::sqrt(nbar), 0.0));
}

// ---------------------------------------------------------------------------
// Channels

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  return (u * u.adjoint() - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <=
         tol;
}

/// Real orthogonal-symplectic image of U in xxpp ordering.
inline RealMatrix passive_symplectic(const ComplexMatrix& u) {
  const auto m = u.rows();
  RealMatrix s(2 * m, 2 * m);
  s << u.real(), -u.imag(), u.imag(), u.real();
  return s;
}

inline GaussianState apply_unitary(const GaussianState& state, const ComplexMatrix& u) {
  if (u.rows() != state.num_modes() || u.cols() != state.num_modes())
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  if (!is_unitary(u)) throw std::invalid_argument("apply_unitary: matrix is not unitary");
  const RealMatrix s = passive_symplectic(u);
  return state.transformed(s, RealMatrix::Zero(s.rows(), s.cols()));
}

/// Embeds a k x k unitary acting on `modes` into the identity on `total` modes.
inline ComplexMatrix embed_unitary(const ComplexMatrix& u, std::span<const int> modes, int total) {
  ComplexMatrix full = ComplexMatrix::Identity(total, total);
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) full(modes[i], modes[j]) = u(i, j);
  return full;
}

/// Pure-loss channel with per-mode transmissivity.
inline GaussianState apply_loss(const GaussianState& state, std::span<const double> eta) {
  const int m = state.num_modes();
  if (static_cast<int>(eta.size()) != m)
    throw std::invalid_argument("apply_loss: one efficiency per mode required");
  RealVector g(2 * m);
  for (int i = 0; i < m; ++i) {
    if (!(eta[i] >= 0.0 && eta[i] <= 1.0))
      throw std::invalid_argument("apply_loss: efficiency outside [0, 1]");
    g(i) = g(i + m) = eta[i];
  }
  const RealMatrix x = g.cwiseSqrt().asDiagonal();
  const RealMatrix y = (RealVector::Ones(2 * m) - g).asDiagonal();
  return state.transformed(x, y);
}

inline GaussianState apply_loss(const GaussianState& state, double eta) {
  const std::vector<double> v(state.num_modes(), eta);
  return apply_loss(state, v);
}

/// Balanced 1 -> F split of every mode into F bins with vacuum ancillas.
/// Bin f of mode i becomes mode i * F + f of the result.
inline GaussianState fan_out(const GaussianState& state, int fanout) {
  if (fanout < 1) throw std::invalid_argument("fan_out: fan-out factor must be >= 1");
  if (fanout == 1) return state;
  const int m = state.num_modes();
  const int n = m * fanout;
  const double amp = 1.0 / std::sqrt(static_cast<double>(fanout));
  RealMatrix l = RealMatrix::Zero(2 * n, 2 * m);
  for (int i = 0; i < m; ++i) {
    for (int f = 0; f < fanout; ++f) {
      l(i * fanout + f, i) = amp;
      l(i * fanout + f + n, i + m) = amp;
    }
  }
  const RealMatrix y = RealMatrix::Identity(2 * n, 2 * n) - l * l.transpose();
  return state.transformed(l, y);
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of R's diagonal absorbed into Q.
inline ComplexMatrix haar_unitary(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("haar_unitary: need m >= 1");
  auto rng = stream_rng(seed, 0x4861617255ULL, static_cast<std::uint64_t>(m));
  auto gauss = [&rng] {
    // Box-Muller keeps the stream identical across standard libraries.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  ComplexMatrix z(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) z(i, j) = Complex(gauss(), gauss()) / std::sqrt(2.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0 ? d / a : Complex(1, 0));
  }
  return q;
}

/// Husimi matrix Q = (sigma_c + I) / 2 in a-ordering (a_1..a_M, a_1^dag..a_M^dag),
/// where sigma_c = T cov T^dag and T = [[I, iI], [I, -iI]] / sqrt(2).
inline ComplexMatrix husimi_q(const GaussianState& state) {
  const int m = state.num_modes();
  ComplexMatrix t(2 * m, 2 * m);
  const ComplexMatrix id = ComplexMatrix::Identity(m, m);
  t << id, Complex(0, 1) * id, id, Complex(0, -1) * id;
  t /= std::sqrt(2.0);
  const ComplexMatrix sigma = t * state.cov().cast<Complex>() * t.adjoint();
  return 0.5 * (sigma + ComplexMatrix::Identity(2 * m, 2 * m));
}

}  // namespace gbs
