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

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gbs/common.hpp"
#include "gbs/gaussian_state.hpp"

namespace gbs {

struct Source {
  int mode_a = 0;
  int mode_b = 1;
  double squeezing = 0.0;
  double indistinguishability = 1.0;
};

struct ExperimentConfig {
  int num_modes = 0;
  int fanout = 1;
  std::vector<Source> sources;
  std::vector<double> efficiency;  // one per mode, applied after the interferometer
  std::optional<ComplexMatrix> unitary;
  std::uint64_t unitary_seed = 0;  // used when `unitary` is empty
  double power_scale = 1.0;

  void validate() const {
    if (num_modes < 1) throw std::invalid_argument("config: num_modes must be >= 1");
    if (fanout < 1) throw std::invalid_argument("config: fanout must be >= 1");
    if (!(power_scale >= 0.0)) throw std::invalid_argument("config: power_scale must be >= 0");
    std::set<int> used;
    for (const auto& s : sources) {
      for (int m : {s.mode_a, s.mode_b}) {
        if (m < 0 || m >= num_modes) throw std::invalid_argument("config: source mode out of range");
        if (!used.insert(m).second) throw std::invalid_argument("config: source modes must be distinct");
      }
      if (!(s.squeezing >= 0.0)) throw std::invalid_argument("config: squeezing must be >= 0");
      if (!(s.indistinguishability >= 0.0 && s.indistinguishability <= 1.0))
        throw std::invalid_argument("config: indistinguishability outside [0, 1]");
    }
    if (static_cast<int>(efficiency.size()) != num_modes)
      throw std::invalid_argument("config: one efficiency per mode required");
    for (double e : efficiency)
      if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("config: efficiency outside [0, 1]");
    if (unitary) {
      if (unitary->rows() != num_modes || unitary->cols() != num_modes)
        throw std::invalid_argument("config: unitary has wrong dimensions");
      if (!is_unitary(*unitary)) throw std::invalid_argument("config: unitary is not unitary");
    }
  }

  ComplexMatrix resolved_unitary() const {
    return unitary ? *unitary : haar_unitary(num_modes, unitary_seed);
  }

  double effective_squeezing(const Source& s) const { return s.squeezing * power_scale; }
};

enum class Hypothesis { kGroundTruth, kThermal, kSquashed, kCoherent };

inline std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::kGroundTruth: return "ground-truth";
    case Hypothesis::kThermal: return "thermal";
    case Hypothesis::kSquashed: return "squashed";
    case Hypothesis::kCoherent: return "coherent";
  }
  return "unknown";
}

inline Hypothesis parse_hypothesis(std::string_view s) {
  for (auto h : {Hypothesis::kGroundTruth, Hypothesis::kThermal, Hypothesis::kSquashed,
                 Hypothesis::kCoherent})
    if (to_string(h) == s) return h;
  throw std::invalid_argument("unknown hypothesis '" + std::string(s) + "'");
}

/// Independent Gaussian states sharing the same spatial modes, one per
/// orthogonal internal label. A threshold detector stays dark only if every
/// component is vacuum on its bin, so vacuum probabilities multiply.
class GaussianComponentSet {
 public:
  GaussianComponentSet(std::vector<GaussianState> components, std::vector<std::string> labels,
                       int fanout = 1)
      : components_(std::move(components)), labels_(std::move(labels)), fanout_(fanout) {
    if (components_.empty()) throw std::invalid_argument("component set must not be empty");
    if (labels_.size() != components_.size())
      throw std::invalid_argument("one label per component required");
    if (fanout_ < 1) throw std::invalid_argument("fanout must be >= 1");
    for (const auto& c : components_)
      if (c.num_modes() != components_.front().num_modes())
        throw std::invalid_argument("all components must share num_modes");
    if (num_bins() % fanout_ != 0)
      throw std::invalid_argument("bin count is not a multiple of the fan-out factor");
  }

  const std::vector<GaussianState>& components() const { return components_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int fanout() const { return fanout_; }
  int num_bins() const { return components_.front().num_modes(); }
  int num_modes() const { return num_bins() / fanout_; }

  double mean_photon_number() const {
    double n = 0;
    for (const auto& c : components_) n += c.mean_photon_number();
    return n;
  }

  /// Keeps all bins of the listed spatial modes, in the given order.
  GaussianComponentSet restrict_modes(std::span<const int> modes) const {
    std::vector<int> bins;
    bins.reserve(modes.size() * fanout_);
    for (int m : modes) {
      if (m < 0 || m >= num_modes()) throw std::out_of_range("restrict_modes: mode out of range");
      for (int f = 0; f < fanout_; ++f) bins.push_back(m * fanout_ + f);
    }
    std::vector<GaussianState> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.marginal(bins));
    return GaussianComponentSet(std::move(out), labels_, fanout_);
  }

 private:
  std::vector<GaussianState> components_;
  std::vector<std::string> labels_;
  int fanout_;
};

namespace detail {

struct Piece {
  std::vector<int> modes;
  GaussianState state;
};

/// Product state on `m` modes; modes not covered by a piece are vacuum.
inline GaussianState product_state(int m, const std::vector<Piece>& pieces) {
  RealVector mean = RealVector::Zero(2 * m);
  RealMatrix cov = RealMatrix::Identity(2 * m, 2 * m);
  for (const auto& p : pieces) {
    const int k = static_cast<int>(p.modes.size());
    for (int i = 0; i < k; ++i) {
      mean(p.modes[i]) = p.state.mean()(i);
      mean(p.modes[i] + m) = p.state.mean()(i + k);
      for (int j = 0; j < k; ++j)
        for (int bi = 0; bi < 2; ++bi)
          for (int bj = 0; bj < 2; ++bj)
            cov(p.modes[i] + bi * m, p.modes[j] + bj * m) = p.state.cov()(i + bi * k, j + bj * k);
    }
  }
  return GaussianState(std::move(mean), std::move(cov));
}

inline ComplexMatrix balanced_splitter() {
  ComplexMatrix b(2, 2);
  b << 1, 1, 1, -1;
  return b / std::sqrt(2.0);
}

inline ComplexMatrix quarter_phase() {
  ComplexMatrix p = ComplexMatrix::Identity(2, 2);
  p(1, 1) = Complex(0, 1);
  return p;
}

/// Two-mode stand-in for a TMSS(r) source under a classical hypothesis.
/// TMSS(r) equals a balanced splitter acting on an x-squeezed and a
/// p-squeezed single-mode vacuum; each of those is replaced by the mockup
/// with the same mean photon number sinh^2(r), in the same orientation.
inline GaussianState mockup_pair(Hypothesis h, double r) {
  const double nbar = std::sinh(r) * std::sinh(r);
  GaussianState single = GaussianState::vacuum(1);
  switch (h) {
    case Hypothesis::kThermal: single = thermal_state(nbar); break;
    case Hypothesis::kSquashed: single = squashed_state(nbar); break;
    case Hypothesis::kCoherent: single = coherent_mockup_state(nbar); break;
    case Hypothesis::kGroundTruth: single = squeezed_vacuum(r); break;
  }
  const GaussianState pair = apply_unitary(single.tensor(single), quarter_phase());
  return apply_unitary(pair, balanced_splitter());
}

}  // namespace detail

/// Squeezing of the indistinguishable share: sinh^2(r_c) = x sinh^2(r).
inline double shared_squeezing(double r, double x) {
  return std::asinh(std::sqrt(x) * std::sinh(r));
}

/// Squeezing of the distinguishable residual: sinh^2(r_d) = (1 - x) sinh^2(r).
inline double residual_squeezing(double r, double x) {
  return std::asinh(std::sqrt(1.0 - x) * std::sinh(r));
}

/// Input (pre-interferometer) states of every component for a hypothesis.
inline std::pair<std::vector<GaussianState>, std::vector<std::string>> input_components(
    const ExperimentConfig& config, Hypothesis hypothesis) {
  config.validate();
  const int m = config.num_modes;
  std::vector<GaussianState> states;
  std::vector<std::string> labels;
  if (hypothesis == Hypothesis::kGroundTruth) {
    std::vector<detail::Piece> shared;
    for (const auto& s : config.sources) {
      const double r = config.effective_squeezing(s);
      const double rc = shared_squeezing(r, s.indistinguishability);
      if (rc > 0) shared.push_back({{s.mode_a, s.mode_b}, tmss(rc)});
    }
    if (!shared.empty()) {
      states.push_back(detail::product_state(m, shared));
      labels.emplace_back("shared");
    }
    for (std::size_t k = 0; k < config.sources.size(); ++k) {
      const auto& s = config.sources[k];
      const double rd = residual_squeezing(config.effective_squeezing(s), s.indistinguishability);
      if (rd > 0) {
        states.push_back(detail::product_state(m, {{{s.mode_a, s.mode_b}, tmss(rd)}}));
        labels.push_back("source-" + std::to_string(k));
      }
    }
  } else {
    std::vector<detail::Piece> pieces;
    for (const auto& s : config.sources)
      pieces.push_back({{s.mode_a, s.mode_b},
                        detail::mockup_pair(hypothesis, config.effective_squeezing(s))});
    states.push_back(detail::product_state(m, pieces));
    labels.emplace_back(to_string(hypothesis));
  }
  if (states.empty()) {
    states.push_back(GaussianState::vacuum(m));
    labels.emplace_back("vacuum");
  }
  return {std::move(states), std::move(labels)};
}

/// Interferometer, per-mode loss and fan-out applied to one input state.
inline GaussianState propagate(const GaussianState& input, const ComplexMatrix& u,
                               std::span<const double> efficiency, int fanout) {
  return fan_out(apply_loss(apply_unitary(input, u), efficiency), fanout);
}

inline GaussianComponentSet build_components(const ExperimentConfig& config, Hypothesis hypothesis) {
  auto [inputs, labels] = input_components(config, hypothesis);
  const ComplexMatrix u = config.resolved_unitary();
  std::vector<GaussianState> out;
  out.reserve(inputs.size());
  for (const auto& s : inputs) out.push_back(propagate(s, u, config.efficiency, config.fanout));
  return GaussianComponentSet(std::move(out), std::move(labels), config.fanout);
}

}  // namespace gbs
