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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "gbs/common.hpp"
#include "gbs/config_io.hpp"
#include "gbs/experiment.hpp"
#include "gbs/parallel.hpp"
#include "gbs/probability.hpp"

namespace gbs {

struct SampleSet {
  std::string config_fingerprint;
  std::string sampler_id;
  std::uint64_t seed = 0;
  int num_modes = 0;
  int fanout = 1;
  std::vector<ClickPattern> samples;

  void validate() const {
    for (const auto& s : samples) {
      if (static_cast<int>(s.size()) != num_modes)
        throw std::invalid_argument("sample has the wrong number of modes");
      for (int c : s)
        if (c < 0 || c > fanout) throw std::invalid_argument("sample count outside [0, fanout]");
    }
  }
};

inline std::uint64_t purpose_tag(std::string_view name) { return fnv1a64(name); }

inline ClickPattern collapse_bins(BinMask clicked, int modes, int fanout) {
  ClickPattern p(modes);
  const BinMask group = all_bins(fanout);
  for (int m = 0; m < modes; ++m) p[m] = std::popcount((clicked >> (m * fanout)) & group);
  return p;
}

/// Chain-rule sampler over bins: bin k fires with probability
/// P(prefix, k fires) / P(prefix), the prefix marginals computed by
/// inclusion-exclusion on the bins already drawn.
class ExactSampler {
 public:
  explicit ExactSampler(const VacuumEvaluator& eval) : eval_(eval) {}

  BinMask draw(std::mt19937_64& rng) const {
    BinMask clicked = 0, dark = 0;
    double prefix = 1.0;
    for (int b = 0; b < eval_.num_bins(); ++b) {
      const BinMask next_dark = dark | bin_bit(b);
      double p_dark = 0.0;
      try {
        p_dark = prefix_probability(clicked, next_dark);
      } catch (const CapExceeded& e) {
        throw CapExceeded(std::string(e.what()) + " (prefix clicked bins: " +
                          pattern_to_string(bins_of(clicked)) + ")");
      }
      const double cond = prefix > 0 ? std::clamp(p_dark / prefix, 0.0, 1.0) : 1.0;
      if (uniform01(rng) < cond) {
        dark = next_dark;
        prefix = p_dark;
      } else {
        clicked |= bin_bit(b);
        prefix = std::max(prefix - p_dark, 0.0);
      }
    }
    return clicked;
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<BinMask, BinMask>& k) const {
      return std::hash<BinMask>{}(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
    }
  };

  double prefix_probability(BinMask clicked, BinMask dark) const {
    return memo_.get_or_compute({clicked, dark},
                                [&] { return eval_.constrained_probability(clicked, dark); });
  }

  const VacuumEvaluator& eval_;
  ConcurrentCache<std::pair<BinMask, BinMask>, PairHash> memo_;
};

inline SampleSet exact_sampler(const VacuumEvaluator& eval, std::size_t n, std::uint64_t seed,
                               std::string sampler_id = "ground-truth") {
  SampleSet out{"", std::move(sampler_id), seed, eval.num_modes(), eval.fanout(), {}};
  out.samples.resize(n);
  const ExactSampler sampler(eval);
  const std::uint64_t purpose = purpose_tag(out.sampler_id);
  parallel_for(n, [&](std::size_t i) {
    auto rng = stream_rng(seed, purpose, i);
    out.samples[i] = collapse_bins(sampler.draw(rng), out.num_modes, out.fanout);
  });
  return out;
}

inline SampleSet exact_sampler(const GaussianComponentSet& set, std::size_t n, std::uint64_t seed) {
  return exact_sampler(VacuumEvaluator(set), n, seed);
}

// ---------------------------------------------------------------------------
// Photon-routing helpers shared by the particle-picture samplers.

namespace detail {

/// Index drawn from unnormalized nonnegative weights.
inline int draw_index(std::span<const double> cumulative, std::mt19937_64& rng) {
  const double u = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

inline std::vector<double> cumulative_of(std::span<const double> weights) {
  std::vector<double> c(weights.size());
  std::partial_sum(weights.begin(), weights.end(), c.begin());
  return c;
}

/// Pair number of a TMSS(r): P(m) = tanh^{2m}(r) / cosh^2(r).
inline int draw_pair_count(double r, std::mt19937_64& rng) {
  const double t = std::tanh(r) * std::tanh(r);
  if (t <= 0.0) return 0;
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  return static_cast<int>(std::floor(std::log(u) / std::log(t)));
}

/// Detection of photons already placed in output modes: each photon picks a
/// uniform bin of its mode; a bin with at least one photon clicks.
inline ClickPattern detect(std::span<const int> photons_per_mode, int fanout, std::mt19937_64& rng) {
  ClickPattern p(photons_per_mode.size(), 0);
  std::vector<char> hit(fanout);
  for (std::size_t m = 0; m < photons_per_mode.size(); ++m) {
    if (photons_per_mode[m] == 0) continue;
    std::fill(hit.begin(), hit.end(), 0);
    for (int k = 0; k < photons_per_mode[m]; ++k)
      hit[static_cast<int>(uniform01(rng) * fanout)] = 1;
    p[m] = static_cast<int>(std::count(hit.begin(), hit.end(), 1));
  }
  return p;
}

inline SampleSet empty_set(const ExperimentConfig& config, std::string id, std::uint64_t seed,
                           std::size_t n) {
  SampleSet s{fingerprint(config), std::move(id), seed, config.num_modes, config.fanout, {}};
  s.samples.resize(n);
  return s;
}

}  // namespace detail

/// Thermal and squashed mockups sample exactly from their Gaussian component
/// set. The coherent mockup draws a uniform phase for every input amplitude
/// per sample; bins then click independently with probability 1 - exp(-|beta|^2).
inline SampleSet mockup_sampler(const ExperimentConfig& config, Hypothesis hypothesis,
                                std::size_t n, std::uint64_t seed) {
  if (hypothesis == Hypothesis::kGroundTruth)
    throw std::invalid_argument("mockup_sampler: ground truth is not a mockup");
  if (hypothesis != Hypothesis::kCoherent) {
    SampleSet s = exact_sampler(VacuumEvaluator(build_components(config, hypothesis)), n, seed,
                                std::string(to_string(hypothesis)));
    s.config_fingerprint = fingerprint(config);
    return s;
  }
  config.validate();
  const int m = config.num_modes, f = config.fanout;
  const ComplexMatrix u = config.resolved_unitary();
  SampleSet out = detail::empty_set(config, "coherent", seed, n);
  const std::uint64_t purpose = purpose_tag(out.sampler_id);
  parallel_for(n, [&](std::size_t idx) {
    auto rng = stream_rng(seed, purpose, idx);
    ComplexVector in = ComplexVector::Zero(m);
    for (const auto& s : config.sources) {
      const double amp = std::sinh(config.effective_squeezing(s));
      const Complex e1 = std::polar(amp, 2 * std::numbers::pi * uniform01(rng));
      const Complex e2 = std::polar(amp, 2 * std::numbers::pi * uniform01(rng));
      in(s.mode_a) = (e1 + e2) / std::sqrt(2.0);
      in(s.mode_b) = (e1 - e2) / std::sqrt(2.0);
    }
    const ComplexVector outp = u * in;
    ClickPattern p(m, 0);
    for (int k = 0; k < m; ++k) {
      const double bin_intensity = config.efficiency[k] * std::norm(outp(k)) / f;
      const double p_click = -std::expm1(-bin_intensity);
      for (int b = 0; b < f; ++b) p[k] += uniform01(rng) < p_click ? 1 : 0;
    }
    out.samples[idx] = std::move(p);
  });
  return out;
}

/// Fully distinguishable photons: per-source pair numbers, each photon routed
/// independently by |U_{k, input}|^2, then lost with probability 1 - eta_k.
inline SampleSet distinguishable_sampler(const ExperimentConfig& config, std::size_t n,
                                         std::uint64_t seed) {
  config.validate();
  const int m = config.num_modes;
  const ComplexMatrix u = config.resolved_unitary();
  std::vector<std::vector<double>> route(m);
  for (int in = 0; in < m; ++in) {
    std::vector<double> w(m);
    for (int k = 0; k < m; ++k) w[k] = std::norm(u(k, in));
    route[in] = detail::cumulative_of(w);
  }
  SampleSet out = detail::empty_set(config, "distinguishable", seed, n);
  const std::uint64_t purpose = purpose_tag(out.sampler_id);
  parallel_for(n, [&](std::size_t idx) {
    auto rng = stream_rng(seed, purpose, idx);
    std::vector<int> photons(m, 0);
    auto send = [&](int input) {
      const int k = detail::draw_index(route[input], rng);
      if (uniform01(rng) < config.efficiency[k]) ++photons[k];
    };
    for (const auto& s : config.sources) {
      const int pairs = detail::draw_pair_count(config.effective_squeezing(s), rng);
      for (int p = 0; p < pairs; ++p) {
        send(s.mode_a);
        send(s.mode_b);
      }
    }
    out.samples[idx] = detail::detect(photons, config.fanout, rng);
  });
  return out;
}

/// IPS-like sampler: independent pairs placed by |B_ij|^2 with the per-source
/// pair matrix B = U (e_a e_b^T + e_b e_a^T) U^T, singles placed by the
/// ground-truth output intensity. No interference between pairs.
inline SampleSet ips_sampler(const ExperimentConfig& config, std::size_t n, std::uint64_t seed) {
  config.validate();
  const int m = config.num_modes;
  const ComplexMatrix u = config.resolved_unitary();
  std::vector<std::vector<double>> pair_cdf;
  std::vector<std::pair<int, int>> pair_modes;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) pair_modes.emplace_back(i, j);
  std::vector<double> intensity(m, 0.0);
  for (const auto& s : config.sources) {
    const ComplexMatrix b = u.col(s.mode_a) * u.col(s.mode_b).transpose() +
                            u.col(s.mode_b) * u.col(s.mode_a).transpose();
    std::vector<double> w;
    for (auto [i, j] : pair_modes) w.push_back(i == j ? std::norm(b(i, i)) / 2 : std::norm(b(i, j)));
    pair_cdf.push_back(detail::cumulative_of(w));
    const double nbar = std::pow(std::sinh(config.effective_squeezing(s)), 2);
    for (int k = 0; k < m; ++k)
      intensity[k] += config.efficiency[k] * nbar * (std::norm(u(k, s.mode_a)) + std::norm(u(k, s.mode_b)));
  }
  const std::vector<double> single_cdf = detail::cumulative_of(intensity);
  const bool any_light = !single_cdf.empty() && single_cdf.back() > 0;
  SampleSet out = detail::empty_set(config, "ips", seed, n);
  const std::uint64_t purpose = purpose_tag(out.sampler_id);
  parallel_for(n, [&](std::size_t idx) {
    auto rng = stream_rng(seed, purpose, idx);
    std::vector<int> photons(m, 0);
    for (std::size_t k = 0; k < config.sources.size(); ++k) {
      const int pairs = detail::draw_pair_count(config.effective_squeezing(config.sources[k]), rng);
      for (int p = 0; p < pairs; ++p) {
        const auto [i, j] = pair_modes[detail::draw_index(pair_cdf[k], rng)];
        const bool keep_i = uniform01(rng) < config.efficiency[i];
        const bool keep_j = uniform01(rng) < config.efficiency[j];
        if (keep_i && keep_j) {
          ++photons[i];
          ++photons[j];
        } else if ((keep_i || keep_j) && any_light) {
          ++photons[detail::draw_index(single_cdf, rng)];
        }
      }
    }
    out.samples[idx] = detail::detect(photons, config.fanout, rng);
  });
  return out;
}

/// First and second click moments over bins.
struct GreedyTargets {
  int num_modes = 0;
  int fanout = 1;
  RealVector mean;           // E[X_b]
  RealMatrix second_moment;  // E[X_b X_c], diagonal = mean
};

inline GreedyTargets greedy_targets(const VacuumEvaluator& eval) {
  const int n = eval.num_bins();
  GreedyTargets t{eval.num_modes(), eval.fanout(), RealVector(n), RealMatrix(n, n)};
  for (int b = 0; b < n; ++b) t.mean(b) = eval.click_moment(bin_bit(b));
  for (int b = 0; b < n; ++b) {
    t.second_moment(b, b) = t.mean(b);
    for (int c = b + 1; c < n; ++c)
      t.second_moment(b, c) = t.second_moment(c, b) = eval.click_moment(bin_bit(b) | bin_bit(c));
  }
  return t;
}

/// Sequential mean-field sampler: bin k fires with the linear-regression
/// estimate mu_k + beta_k . (x_{<k} - mu_{<k}), clipped to [0, 1], where
/// beta_k solves Cov_{<k} beta_k = Cov_{<k, k}.
inline SampleSet greedy_sampler(const GreedyTargets& targets, std::size_t n, std::uint64_t seed) {
  const int bins = static_cast<int>(targets.mean.size());
  if (bins != targets.num_modes * targets.fanout)
    throw std::invalid_argument("greedy_sampler: target size does not match modes x fanout");
  const RealMatrix cov = targets.second_moment - targets.mean * targets.mean.transpose();
  std::vector<RealVector> beta(bins);
  for (int k = 1; k < bins; ++k) {
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(cov.topLeftCorner(k, k));
    beta[k] = cod.solve(RealVector(cov.col(k).head(k)));
  }
  SampleSet out{"", "greedy", seed, targets.num_modes, targets.fanout, {}};
  out.samples.resize(n);
  const std::uint64_t purpose = purpose_tag(out.sampler_id);
  parallel_for(n, [&](std::size_t idx) {
    auto rng = stream_rng(seed, purpose, idx);
    RealVector dev(bins);
    BinMask clicked = 0;
    for (int k = 0; k < bins; ++k) {
      double p = targets.mean(k);
      if (k > 0) p += beta[k].dot(dev.head(k));
      p = std::clamp(p, 0.0, 1.0);
      const bool fire = uniform01(rng) < p;
      if (fire) clicked |= bin_bit(k);
      dev(k) = (fire ? 1.0 : 0.0) - targets.mean(k);
    }
    out.samples[idx] = collapse_bins(clicked, targets.num_modes, targets.fanout);
  });
  return out;
}

inline const std::vector<std::string>& sampler_ids() {
  static const std::vector<std::string> ids{"ground-truth", "thermal", "squashed", "coherent",
                                            "distinguishable", "ips", "greedy"};
  return ids;
}

/// Dispatch by sampler id; the result carries the config fingerprint.
inline SampleSet sample(const ExperimentConfig& config, std::string_view sampler_id, std::size_t n,
                        std::uint64_t seed) {
  SampleSet s;
  if (sampler_id == "ground-truth") {
    s = exact_sampler(VacuumEvaluator(build_components(config, Hypothesis::kGroundTruth)), n, seed);
  } else if (sampler_id == "thermal" || sampler_id == "squashed" || sampler_id == "coherent") {
    s = mockup_sampler(config, parse_hypothesis(sampler_id), n, seed);
  } else if (sampler_id == "distinguishable") {
    s = distinguishable_sampler(config, n, seed);
  } else if (sampler_id == "ips") {
    s = ips_sampler(config, n, seed);
  } else if (sampler_id == "greedy") {
    const VacuumEvaluator gt(build_components(config, Hypothesis::kGroundTruth));
    s = greedy_sampler(greedy_targets(gt), n, seed);
  } else {
    throw std::invalid_argument("unknown sampler '" + std::string(sampler_id) + "'");
  }
  s.config_fingerprint = fingerprint(config);
  return s;
}

/// Monte-Carlo estimate of the click-number distribution with binomial
/// standard errors per bin.
struct ClickNumberEstimate {
  std::vector<double> probability;
  std::vector<double> std_error;
};

inline ClickNumberEstimate click_number_distribution_mc(const VacuumEvaluator& eval,
                                                        std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("monte-carlo click distribution needs draws > 0");
  const SampleSet s = exact_sampler(eval, draws, seed, "click-number-mc");
  const int max_clicks = eval.num_bins();
  std::vector<std::size_t> hist(max_clicks + 1, 0);
  for (const auto& p : s.samples) ++hist[std::accumulate(p.begin(), p.end(), 0)];
  ClickNumberEstimate est;
  for (std::size_t h : hist) {
    const double p = static_cast<double>(h) / draws;
    est.probability.push_back(p);
    est.std_error.push_back(std::sqrt(p * (1 - p) / draws));
  }
  return est;
}

}  // namespace gbs
