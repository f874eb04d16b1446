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

// Click probabilities of threshold and pseudo-photon-number-resolving
// detection by inclusion-exclusion over vacuum probabilities.
//
// For a component with quadrature covariance V and mean mu, the probability
// that every bin in W is empty is
//
//   exp(-mu_W^T A_W^{-1} mu_W / 4) / sqrt(det A_W),   A = (V + I) / 2,
//
// which equals the Husimi-matrix form det(Q_W)^{-1/2} exp(-m^dag Q_W^{-1} m / 2)
// because Q = T A T^dag with T unitary. Working with the real A halves the
// Cholesky cost. Independent components multiply.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Cholesky>

#include "gbs/common.hpp"
#include "gbs/experiment.hpp"
#include "gbs/parallel.hpp"

namespace gbs {

/// Subset of detector bins, bit b set for bin b.
using BinMask = std::uint64_t;

inline constexpr int kMaxBins = 64;

inline BinMask bin_bit(int b) { return BinMask{1} << b; }

inline BinMask all_bins(int n) { return n >= 64 ? ~BinMask{0} : (bin_bit(n) - 1); }

inline std::vector<int> bins_of(BinMask m) {
  std::vector<int> out;
  while (m) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

inline BinMask mask_of(std::span<const int> bins) {
  BinMask m = 0;
  for (int b : bins) m |= bin_bit(b);
  return m;
}

/// Memo table safe for concurrent readers and writers. Values are pure
/// functions of their keys, so a duplicate computation by two threads is benign.
template <typename Key, typename Hash = std::hash<Key>>
class ConcurrentCache {
 public:
  template <typename Compute>
  double get_or_compute(const Key& key, Compute&& compute) const {
    auto& shard = shards_[(Hash{}(key) * 0x9E3779B97F4A7C15ULL) >> 58];
    {
      std::lock_guard lock(shard.mutex);
      if (auto it = shard.map.find(key); it != shard.map.end()) return it->second;
    }
    const double v = compute();
    std::lock_guard lock(shard.mutex);
    shard.map.emplace(key, v);
    return v;
  }

 private:
  struct Shard {
    std::mutex mutex;
    std::unordered_map<Key, double, Hash> map;
  };
  mutable std::array<Shard, 64> shards_;
};

struct ProbabilityOptions {
  int max_clicked_bins = 24;
};

class VacuumEvaluator {
 public:
  explicit VacuumEvaluator(GaussianComponentSet set, ProbabilityOptions options = {})
      : set_(std::move(set)), options_(options), cache_(std::make_unique<Cache>()) {
    if (set_.num_bins() > kMaxBins)
      throw std::invalid_argument("probability engine supports at most 64 detector bins");
    const int n = set_.num_bins();
    for (const auto& c : set_.components()) {
      Component d;
      d.husimi = 0.5 * (c.cov() + RealMatrix::Identity(2 * n, 2 * n));
      d.mean = c.mean();
      d.displaced = c.has_displacement();
      data_.push_back(std::move(d));
    }
  }

  const GaussianComponentSet& components() const { return set_; }
  const ProbabilityOptions& options() const { return options_; }
  int num_bins() const { return set_.num_bins(); }
  int num_modes() const { return set_.num_modes(); }
  int fanout() const { return set_.fanout(); }

  /// Bins of one fan-out group are exchangeable, so only the number of
  /// selected bins per mode matters. Maps W to the lowest bins of each mode.
  BinMask canonical(BinMask w) const {
    const int f = fanout();
    if (f == 1) return w;
    BinMask out = 0;
    const BinMask group = all_bins(f);
    for (int m = 0; m < num_modes(); ++m) {
      const int k = std::popcount((w >> (m * f)) & group);
      out |= all_bins(k) << (m * f);
    }
    return out;
  }

  /// Canonical mask selecting u[i] bins of mode i.
  BinMask mask_from_counts(std::span<const int> u) const {
    BinMask out = 0;
    for (std::size_t m = 0; m < u.size(); ++m) out |= all_bins(u[m]) << (m * fanout());
    return out;
  }

  double log_vacuum(BinMask w) const {
    const BinMask key = canonical(w);
    return cache_->get_or_compute(key, [&] { return compute_log_vacuum(key); });
  }

  /// Probability that every bin in W is empty, marginal over all other bins.
  double vacuum(BinMask w) const { return std::exp(log_vacuum(w)); }

  /// Probability that every bin in `clicked` fires and every bin in `dark`
  /// stays dark; other bins are unconstrained.
  double constrained_probability(BinMask clicked, BinMask dark) const {
    const int k = std::popcount(clicked);
    if (k > options_.max_clicked_bins)
      throw CapExceeded("inclusion-exclusion over " + std::to_string(k) +
                        " clicked bins exceeds the cap of " +
                        std::to_string(options_.max_clicked_bins));
    const std::vector<int> positions = bins_of(clicked);
    // Gray-code order: consecutive subsets differ in one bin and alternate in sign.
    CompensatedSum sum;
    BinMask z = 0;
    sum.add(vacuum(dark));
    const std::uint64_t count = std::uint64_t{1} << k;
    for (std::uint64_t i = 1; i < count; ++i) {
      z ^= bin_bit(positions[std::countr_zero(i)]);
      const double v = vacuum(z | dark);
      sum.add((std::popcount(z) & 1) ? -v : v);
    }
    return sum.value();
  }

  /// Threshold probability of an exact click pattern over all bins.
  double threshold_probability(BinMask clicked) const {
    return constrained_probability(clicked, all_bins(num_bins()) & ~clicked);
  }

  /// E[prod_{b in T} X_b]: probability that every bin in T fires.
  double click_moment(BinMask t) const { return constrained_probability(t, 0); }

  void check_pattern(const ClickPattern& counts) const {
    if (static_cast<int>(counts.size()) != num_modes())
      throw std::invalid_argument("click pattern has " + std::to_string(counts.size()) +
                                  " modes, expected " + std::to_string(num_modes()));
    for (int c : counts)
      if (c < 0 || c > fanout())
        throw std::invalid_argument("click count outside [0, " + std::to_string(fanout()) + "]");
  }

  /// Clicked bins of the canonical assignment: the first n_i bins of mode i.
  BinMask canonical_bins(const ClickPattern& counts) const {
    check_pattern(counts);
    return mask_from_counts(counts);
  }

  double multiplicity(const ClickPattern& counts) const {
    double mult = 1.0;
    for (int c : counts) mult *= binomial(fanout(), c);
    return mult;
  }

  /// PPNRD probability via one canonical bin assignment times the number of
  /// equivalent assignments.
  double ppnrd_probability_canonical(const ClickPattern& counts) const {
    return multiplicity(counts) * threshold_probability(canonical_bins(counts));
  }

  /// PPNRD probability with the inclusion-exclusion sum grouped by the number
  /// of clicked bins per mode released to "dark": prod_i (n_i + 1) terms
  /// instead of 2^{sum n_i}.
  double ppnrd_probability(const ClickPattern& counts) const {
    check_pattern(counts);
    const int clicked = std::accumulate(counts.begin(), counts.end(), 0);
    if (clicked > options_.max_clicked_bins)
      throw CapExceeded("pattern with " + std::to_string(clicked) +
                        " clicks exceeds the cap of " + std::to_string(options_.max_clicked_bins));
    const int m = num_modes(), f = fanout();
    std::vector<int> w(m, 0), u(m);
    CompensatedSum sum;
    while (true) {
      double coeff = 1.0;
      int parity = 0;
      for (int i = 0; i < m; ++i) {
        coeff *= binomial(counts[i], w[i]);
        parity += w[i];
        u[i] = f - counts[i] + w[i];
      }
      const double v = vacuum(mask_from_counts(u));
      sum.add((parity & 1) ? -coeff * v : coeff * v);
      int i = 0;
      while (i < m && w[i] == counts[i]) w[i++] = 0;
      if (i == m) break;
      ++w[i];
    }
    return multiplicity(counts) * sum.value();
  }

 private:
  struct Component {
    RealMatrix husimi;
    RealVector mean;
    bool displaced = false;
  };
  using Cache = ConcurrentCache<BinMask>;

  double compute_log_vacuum(BinMask w) const {
    if (w == 0) return 0.0;
    const int n = num_bins();
    const std::vector<int> bins = bins_of(w);
    const int k = static_cast<int>(bins.size());
    std::vector<int> idx(2 * k);
    for (int i = 0; i < k; ++i) {
      idx[i] = bins[i];
      idx[i + k] = bins[i] + n;
    }
    double log_p = 0.0;
    for (const auto& c : data_) {
      const RealMatrix a = c.husimi(idx, idx);
      Eigen::LLT<RealMatrix> llt(a);
      if (llt.info() != Eigen::Success)
        throw std::domain_error("Husimi matrix restriction is not positive definite");
      const auto l = llt.matrixLLT();
      double log_det = 0.0;
      for (int i = 0; i < 2 * k; ++i) log_det += std::log(l(i, i));
      log_p -= log_det;  // -(1/2) * (2 * sum log L_ii)
      if (c.displaced) {
        const RealVector mu = c.mean(idx);
        const RealVector y = llt.matrixL().solve(mu);
        log_p -= 0.25 * y.squaredNorm();
      }
    }
    return log_p;
  }

  GaussianComponentSet set_;
  ProbabilityOptions options_;
  std::vector<Component> data_;
  std::unique_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Free-function entry points.

inline double vacuum_probability(const GaussianComponentSet& set, std::span<const int> bins) {
  return VacuumEvaluator(set).vacuum(mask_of(bins));
}

/// `clicks` holds one 0/1 entry per bin.
inline double threshold_pattern_probability(const GaussianComponentSet& set,
                                            std::span<const int> clicks,
                                            ProbabilityOptions options = {}) {
  if (static_cast<int>(clicks.size()) != set.num_bins())
    throw std::invalid_argument("bin pattern length does not match the component set");
  BinMask clicked = 0;
  for (std::size_t b = 0; b < clicks.size(); ++b) {
    if (clicks[b] != 0 && clicks[b] != 1) throw std::invalid_argument("bin pattern entries must be 0/1");
    if (clicks[b]) clicked |= bin_bit(static_cast<int>(b));
  }
  return VacuumEvaluator(set, options).threshold_probability(clicked);
}

inline double ppnrd_pattern_probability(const GaussianComponentSet& set, const ClickPattern& counts,
                                        ProbabilityOptions options = {}) {
  return VacuumEvaluator(set, options).ppnrd_probability(counts);
}

inline double click_moment(const GaussianComponentSet& set, std::span<const int> bins) {
  if (std::set<int>(bins.begin(), bins.end()).size() != bins.size())
    throw std::invalid_argument("click_moment: bin indices must be distinct");
  return VacuumEvaluator(set).click_moment(mask_of(bins));
}

// ---------------------------------------------------------------------------
// Exhaustive PPNRD distribution.

inline constexpr std::size_t kMaxTableEntries = std::size_t{1} << 24;

/// Probability of every click pattern of a component set, indexed in base
/// F + 1 with mode 0 as the least significant digit.
class ClickDistribution {
 public:
  static ClickDistribution exact(const VacuumEvaluator& eval) {
    const int m = eval.num_modes(), f = eval.fanout();
    ClickDistribution d(m, f);
    std::vector<double>& table = d.probs_;
    // Stage 1: vacuum probability for every per-mode count of dark bins.
    parallel_for(table.size(), [&](std::size_t idx) {
      table[idx] = eval.vacuum(eval.mask_from_counts(d.pattern(idx)));
    });
    // Stage 2: per-mode inclusion-exclusion, one tensor factor at a time:
    //   P[c] = C(F, c) sum_{w=0..c} C(c, w) (-1)^w V[F - c + w].
    RealMatrix kernel = RealMatrix::Zero(f + 1, f + 1);
    for (int c = 0; c <= f; ++c)
      for (int w = 0; w <= c; ++w)
        kernel(c, f - c + w) = binomial(f, c) * binomial(c, w) * ((w & 1) ? -1.0 : 1.0);
    std::size_t stride = 1;
    std::vector<double> in(f + 1);
    for (int mode = 0; mode < m; ++mode) {
      const std::size_t block = stride * (f + 1);
      for (std::size_t base = 0; base < table.size(); base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
          for (int u = 0; u <= f; ++u) in[u] = table[base + off + u * stride];
          for (int c = 0; c <= f; ++c) {
            CompensatedSum s;
            for (int u = 0; u <= f; ++u)
              if (kernel(c, u) != 0.0) s.add(kernel(c, u) * in[u]);
            table[base + off + c * stride] = s.value();
          }
        }
      }
      stride = block;
    }
    return d;
  }

  int num_modes() const { return num_modes_; }
  int fanout() const { return fanout_; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probabilities() const { return probs_; }

  std::size_t index(const ClickPattern& p) const {
    if (static_cast<int>(p.size()) != num_modes_) throw std::invalid_argument("pattern size mismatch");
    std::size_t idx = 0;
    for (int i = num_modes_ - 1; i >= 0; --i) {
      if (p[i] < 0 || p[i] > fanout_) throw std::invalid_argument("click count out of range");
      idx = idx * (fanout_ + 1) + p[i];
    }
    return idx;
  }

  ClickPattern pattern(std::size_t idx) const {
    ClickPattern p(num_modes_);
    for (int i = 0; i < num_modes_; ++i) {
      p[i] = static_cast<int>(idx % (fanout_ + 1));
      idx /= (fanout_ + 1);
    }
    return p;
  }

  double probability(const ClickPattern& p) const { return probs_[index(p)]; }

  /// Distribution of the total click number, indexed 0 .. M * F.
  std::vector<double> click_numbers() const {
    std::vector<CompensatedSum> acc(num_modes_ * fanout_ + 1);
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const ClickPattern p = pattern(i);
      acc[std::accumulate(p.begin(), p.end(), 0)].add(probs_[i]);
    }
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
    return out;
  }

 private:
  ClickDistribution(int m, int f) : num_modes_(m), fanout_(f) {
    double entries = std::pow(static_cast<double>(f + 1), m);
    if (entries > static_cast<double>(kMaxTableEntries))
      throw CapExceeded("exhaustive click table would need " + format_count(entries) + " entries");
    probs_.assign(static_cast<std::size_t>(entries), 0.0);
  }
  static std::string format_count(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
  }

  int num_modes_;
  int fanout_;
  std::vector<double> probs_;
};

/// Exact distribution of the total click number. Restricted to M * F <= 24.
inline std::vector<double> click_number_distribution_exact(const VacuumEvaluator& eval) {
  if (eval.num_bins() > 24)
    throw CapExceeded("exact click-number distribution is limited to 24 bins");
  return ClickDistribution::exact(eval).click_numbers();
}

inline std::vector<double> click_number_distribution_exact(const GaussianComponentSet& set) {
  return click_number_distribution_exact(VacuumEvaluator(set));
}

}  // namespace gbs
