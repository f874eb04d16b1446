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
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/common.hpp"
#include "gbs/experiment.hpp"
#include "gbs/parallel.hpp"
#include "gbs/probability.hpp"
#include "gbs/samplers.hpp"

namespace gbs {

// ===========================================================================
// Bayesian test

/// Likelihoods of one hypothesis restricted to a subset of spatial modes.
/// Pattern and click-number probabilities come from the exhaustive click table.
class SubsystemModel {
 public:
  SubsystemModel(const GaussianComponentSet& full, std::vector<int> modes)
      : modes_(std::move(modes)),
        eval_(full.restrict_modes(modes_)),
        table_(ClickDistribution::exact(eval_)),
        click_numbers_(table_.click_numbers()) {}

  const std::vector<int>& modes() const { return modes_; }
  double probability(const ClickPattern& reduced) const { return table_.probability(reduced); }
  double click_number_probability(int n) const {
    return n >= 0 && n < static_cast<int>(click_numbers_.size()) ? click_numbers_[n] : 0.0;
  }
  const std::vector<double>& click_numbers() const { return click_numbers_; }

 private:
  std::vector<int> modes_;
  VacuumEvaluator eval_;
  ClickDistribution table_;
  std::vector<double> click_numbers_;
};

struct BayesianResult {
  double delta_h = 0.0;    // nats per sample
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::optional<int> click_number;  // empty: pooled over every n >= 1
  std::vector<int> subsystem;
};

inline std::vector<int> all_modes(int m) {
  std::vector<int> v(m);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

inline ClickPattern restrict_pattern(const ClickPattern& p, const std::vector<int>& modes) {
  ClickPattern r(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) r[i] = p[modes[i]];
  return r;
}

/// Per-sample terms ln[P0(s) P1(n) / (P1(s) P0(n))] for samples whose
/// subsystem click number satisfies `accept`.
template <typename Accept>
std::vector<double> bayesian_terms(const SampleSet& samples, const SubsystemModel& h0,
                                   const SubsystemModel& h1, Accept&& accept) {
  if (h0.modes() != h1.modes()) throw std::invalid_argument("hypotheses cover different subsystems");
  std::vector<double> terms;
  std::map<ClickPattern, double> memo;
  for (const auto& full : samples.samples) {
    ClickPattern s = restrict_pattern(full, h0.modes());
    const int n = std::accumulate(s.begin(), s.end(), 0);
    if (!accept(n)) continue;
    auto it = memo.find(s);
    if (it == memo.end()) {
      const double p0 = h0.probability(s), p1 = h1.probability(s);
      const double n0 = h0.click_number_probability(n), n1 = h1.click_number_probability(n);
      if (!(p0 > 0.0) || !(p1 > 0.0) || !(n0 > 0.0) || !(n1 > 0.0))
        throw ZeroProbability("sample has zero probability under a hypothesis: " +
                                  pattern_to_string(s),
                              s);
      it = memo.emplace(s, std::log(p0) - std::log(p1) + std::log(n1) - std::log(n0)).first;
    }
    terms.push_back(it->second);
  }
  return terms;
}

inline BayesianResult summarize_terms(const std::vector<double>& terms, std::optional<int> n,
                                      std::vector<int> subsystem) {
  BayesianResult r;
  r.click_number = n;
  r.subsystem = std::move(subsystem);
  r.n_samples = terms.size();
  CompensatedSum sum;
  for (double t : terms) sum.add(t);
  r.delta_h = sum.value() / terms.size();
  if (terms.size() > 1) {
    CompensatedSum ss;
    for (double t : terms) ss.add((t - r.delta_h) * (t - r.delta_h));
    r.std_error = std::sqrt(ss.value() / (terms.size() - 1)) / std::sqrt(double(terms.size()));
  }
  return r;
}

inline BayesianResult bayesian_score(const SampleSet& samples, const SubsystemModel& h0,
                                     const SubsystemModel& h1, int n) {
  const auto terms = bayesian_terms(samples, h0, h1, [n](int k) { return k == n; });
  if (terms.empty())
    throw std::invalid_argument("no samples with click number " + std::to_string(n) +
                                " in the subsystem");
  return summarize_terms(terms, n, h0.modes());
}

/// Every sample with at least one click, each conditioned on its own n.
inline BayesianResult bayesian_score_pooled(const SampleSet& samples, const SubsystemModel& h0,
                                            const SubsystemModel& h1) {
  const auto terms = bayesian_terms(samples, h0, h1, [](int k) { return k > 0; });
  if (terms.empty()) throw std::invalid_argument("no samples with clicks in the subsystem");
  return summarize_terms(terms, std::nullopt, h0.modes());
}

inline BayesianResult bayesian_score(const SampleSet& samples, const GaussianComponentSet& h0,
                                     const GaussianComponentSet& h1, std::vector<int> subsystem,
                                     int n) {
  return bayesian_score(samples, SubsystemModel(h0, subsystem), SubsystemModel(h1, subsystem), n);
}

inline BayesianResult bayesian_score_pooled(const SampleSet& samples,
                                            const GaussianComponentSet& h0,
                                            const GaussianComponentSet& h1,
                                            std::vector<int> subsystem) {
  return bayesian_score_pooled(samples, SubsystemModel(h0, subsystem),
                               SubsystemModel(h1, subsystem));
}

struct SweepRow {
  int size = 0;
  std::optional<int> click_number;
  double mean_delta_h = 0.0;
  double std_error = 0.0;  // sqrt(sum se_i^2) / k over the k subsets used
  std::size_t subsets = 0;
  std::size_t samples = 0;
  std::vector<BayesianResult> per_subset;
};

/// Distinct random subsets of [0, m) of the given size; all of them when
/// there are no more than `count`.
inline std::vector<std::vector<int>> random_subsets(int m, int size, std::size_t count,
                                                    std::uint64_t seed) {
  if (size < 1 || size > m) throw std::invalid_argument("subsystem size out of range");
  const double total = std::round(std::exp(std::lgamma(m + 1.0) - std::lgamma(size + 1.0) -
                                           std::lgamma(m - size + 1.0)));
  std::set<std::vector<int>> picked;
  if (total <= static_cast<double>(count)) {
    std::vector<bool> sel(m, false);
    std::fill(sel.begin(), sel.begin() + size, true);
    do {
      std::vector<int> s;
      for (int i = 0; i < m; ++i)
        if (sel[i]) s.push_back(i);
      picked.insert(s);
    } while (std::prev_permutation(sel.begin(), sel.end()));
    return {picked.begin(), picked.end()};
  }
  std::vector<std::vector<int>> out;
  auto rng = stream_rng(seed, purpose_tag("subsets"), static_cast<std::uint64_t>(size));
  std::vector<int> pool = all_modes(m);
  while (out.size() < count) {
    for (int i = 0; i < size; ++i) {
      const int j = i + static_cast<int>(uniform01(rng) * (m - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> s(pool.begin(), pool.begin() + size);
    std::sort(s.begin(), s.end());
    if (picked.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

/// Mean Bayesian score over random subsystems for every (size, n). An empty
/// `n_values` pools all click numbers. Subsets lacking samples at some n are
/// skipped for that n.
inline std::vector<SweepRow> bayesian_subsystem_sweep(const SampleSet& samples,
                                                      const GaussianComponentSet& h0,
                                                      const GaussianComponentSet& h1,
                                                      const std::vector<int>& sizes,
                                                      const std::vector<int>& n_values,
                                                      std::size_t subsets_per_size,
                                                      std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (int size : sizes) {
    if (size > h0.num_modes()) throw std::invalid_argument("subsystem size exceeds mode count");
    const auto subsets = random_subsets(h0.num_modes(), size, subsets_per_size, seed);
    std::vector<std::optional<int>> conditions;
    if (n_values.empty()) conditions.push_back(std::nullopt);
    for (int n : n_values) conditions.push_back(n);
    std::vector<SweepRow> size_rows(conditions.size());
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      size_rows[c].size = size;
      size_rows[c].click_number = conditions[c];
    }
    std::vector<std::vector<std::optional<BayesianResult>>> results(
        subsets.size(), std::vector<std::optional<BayesianResult>>(conditions.size()));
    parallel_for(subsets.size(), [&](std::size_t k) {
      const SubsystemModel m0(h0, subsets[k]), m1(h1, subsets[k]);
      for (std::size_t c = 0; c < conditions.size(); ++c) {
        const auto cond = conditions[c];
        const auto terms = bayesian_terms(samples, m0, m1, [cond](int n) {
          return cond ? n == *cond : n > 0;
        });
        if (!terms.empty()) results[k][c] = summarize_terms(terms, cond, subsets[k]);
      }
    });
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      SweepRow& row = size_rows[c];
      CompensatedSum mean, var;
      for (std::size_t k = 0; k < subsets.size(); ++k) {
        if (!results[k][c]) continue;
        const auto& r = *results[k][c];
        mean.add(r.delta_h);
        var.add(r.std_error * r.std_error);
        row.samples += r.n_samples;
        row.per_subset.push_back(r);
      }
      row.subsets = row.per_subset.size();
      if (row.subsets > 0) {
        row.mean_delta_h = mean.value() / row.subsets;
        row.std_error = std::sqrt(var.value()) / row.subsets;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ===========================================================================
// Cumulants

/// Click variable behind a cumulant tuple.
///   kBin         indicator of one fan-out bin; tuple entries are bin indices
///   kModeClicked indicator n_i >= 1 of a spatial mode
///   kModeCount   click count n_i of a spatial mode
enum class CumulantVariable { kBin, kModeClicked, kModeCount };

inline std::string_view to_string(CumulantVariable v) {
  switch (v) {
    case CumulantVariable::kBin: return "bin";
    case CumulantVariable::kModeClicked: return "mode-clicked";
    case CumulantVariable::kModeCount: return "mode-count";
  }
  return "unknown";
}

inline CumulantVariable parse_cumulant_variable(std::string_view s) {
  for (auto v : {CumulantVariable::kBin, CumulantVariable::kModeClicked, CumulantVariable::kModeCount})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown cumulant variable '" + std::string(s) + "'");
}

inline constexpr int kMaxCumulantOrder = 4;

using Tuple = std::vector<int>;

struct CumulantEntry {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

struct CumulantTable {
  int order = 0;
  CumulantVariable variable = CumulantVariable::kBin;
  std::map<Tuple, CumulantEntry> entries;
};

/// All set partitions of the bits of `mask`, each partition a list of blocks.
inline std::vector<std::vector<unsigned>> set_partitions(unsigned mask) {
  if (mask == 0) return {{}};
  std::vector<std::vector<unsigned>> out;
  const unsigned low = mask & (~mask + 1);
  const unsigned rest = mask & ~low;
  // The block holding the lowest element is low | sub for every sub of rest.
  for (unsigned sub = rest;; sub = (sub - 1) & rest) {
    const unsigned block = low | sub;
    for (auto tail : set_partitions(rest & ~sub)) {
      tail.insert(tail.begin(), block);
      out.push_back(std::move(tail));
    }
    if (sub == 0) break;
  }
  return out;
}

/// Joint cumulants of every sub-tuple from joint moments, both indexed by
/// submask of the tuple, through the recursion
///   kappa(S) = E(S) - sum_{p partition of S, p != {S}} prod_{b in p} kappa(b).
inline std::vector<double> cumulants_from_moments(const std::vector<double>& moments, int k) {
  if (k < 0 || k > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order above the cap of " + std::to_string(kMaxCumulantOrder));
  const unsigned full = (1u << k) - 1;
  std::vector<double> kappa(full + 1, 0.0);
  for (unsigned s = 1; s <= full; ++s) {
    // Submasks are visited in increasing order, so every proper block is ready.
    CompensatedSum sum;
    sum.add(moments[s]);
    for (const auto& p : set_partitions(s)) {
      if (p.size() == 1) continue;
      double prod = 1.0;
      for (unsigned b : p) prod *= kappa[b];
      sum.add(-prod);
    }
    kappa[s] = sum.value();
  }
  return kappa;
}

/// Inverse map: E(S) = sum over all partitions of S of prod kappa(b).
inline std::vector<double> moments_from_cumulants(const std::vector<double>& kappa, int k) {
  const unsigned full = (1u << k) - 1;
  std::vector<double> mu(full + 1, 1.0);
  for (unsigned s = 1; s <= full; ++s) {
    CompensatedSum sum;
    for (const auto& p : set_partitions(s)) {
      double prod = 1.0;
      for (unsigned b : p) prod *= kappa[b];
      sum.add(prod);
    }
    mu[s] = sum.value();
  }
  return mu;
}

/// Every increasing k-tuple drawn from `indices`.
inline std::vector<Tuple> all_tuples(const std::vector<int>& indices, int k) {
  std::vector<Tuple> out;
  const int n = static_cast<int>(indices.size());
  if (k < 1 || k > n) return out;
  std::vector<int> pos(k);
  std::iota(pos.begin(), pos.end(), 0);
  while (true) {
    Tuple t(k);
    for (int i = 0; i < k; ++i) t[i] = indices[pos[i]];
    out.push_back(std::move(t));
    int i = k - 1;
    while (i >= 0 && pos[i] == n - k + i) --i;
    if (i < 0) break;
    ++pos[i];
    for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
  return out;
}

/// k-tuples over the first bin of every mode (one representative per fan-out group).
inline std::vector<Tuple> first_bin_tuples(int modes, int fanout, int k) {
  std::vector<int> bins(modes);
  for (int m = 0; m < modes; ++m) bins[m] = m * fanout;
  return all_tuples(bins, k);
}

namespace detail {

inline void check_tuple(const Tuple& t, int order, int limit) {
  if (static_cast<int>(t.size()) != order) throw std::invalid_argument("tuple size differs from order");
  if (!std::is_sorted(t.begin(), t.end()) || std::adjacent_find(t.begin(), t.end()) != t.end())
    throw std::invalid_argument("cumulant tuples must be sorted with distinct indices");
  for (int i : t)
    if (i < 0 || i >= limit) throw std::invalid_argument("cumulant tuple index out of range");
}

inline double falling(int n, int t) {
  double r = 1.0;
  for (int i = 0; i < t; ++i) r *= (n - i);
  return r;
}

/// Unbiased per-sample estimate of E[prod_{j in sub} X_{t_j}] given only the
/// per-mode click counts. For bins, exchangeability within a mode gives
/// E[X_{b1}..X_{bt} | n] = (n)_t / (F)_t for t distinct bins of one mode.
inline double monomial(const ClickPattern& p, const Tuple& t, unsigned sub, CumulantVariable var,
                       int fanout) {
  double v = 1.0;
  if (var == CumulantVariable::kBin) {
    int j = 0;
    const int k = static_cast<int>(t.size());
    while (j < k) {
      const int mode = t[j] / fanout;
      int count = 0;
      for (; j < k && t[j] / fanout == mode; ++j)
        if (sub & (1u << j)) ++count;
      if (count) v *= falling(p[mode], count) / falling(fanout, count);
    }
    return v;
  }
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!(sub & (1u << j))) continue;
    const int n = p[t[j]];
    v *= var == CumulantVariable::kModeCount ? n : (n > 0 ? 1.0 : 0.0);
  }
  return v;
}

}  // namespace detail

/// Cumulants estimated from samples, with delete-one-group jackknife errors
/// over `blocks` contiguous sample groups.
inline CumulantTable cumulants_empirical(const SampleSet& samples, int order,
                                         const std::vector<Tuple>& tuples,
                                         CumulantVariable variable = CumulantVariable::kBin,
                                         int blocks = 20) {
  if (order < 1 || order > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order " + std::to_string(order) +
                                " outside the supported range 1.." +
                                std::to_string(kMaxCumulantOrder));
  const std::size_t n = samples.samples.size();
  if (n < 2) throw std::invalid_argument("cumulants_empirical needs at least two samples");
  const int limit =
      variable == CumulantVariable::kBin ? samples.num_modes * samples.fanout : samples.num_modes;
  for (const auto& t : tuples) detail::check_tuple(t, order, limit);
  const int g = static_cast<int>(std::min<std::size_t>(blocks, n));
  const unsigned full = (1u << order) - 1;
  CumulantTable table{order, variable, {}};
  std::vector<CumulantEntry> entries(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t ti) {
    const Tuple& t = tuples[ti];
    // Per-block sums of every monomial.
    std::vector<std::vector<double>> block_sum(g, std::vector<double>(full + 1, 0.0));
    std::vector<std::size_t> block_n(g, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = i * g / n;
      ++block_n[b];
      for (unsigned s = 1; s <= full; ++s)
        block_sum[b][s] += detail::monomial(samples.samples[i], t, s, variable, samples.fanout);
    }
    std::vector<double> total(full + 1, 0.0);
    for (int b = 0; b < g; ++b)
      for (unsigned s = 1; s <= full; ++s) total[s] += block_sum[b][s];
    std::vector<double> mu(full + 1, 1.0);
    for (unsigned s = 1; s <= full; ++s) mu[s] = total[s] / n;
    const double estimate = cumulants_from_moments(mu, order)[full];
    std::vector<double> loo(g);
    for (int b = 0; b < g; ++b) {
      const double rest = static_cast<double>(n - block_n[b]);
      for (unsigned s = 1; s <= full; ++s) mu[s] = (total[s] - block_sum[b][s]) / rest;
      loo[b] = cumulants_from_moments(mu, order)[full];
    }
    const double mean_loo = std::accumulate(loo.begin(), loo.end(), 0.0) / g;
    double ss = 0.0;
    for (double x : loo) ss += (x - mean_loo) * (x - mean_loo);
    entries[ti] = {estimate, std::sqrt((g - 1.0) / g * ss), false};
  });
  for (std::size_t i = 0; i < tuples.size(); ++i) table.entries[tuples[i]] = entries[i];
  return table;
}

/// Exact joint moment of a tuple's variables under a component set.
inline double exact_moment(const VacuumEvaluator& eval, const Tuple& t, unsigned sub,
                           CumulantVariable variable) {
  const int f = eval.fanout();
  std::vector<int> picked;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (sub & (1u << j)) picked.push_back(t[j]);
  switch (variable) {
    case CumulantVariable::kBin:
      return eval.click_moment(mask_of(picked));
    case CumulantVariable::kModeCount: {
      // Linearity plus exchangeability: E[prod n_i] = F^k E[prod X_{first bin of i}].
      BinMask first = 0;
      for (int m : picked) first |= bin_bit(m * f);
      return std::pow(static_cast<double>(f), picked.size()) * eval.click_moment(first);
    }
    case CumulantVariable::kModeClicked: {
      const unsigned k = static_cast<unsigned>(picked.size());
      CompensatedSum sum;
      for (unsigned w = 0; w < (1u << k); ++w) {
        BinMask dark = 0;
        for (unsigned j = 0; j < k; ++j)
          if (w & (1u << j)) dark |= all_bins(f) << (picked[j] * f);
        const double v = eval.vacuum(dark);
        sum.add((std::popcount(w) & 1) ? -v : v);
      }
      return sum.value();
    }
  }
  return 0.0;
}

inline CumulantTable cumulants_exact(const VacuumEvaluator& eval, int order,
                                     const std::vector<Tuple>& tuples,
                                     CumulantVariable variable = CumulantVariable::kBin) {
  if (order < 1 || order > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order " + std::to_string(order) +
                                " outside the supported range 1.." +
                                std::to_string(kMaxCumulantOrder));
  const int limit = variable == CumulantVariable::kBin ? eval.num_bins() : eval.num_modes();
  for (const auto& t : tuples) detail::check_tuple(t, order, limit);
  const unsigned full = (1u << order) - 1;
  std::vector<double> values(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t ti) {
    std::vector<double> mu(full + 1, 1.0);
    for (unsigned s = 1; s <= full; ++s) mu[s] = exact_moment(eval, tuples[ti], s, variable);
    values[ti] = cumulants_from_moments(mu, order)[full];
  });
  CumulantTable table{order, variable, {}};
  for (std::size_t i = 0; i < tuples.size(); ++i) table.entries[tuples[i]] = {values[i], 0.0, true};
  return table;
}

inline CumulantTable cumulants_exact(const GaussianComponentSet& set, int order,
                                     const std::vector<Tuple>& tuples,
                                     CumulantVariable variable = CumulantVariable::kBin) {
  return cumulants_exact(VacuumEvaluator(set), order, tuples, variable);
}

// ===========================================================================
// Correlation comparison

struct ComparisonMetrics {
  double d = 0.0;        // ||a - b|| / ||b||
  double k_slope = 0.0;  // (b . a) / (b . b)
};

/// `reference` is the ground truth; both tables must cover the same tuples.
inline ComparisonMetrics compare_correlations(const CumulantTable& a, const CumulantTable& reference) {
  if (a.entries.size() != reference.entries.size())
    throw std::invalid_argument("cumulant tables cover different tuples");
  double diff2 = 0.0, ref2 = 0.0, dot = 0.0;
  auto ia = a.entries.begin();
  for (const auto& [tuple, ref] : reference.entries) {
    if (ia->first != tuple) throw std::invalid_argument("cumulant tables cover different tuples");
    const double va = ia->second.value, vb = ref.value;
    diff2 += (va - vb) * (va - vb);
    ref2 += vb * vb;
    dot += va * vb;
    ++ia;
  }
  if (ref2 == 0.0) throw std::invalid_argument("reference cumulant vector has zero norm");
  return {std::sqrt(diff2) / std::sqrt(ref2), dot / ref2};
}

// ===========================================================================
// HOG score

struct HogResult {
  double score = 0.0;
  std::size_t wins = 0;    // P0(s) > P1(s)
  std::size_t ties = 0;
  std::size_t losses = 0;
  static constexpr std::string_view caveat =
      "HOG is spoofable: adversarial samplers can outscore the ideal device";
};

/// Fraction of samples with P0(s) > P1(s), ties counting one half.
inline HogResult hog_score(const SampleSet& samples, const VacuumEvaluator& h0,
                           const VacuumEvaluator& h1) {
  if (samples.samples.empty()) throw std::invalid_argument("hog_score: empty sample set");
  std::map<ClickPattern, int> verdict;
  HogResult r;
  for (const auto& s : samples.samples) {
    auto it = verdict.find(s);
    if (it == verdict.end()) {
      const double p0 = h0.ppnrd_probability(s), p1 = h1.ppnrd_probability(s);
      if (!(p0 > 0.0) && !(p1 > 0.0))
        throw ZeroProbability("sample has zero probability under both hypotheses", s);
      it = verdict.emplace(s, p0 > p1 ? 1 : (p0 < p1 ? -1 : 0)).first;
    }
    if (it->second > 0) ++r.wins;
    else if (it->second < 0) ++r.losses;
    else ++r.ties;
  }
  // Evaluate the smaller side directly so that swapping hypotheses gives 1 - score.
  const double n = static_cast<double>(samples.samples.size());
  const double mine = r.wins + 0.5 * r.ties, theirs = r.losses + 0.5 * r.ties;
  r.score = mine <= theirs ? mine / n : 1.0 - theirs / n;
  return r;
}

// ===========================================================================
// Click-number statistics

struct ClickStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Sample mean and unbiased standard deviation of the total click number.
inline ClickStats click_stats(const SampleSet& samples) {
  const std::size_t n = samples.samples.size();
  if (n == 0) throw std::invalid_argument("click_stats: empty sample set");
  CompensatedSum sum;
  std::vector<double> totals(n);
  for (std::size_t i = 0; i < n; ++i) {
    totals[i] = std::accumulate(samples.samples[i].begin(), samples.samples[i].end(), 0);
    sum.add(totals[i]);
  }
  ClickStats s;
  s.mean = sum.value() / n;
  if (n > 1) {
    CompensatedSum ss;
    for (double t : totals) ss.add((t - s.mean) * (t - s.mean));
    s.std_dev = std::sqrt(ss.value() / (n - 1));
  }
  return s;
}

/// Exact mean and standard deviation of a click-number distribution.
inline ClickStats click_stats(const std::vector<double>& distribution) {
  if (distribution.empty()) throw std::invalid_argument("click_stats: empty distribution");
  CompensatedSum m1, m2;
  for (std::size_t k = 0; k < distribution.size(); ++k) {
    m1.add(k * distribution[k]);
    m2.add(double(k) * k * distribution[k]);
  }
  const double mean = m1.value();
  return {mean, std::sqrt(std::max(0.0, m2.value() - mean * mean))};
}

}  // namespace gbs
