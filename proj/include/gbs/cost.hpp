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

// Exact-simulation cost model for PPNRD samples:
//
//   T(n) = 1/2 * c * M * N^3 * G^{N/2},   G = (prod_i (n_i + 1))^{1/N},
//
// with N the number of modes that clicked and c the machine's seconds per
// elementary unit. Threshold samples have G = 2.

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gbs/common.hpp"
#include "gbs/samplers.hpp"

namespace gbs {

struct CostModel {
  double c_machine = 1.0;
  int m = 1;

  void validate() const {
    if (!(c_machine > 0.0)) throw std::invalid_argument("cost model: c_machine must be > 0");
    if (m < 1) throw std::invalid_argument("cost model: m must be >= 1");
  }
};

struct GFactor {
  double g = 0.0;
  int n_clicked = 0;
  double log_g = 0.0;
};

inline GFactor g_factor(const ClickPattern& p) {
  GFactor r;
  double log_prod = 0.0;
  for (int c : p) {
    if (c < 0) throw std::invalid_argument("g_factor: negative click count");
    if (c > 0) {
      ++r.n_clicked;
      log_prod += std::log1p(static_cast<double>(c));
    }
  }
  if (r.n_clicked == 0) throw std::invalid_argument("g_factor: all-zero pattern has no G");
  r.log_g = log_prod / r.n_clicked;
  // Integer roots (every clicked count equal, e.g. binary patterns) are returned exactly.
  int common = -1;
  for (int c : p) {
    if (c == 0) continue;
    common = (common == -1 || common == c) ? c : -2;
  }
  r.g = common > 0 ? common + 1.0 : std::exp(r.log_g);
  return r;
}

struct SimulationTime {
  double seconds = 0.0;
  double log_seconds = 0.0;  // natural log, always finite
  bool overflow = false;     // seconds == +inf because exp(log_seconds) overflowed
};

inline SimulationTime simulation_time(const ClickPattern& p, const CostModel& model) {
  model.validate();
  const GFactor g = g_factor(p);
  const double n = g.n_clicked;
  SimulationTime t;
  t.log_seconds = std::log(0.5) + std::log(model.c_machine) + std::log(double(model.m)) +
                  3.0 * std::log(n) + 0.5 * n * g.log_g;
  if (t.log_seconds > std::log(std::numeric_limits<double>::max())) {
    t.seconds = std::numeric_limits<double>::infinity();
    t.overflow = true;
  } else {
    t.seconds = 0.5 * model.c_machine * model.m * n * n * n * std::pow(g.g, n / 2.0);
  }
  return t;
}

struct HeatmapCell {
  double g_low = 0.0;
  int n = 0;
  std::size_t count = 0;
};

struct ContourPoint {
  double log10_time = 0.0;
  int n = 0;
  double g = 0.0;
};

struct CostHeatmap {
  double g_min = 2.0;
  double g_width = 1.0;
  std::vector<HeatmapCell> cells;       // occupied cells, sorted by (g_low, n)
  std::vector<ContourPoint> contours;   // G(N) on lines of constant T
  std::size_t hardest_index = 0;
  ClickPattern hardest;
  SimulationTime hardest_time;
  double mean_seconds = 0.0;      // arithmetic mean of T
  double mean_log10_seconds = 0.0;
  std::size_t skipped_empty = 0;  // all-zero samples carry no cost
};

/// Bins every sample by (G, N); G bins have width (g_max - 2) / g_bins over
/// [2, F + 1]. Contour lines are emitted for each integer decade of T spanned
/// by the samples, at every N present.
inline CostHeatmap cost_heatmap(const SampleSet& samples, const CostModel& model, int g_bins = 16) {
  model.validate();
  if (samples.samples.empty()) throw std::invalid_argument("cost_heatmap: empty sample set");
  if (g_bins < 1) throw std::invalid_argument("cost_heatmap: g_bins must be >= 1");
  CostHeatmap h;
  const double g_max = std::max(2.0, samples.fanout + 1.0);
  h.g_width = g_max > 2.0 ? (g_max - 2.0) / g_bins : 1.0;
  std::map<std::pair<int, int>, std::size_t> counts;
  CompensatedSum mean_t, mean_log;
  std::size_t used = 0;
  double best = -std::numeric_limits<double>::infinity();
  int n_min = std::numeric_limits<int>::max(), n_max = 0;
  for (std::size_t i = 0; i < samples.samples.size(); ++i) {
    const auto& p = samples.samples[i];
    bool any = false;
    for (int c : p) any = any || c > 0;
    if (!any) {
      ++h.skipped_empty;
      continue;
    }
    const GFactor g = g_factor(p);
    const SimulationTime t = simulation_time(p, model);
    int gi = static_cast<int>(std::floor((g.g - 2.0) / h.g_width + 1e-9));
    gi = std::clamp(gi, 0, g_bins - 1);
    ++counts[{gi, g.n_clicked}];
    mean_t.add(t.seconds);
    mean_log.add(t.log_seconds / std::log(10.0));
    ++used;
    n_min = std::min(n_min, g.n_clicked);
    n_max = std::max(n_max, g.n_clicked);
    if (t.log_seconds > best) {
      best = t.log_seconds;
      h.hardest_index = i;
      h.hardest = p;
      h.hardest_time = t;
    }
  }
  if (used == 0) throw std::invalid_argument("cost_heatmap: every sample is all-zero");
  for (const auto& [key, count] : counts)
    h.cells.push_back({2.0 + key.first * h.g_width, key.second, count});
  h.mean_seconds = mean_t.value() / used;
  h.mean_log10_seconds = mean_log.value() / used;
  // Lines of constant T: G = (2T / (c M N^3))^{2/N}.
  const double lo = std::floor(h.mean_log10_seconds - 3), hi = std::ceil(best / std::log(10.0));
  for (double level = lo; level <= hi; level += 1.0) {
    for (int n = n_min; n <= n_max; ++n) {
      const double log_g = 2.0 / n *
                           (level * std::log(10.0) + std::log(2.0) - std::log(model.c_machine) -
                            std::log(double(model.m)) - 3.0 * std::log(double(n)));
      const double g = std::exp(log_g);
      if (g >= 2.0 && g <= g_max) h.contours.push_back({level, n, g});
    }
  }
  return h;
}

}  // namespace gbs
