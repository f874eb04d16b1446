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

// Small experiment configurations and their Fock-space reference
// distributions, shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fock_oracle.hpp"
#include "gbs/experiment.hpp"

namespace gbs::testing {

struct SuiteInstance {
  std::string name;
  ExperimentConfig config;
};

inline ExperimentConfig make_config(int modes, int fanout, std::vector<Source> sources,
                                    std::vector<double> eta, std::uint64_t seed) {
  ExperimentConfig c;
  c.num_modes = modes;
  c.fanout = fanout;
  c.sources = std::move(sources);
  c.efficiency = std::move(eta);
  c.unitary_seed = seed;
  c.validate();
  return c;
}

/// Instances with at most 6 bins and at most 3 input photons on average.
inline std::vector<SuiteInstance> small_suite() {
  return {
      {"tmss-lossless", make_config(2, 1, {{0, 1, 0.5, 1.0}}, {1.0, 1.0}, 1)},
      {"tmss-lossy-f2", make_config(2, 2, {{0, 1, 0.5, 1.0}}, {0.7, 0.7}, 2)},
      {"tmss-f3", make_config(2, 3, {{0, 1, 0.8, 1.0}}, {0.6, 0.9}, 3)},
      {"tmss-strong-half", make_config(2, 2, {{0, 1, 1.0, 0.5}}, {0.5, 0.5}, 4)},
      {"three-mode-half", make_config(3, 2, {{0, 1, 0.7, 0.5}}, {0.8, 0.8, 0.8}, 5)},
      {"three-mode-dist", make_config(3, 2, {{1, 2, 0.6, 0.0}}, {0.9, 0.6, 0.75}, 6)},
      {"two-source-dist", make_config(4, 1, {{0, 1, 0.6, 0.0}, {2, 3, 0.4, 0.0}},
                                      {0.75, 0.75, 0.75, 0.75}, 7)},
      {"two-source-half", make_config(4, 1, {{0, 2, 0.6, 0.5}, {1, 3, 0.5, 0.5}},
                                      {0.9, 0.5, 0.7, 0.8}, 8)},
      {"two-source-ideal", make_config(4, 1, {{0, 3, 0.7, 1.0}, {1, 2, 0.5, 1.0}},
                                       {1.0, 1.0, 1.0, 1.0}, 9)},
      {"three-source-half", make_config(6, 1, {{0, 1, 0.4, 0.5}, {2, 3, 0.4, 0.5}, {4, 5, 0.3, 0.5}},
                                        {0.8, 0.8, 0.8, 0.8, 0.8, 0.8}, 10)},
  };
}

/// Instances with 7..12 bins for exhaustive normalization checks.
inline std::vector<SuiteInstance> medium_suite() {
  return {
      {"four-mode-f2", make_config(4, 2, {{0, 1, 0.6, 0.9}, {2, 3, 0.5, 0.9}}, {0.6, 0.6, 0.6, 0.6}, 11)},
      {"six-mode-f2", make_config(6, 2, {{0, 1, 0.6, 1.0}, {2, 3, 0.6, 1.0}, {4, 5, 0.6, 1.0}},
                                  {0.6, 0.6, 0.6, 0.6, 0.6, 0.6}, 12)},
      {"three-mode-f4", make_config(3, 4, {{0, 2, 0.9, 0.7}}, {0.7, 0.7, 0.7}, 13)},
      {"twelve-mode", make_config(12, 1, {{0, 1, 0.5, 0.962}, {2, 3, 0.5, 0.962}, {4, 5, 0.5, 0.962},
                                          {6, 7, 0.5, 0.962}, {8, 9, 0.5, 0.962}, {10, 11, 0.5, 0.962}},
                                  std::vector<double>(12, 0.5), 14)},
  };
}

/// Photon-number distributions (before loss) of the independent parts of the
/// ground-truth state: the indistinguishable share of every source
/// interferes, each source's distinguishable remainder propagates on its own
/// internal label.
inline std::vector<oracle::NumberDistribution> fock_parts(const ExperimentConfig& c) {
  const Eigen::MatrixXcd u = c.resolved_unitary();
  std::vector<oracle::PairSource> shared;
  std::vector<std::vector<oracle::PairSource>> residual;
  for (const auto& s : c.sources) {
    const double r = s.squeezing * c.power_scale;
    const double n = std::sinh(r) * std::sinh(r);
    const double nc = s.indistinguishability * n, nd = (1.0 - s.indistinguishability) * n;
    if (nc > 0) shared.push_back({s.mode_a, s.mode_b, std::asinh(std::sqrt(nc))});
    if (nd > 0) residual.push_back({{s.mode_a, s.mode_b, std::asinh(std::sqrt(nd))}});
  }
  std::vector<oracle::NumberDistribution> parts;
  const double tol = 1e-10;
  if (!shared.empty()) parts.push_back(oracle::pure_number_distribution(c.num_modes, shared, u, tol));
  for (const auto& r : residual) parts.push_back(oracle::pure_number_distribution(c.num_modes, r, u, tol));
  if (parts.empty()) parts.push_back({{0, 1.0}});
  return parts;
}

/// Joint photon-number distribution of all parts (convolution).
inline oracle::NumberDistribution fock_photon_distribution(const ExperimentConfig& c) {
  oracle::NumberDistribution dist{{0, 1.0}};
  for (const auto& p : fock_parts(c)) dist = oracle::convolve(dist, p);
  return dist;
}

/// Threshold distribution over bins, bit b = mode * F + f.
inline std::vector<double> fock_bin_distribution(const ExperimentConfig& c) {
  return oracle::bin_click_distribution(fock_parts(c), c.num_modes, c.efficiency, c.fanout);
}

/// Aggregates a bin distribution into per-mode click counts.
inline std::map<std::vector<int>, double> collapse_to_counts(const std::vector<double>& bins, int modes,
                                                             int fanout) {
  std::map<std::vector<int>, double> out;
  for (std::size_t mask = 0; mask < bins.size(); ++mask) {
    std::vector<int> counts(modes, 0);
    for (int m = 0; m < modes; ++m)
      for (int f = 0; f < fanout; ++f) counts[m] += (mask >> (m * fanout + f)) & 1;
    out[counts] += bins[mask];
  }
  return out;
}

}  // namespace gbs::testing
