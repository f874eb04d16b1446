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

// JSON schema for ExperimentConfig:
//
//   {
//     "num_modes": 10,
//     "fanout": 2,
//     "power_scale": 1.0,
//     "efficiency": 0.6,                      // scalar or one value per mode
//     "sources": [
//       {"modes": [0, 1], "squeezing": 0.6, "indistinguishability": 0.962}
//     ],
//     "unitary": {"seed": 7}                  // or {"matrix": "<re im re im ...>"}
//   }
//
// An explicit matrix is row-major text of interleaved real and imaginary
// parts. Serialization always writes efficiency as an array and numbers in
// round-trip precision, so the canonical dump is a stable fingerprint input.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "gbs/experiment.hpp"

namespace gbs {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string unitary_to_text(const ComplexMatrix& u) {
  std::string out;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      if (!out.empty()) out += ' ';
      out += format_double(u(i, j).real());
      out += ' ';
      out += format_double(u(i, j).imag());
    }
  }
  return out;
}

inline ComplexMatrix unitary_from_text(const std::string& text, int m) {
  std::istringstream in(text);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    double x = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw std::invalid_argument("config: bad number '" + tok + "' in unitary matrix");
    v.push_back(x);
  }
  if (v.size() != static_cast<std::size_t>(2 * m * m))
    throw std::invalid_argument("config: unitary matrix needs 2*M*M numbers");
  ComplexMatrix u(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) u(i, j) = Complex(v[2 * (i * m + j)], v[2 * (i * m + j) + 1]);
  return u;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["num_modes"] = c.num_modes;
  j["fanout"] = c.fanout;
  j["power_scale"] = c.power_scale;
  j["efficiency"] = c.efficiency;
  auto sources = nlohmann::json::array();
  for (const auto& s : c.sources)
    sources.push_back({{"modes", {s.mode_a, s.mode_b}},
                       {"squeezing", s.squeezing},
                       {"indistinguishability", s.indistinguishability}});
  j["sources"] = sources;
  if (c.unitary) {
    j["unitary"] = {{"matrix", unitary_to_text(*c.unitary)}};
  } else {
    j["unitary"] = {{"seed", c.unitary_seed}};
  }
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.num_modes = j.at("num_modes").get<int>();
    c.fanout = j.value("fanout", 1);
    c.power_scale = j.value("power_scale", 1.0);
    const auto& eff = j.at("efficiency");
    if (eff.is_number()) {
      c.efficiency.assign(c.num_modes, eff.get<double>());
    } else {
      c.efficiency = eff.get<std::vector<double>>();
    }
    for (const auto& s : j.at("sources")) {
      Source src;
      const auto modes = s.at("modes").get<std::vector<int>>();
      if (modes.size() != 2) throw std::invalid_argument("config: a source needs exactly two modes");
      src.mode_a = modes[0];
      src.mode_b = modes[1];
      src.squeezing = s.at("squeezing").get<double>();
      src.indistinguishability = s.value("indistinguishability", 1.0);
      c.sources.push_back(src);
    }
    if (j.contains("unitary")) {
      const auto& u = j.at("unitary");
      if (u.contains("matrix")) {
        c.unitary = unitary_from_text(u.at("matrix").get<std::string>(), c.num_modes);
      } else {
        c.unitary_seed = u.at("seed").get<std::uint64_t>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Content hash of the canonical JSON form, as 16 hex digits.
inline std::string fingerprint(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

}  // namespace gbs
