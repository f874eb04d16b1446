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

// Sample files are plain text, one sample per line:
//
//   # gbsim-samples 1
//   # fingerprint 3f0c9a2d51e4b7a8
//   # sampler ground-truth
//   # seed 42
//   # modes 4
//   # fanout 2
//   # created 2026-10-16T09:30:00Z
//   0 1 2 0
//   1 0 0 0
//
// Each data line holds M space-separated click counts. Header lines are
// optional for external files; unknown header keys are ignored. The
// "created" line is informational and the only line that varies between
// otherwise identical runs.

#pragma once

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gbs/samplers.hpp"

namespace gbs {

class SampleFormatError : public std::runtime_error {
 public:
  SampleFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_samples(std::ostream& out, const SampleSet& s, bool timestamp = true) {
  out << "# gbsim-samples 1\n";
  out << "# fingerprint " << s.config_fingerprint << "\n";
  out << "# sampler " << s.sampler_id << "\n";
  out << "# seed " << s.seed << "\n";
  out << "# modes " << s.num_modes << "\n";
  out << "# fanout " << s.fanout << "\n";
  if (timestamp) out << "# created " << utc_timestamp() << "\n";
  std::string line;
  for (const auto& p : s.samples) {
    line.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) line += ' ';
      line += std::to_string(p[i]);
    }
    line += '\n';
    out << line;
  }
}

inline void write_samples(const std::string& path, const SampleSet& s, bool timestamp = true) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_samples(out, s, timestamp);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline std::uint64_t parse_u64(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw SampleFormatError(line, "expected an unsigned integer, got '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses a sample stream. `modes` / `fanout` override missing headers; when
/// both a header and an override exist they must agree.
inline SampleSet read_samples(std::istream& in, std::optional<int> modes = std::nullopt,
                              std::optional<int> fanout = std::nullopt) {
  SampleSet s;
  std::optional<int> header_modes, header_fanout;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::size_t, ClickPattern>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key, value;
      hs >> key >> value;
      if (key == "fingerprint") s.config_fingerprint = value;
      else if (key == "sampler") s.sampler_id = value;
      else if (key == "seed") s.seed = detail::parse_u64(value, lineno);
      else if (key == "modes") header_modes = static_cast<int>(detail::parse_u64(value, lineno));
      else if (key == "fanout") header_fanout = static_cast<int>(detail::parse_u64(value, lineno));
      continue;
    }
    ClickPattern p;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const auto v = detail::parse_u64(tok, lineno);
      if (v > 1024) throw SampleFormatError(lineno, "click count " + tok + " out of range");
      p.push_back(static_cast<int>(v));
    }
    rows.emplace_back(lineno, std::move(p));
  }
  auto resolve = [](std::optional<int> header, std::optional<int> given, const char* what) {
    if (header && given && *header != *given)
      throw std::invalid_argument(std::string("sample file ") + what + " " +
                                  std::to_string(*header) + " does not match expected " +
                                  std::to_string(*given));
    return header ? header : given;
  };
  const auto m = resolve(header_modes, modes, "modes");
  const auto f = resolve(header_fanout, fanout, "fanout");
  s.num_modes = m ? *m : (rows.empty() ? 0 : static_cast<int>(rows.front().second.size()));
  if (!f && !rows.empty()) throw std::invalid_argument("sample file does not declare its fan-out");
  s.fanout = f.value_or(1);
  for (auto& [ln, p] : rows) {
    if (static_cast<int>(p.size()) != s.num_modes)
      throw SampleFormatError(ln, "expected " + std::to_string(s.num_modes) + " counts, got " +
                                      std::to_string(p.size()));
    for (int c : p)
      if (c > s.fanout)
        throw SampleFormatError(ln, "click count " + std::to_string(c) + " exceeds fan-out " +
                                        std::to_string(s.fanout));
    s.samples.push_back(std::move(p));
  }
  return s;
}

inline SampleSet read_samples(const std::string& path, std::optional<int> modes = std::nullopt,
                              std::optional<int> fanout = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path + "'");
  return read_samples(in, modes, fanout);
}

/// Reads externally produced samples against a config's (M, F) and tags
/// them as "external".
inline SampleSet ingest_samples(const std::string& path, const ExperimentConfig& config) {
  SampleSet s = read_samples(path, config.num_modes, config.fanout);
  s.sampler_id = "external";
  s.num_modes = config.num_modes;
  s.fanout = config.fanout;
  return s;
}

}  // namespace gbs
