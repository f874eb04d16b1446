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

#include "gbs/sample_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "oracle_suite.hpp"

namespace gbs {
namespace {

SampleSet small_set() {
  return {"0123456789abcdef", "ground-truth", 42, 3, 2, {{0, 1, 2}, {2, 2, 0}, {0, 0, 0}}};
}

TEST(SampleIo, RoundTripIsBitExact) {
  std::ostringstream out;
  write_samples(out, small_set(), false);
  std::istringstream in(out.str());
  const auto back = read_samples(in);
  EXPECT_EQ(back.config_fingerprint, "0123456789abcdef");
  EXPECT_EQ(back.sampler_id, "ground-truth");
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.num_modes, 3);
  EXPECT_EQ(back.fanout, 2);
  EXPECT_EQ(back.samples, small_set().samples);
  std::ostringstream again;
  write_samples(again, back, false);
  EXPECT_EQ(again.str(), out.str());
}

TEST(SampleIo, TimestampIsTheOnlyExtraLine) {
  std::ostringstream with, without;
  write_samples(with, small_set(), true);
  write_samples(without, small_set(), false);
  std::string text = with.str();
  const auto pos = text.find("# created ");
  ASSERT_NE(pos, std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  EXPECT_EQ(text, without.str());
}

TEST(SampleIo, EmptySetKeepsHeader) {
  SampleSet s = small_set();
  s.samples.clear();
  std::ostringstream out;
  write_samples(out, s, false);
  std::istringstream in(out.str());
  const auto back = read_samples(in);
  EXPECT_TRUE(back.samples.empty());
  EXPECT_EQ(back.num_modes, 3);
}

TEST(SampleIo, HeaderlessWithOverrides) {
  std::istringstream in("1 0\n0 1\n\n2 1\n");
  const auto s = read_samples(in, 2, 2);
  EXPECT_EQ(s.samples.size(), 3u);
  EXPECT_EQ(s.samples[2], (ClickPattern{2, 1}));
}

TEST(SampleIo, Errors) {
  {
    std::istringstream in("# modes 2\n# fanout 1\n1 0\n1 x\n");
    try {
      read_samples(in);
      FAIL();
    } catch (const SampleFormatError& e) {
      EXPECT_EQ(e.line(), 4u);
    }
  }
  {
    std::istringstream in("# modes 2\n# fanout 1\n1 0 1\n");
    EXPECT_THROW(read_samples(in), SampleFormatError);
  }
  {
    std::istringstream in("# modes 2\n# fanout 1\n2 0\n");
    EXPECT_THROW(read_samples(in), SampleFormatError);
  }
  {
    std::istringstream in("# modes 2\n# fanout 1\n-1 0\n");
    EXPECT_THROW(read_samples(in), SampleFormatError);
  }
  {
    std::istringstream in("# modes 2\n1 0\n");
    EXPECT_THROW(read_samples(in), std::invalid_argument);  // fan-out unknown
  }
  {
    std::istringstream in("# modes 3\n# fanout 1\n");
    EXPECT_THROW(read_samples(in, 2, 1), std::invalid_argument);  // header vs expectation
  }
  EXPECT_THROW(read_samples(std::string("/nonexistent/samples.txt")), std::runtime_error);
}

TEST(SampleIo, IngestChecksShapeAndTags) {
  const auto c = testing::make_config(3, 2, {{0, 1, 0.5, 1.0}}, {1, 1, 1}, 1);
  const auto path = (std::filesystem::temp_directory_path() / "gbsim_ingest_test.txt").string();
  {
    std::ofstream out(path);
    out << "0 1 2\n1 1 0\n";
  }
  const auto s = ingest_samples(path, c);
  EXPECT_EQ(s.sampler_id, "external");
  EXPECT_EQ(s.samples.size(), 2u);
  {
    std::ofstream out(path);
    out << "0 1\n";
  }
  EXPECT_THROW(ingest_samples(path, c), SampleFormatError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace gbs
