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

// gbsim command-line driver.
//
// Every subcommand writes its outputs next to --out and finishes with a
// manifest at <out>.manifest.json. Files are staged as <path>.partial and
// renamed only after the whole command succeeds, so a failed run leaves
// nothing behind. Exit status: 0 success, 1 runtime error, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbs/gbs.hpp"

namespace {

using gbs::format_double;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Staged output files; uncommitted ones are removed on destruction.
class Outputs {
 public:
  ~Outputs() {
    for (const auto& p : staged_) std::remove((p + ".partial").c_str());
  }

  std::ofstream open(const std::string& path) {
    if (std::find(staged_.begin(), staged_.end(), path) != staged_.end())
      throw std::logic_error("output '" + path + "' opened twice");
    staged_.push_back(path);
    std::ofstream out(path + ".partial");
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
  }

  void commit() {
    for (const auto& p : staged_) std::filesystem::rename(p + ".partial", p);
    committed_ = staged_;
    staged_.clear();
  }

  const std::vector<std::string>& paths() const { return staged_.empty() ? committed_ : staged_; }

 private:
  std::vector<std::string> staged_, committed_;
};

struct Common {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
};

void finish(Outputs& outputs, const std::string& subcommand, const std::string& out,
            const std::string& fingerprint, std::uint64_t seed, const std::string& started,
            const std::vector<std::string>& argv) {
  nlohmann::json m;
  m["tool"] = "gbsim";
  m["version"] = gbs::kVersion;
  m["subcommand"] = subcommand;
  m["config_fingerprint"] = fingerprint;
  m["seed"] = seed;
  m["arguments"] = argv;
  m["started"] = started;
  m["finished"] = gbs::utc_timestamp();
  std::vector<std::string> files = outputs.paths();
  m["outputs"] = files;
  {
    auto f = outputs.open(out + ".manifest.json");
    f << m.dump(2) << "\n";
  }
  outputs.commit();
}

gbs::SampleSet load_checked_samples(const std::string& path, const gbs::ExperimentConfig& config,
                                    bool override_fingerprint) {
  gbs::SampleSet s = gbs::read_samples(path, config.num_modes, config.fanout);
  const std::string fp = gbs::fingerprint(config);
  if (s.config_fingerprint != fp && !override_fingerprint)
    throw UsageError("sample file fingerprint '" + s.config_fingerprint +
                     "' does not match config fingerprint '" + fp +
                     "' (pass --override-fingerprint for external samples)");
  return s;
}

gbs::Hypothesis likelihood_hypothesis(const std::string& name) {
  const gbs::Hypothesis h = gbs::parse_hypothesis(name);
  if (h == gbs::Hypothesis::kCoherent)
    throw UsageError(
        "the coherent mockup is a phase-randomized mixture without a closed-form pattern "
        "probability; use it with 'sample' only");
  return h;
}

std::string join(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string sampler;
  std::size_t n = 0;
};

void cmd_sample(const Common& c, const SampleArgs& a, const std::vector<std::string>& argv) {
  const std::string started = gbs::utc_timestamp();
  const auto config = gbs::load_config(c.config_path);
  const auto set = gbs::sample(config, a.sampler, a.n, c.seed);
  Outputs outputs;
  {
    auto f = outputs.open(c.out);
    gbs::write_samples(f, set, true);
    if (!f) throw std::runtime_error("write to '" + c.out + "' failed");
  }
  finish(outputs, "sample", c.out, set.config_fingerprint, c.seed, started, argv);
  std::cout << "sampled " << set.samples.size() << " patterns with " << a.sampler << " (seed "
            << c.seed << ") -> " << c.out << "\n";
}

// --- prob -------------------------------------------------------------------

struct ProbArgs {
  std::vector<std::string> patterns;
  std::string samples;
  std::string hypothesis = "ground-truth";
  bool click_numbers = false;
};

gbs::ClickPattern parse_pattern(const std::string& text) {
  gbs::ClickPattern p;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    for (char& ch : tok)
      if (ch == ',') ch = ' ';
    std::istringstream parts(tok);
    int v;
    while (parts >> v) p.push_back(v);
    if (!parts.eof()) throw UsageError("cannot parse pattern '" + text + "'");
  }
  return p;
}

void cmd_prob(const Common& c, const ProbArgs& a, const std::vector<std::string>& argv) {
  const std::string started = gbs::utc_timestamp();
  const auto config = gbs::load_config(c.config_path);
  const auto h = likelihood_hypothesis(a.hypothesis);
  const gbs::VacuumEvaluator eval(gbs::build_components(config, h));
  std::vector<gbs::ClickPattern> patterns;
  for (const auto& t : a.patterns) patterns.push_back(parse_pattern(t));
  if (!a.samples.empty()) {
    std::set<gbs::ClickPattern> seen;
    for (auto& p : gbs::read_samples(a.samples, config.num_modes, config.fanout).samples)
      if (seen.insert(p).second) patterns.push_back(std::move(p));
  }
  if (patterns.empty() && !a.click_numbers)
    throw UsageError("nothing to evaluate: give --pattern, --samples or --click-numbers");
  for (const auto& p : patterns) eval.check_pattern(p);

  Outputs outputs;
  {
    auto f = outputs.open(c.out);
    f << "# gbsim probabilities\n";
    f << "# fingerprint " << gbs::fingerprint(config) << "\n";
    f << "# hypothesis " << gbs::to_string(h) << "\n";
    if (!patterns.empty()) {
      f << "pattern\tprobability\tlog_probability\n";
      for (const auto& p : patterns) {
        const double prob = eval.ppnrd_probability(p);
        f << join(p, ',') << "\t" << format_double(prob) << "\t" << format_double(std::log(prob))
          << "\n";
      }
    }
    if (a.click_numbers) {
      const auto dist = gbs::click_number_distribution_exact(eval);
      f << "clicks\tprobability\n";
      for (std::size_t k = 0; k < dist.size(); ++k) f << k << "\t" << format_double(dist[k]) << "\n";
    }
  }
  finish(outputs, "prob", c.out, gbs::fingerprint(config), c.seed, started, argv);
  std::cout << "evaluated " << patterns.size() << " patterns under " << gbs::to_string(h) << " -> "
            << c.out << "\n";
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string samples;
  std::string test;
  std::string hypothesis = "thermal";
  int order = 2;
  std::string variable = "bin";
  std::vector<int> sizes;
  std::vector<int> n_condition;
  std::size_t subsets = 20;
  bool override_fingerprint = false;
};

void write_header(std::ostream& f, const std::string& title, const gbs::ExperimentConfig& config,
                  const gbs::SampleSet& s) {
  f << "# gbsim " << title << "\n";
  f << "# config_fingerprint " << gbs::fingerprint(config) << "\n";
  f << "# samples_fingerprint " << s.config_fingerprint << "\n";
  f << "# sampler " << s.sampler_id << "\n";
  f << "# sample_seed " << s.seed << "\n";
  f << "# n_samples " << s.samples.size() << "\n";
}

std::string validate_bayes(std::ostream& f, const Common& c, const ValidateArgs& a,
                           const gbs::ExperimentConfig& config, const gbs::SampleSet& s) {
  const auto h1 = likelihood_hypothesis(a.hypothesis);
  const auto gt = gbs::build_components(config, gbs::Hypothesis::kGroundTruth);
  const auto alt = gbs::build_components(config, h1);
  std::vector<int> sizes = a.sizes.empty() ? std::vector<int>{config.num_modes} : a.sizes;
  for (int size : sizes)
    if (size < 1 || size > config.num_modes)
      throw UsageError("subsystem size " + std::to_string(size) + " outside 1.." +
                       std::to_string(config.num_modes));
  const auto rows = gbs::bayesian_subsystem_sweep(s, gt, alt, sizes, a.n_condition, a.subsets, c.seed);
  write_header(f, "bayes report", config, s);
  f << "# h0 ground-truth\n# h1 " << gbs::to_string(h1) << "\n";
  f << "# click numbers are those of the subsystem; n=all pools every n >= 1\n";
  f << "# subset_seed " << c.seed << "\n";
  f << "size\tn\tsubsets\tsamples\tmean_delta_h\tstd_error\n";
  for (const auto& r : rows) {
    f << r.size << "\t" << (r.click_number ? std::to_string(*r.click_number) : "all") << "\t"
      << r.subsets << "\t" << r.samples << "\t" << format_double(r.mean_delta_h) << "\t"
      << format_double(r.std_error) << "\n";
  }
  f << "\n# per-subset scores\nsize\tn\tsubset\tsamples\tdelta_h\tstd_error\n";
  for (const auto& r : rows)
    for (const auto& b : r.per_subset)
      f << r.size << "\t" << (b.click_number ? std::to_string(*b.click_number) : "all") << "\t"
        << join(b.subsystem, ',') << "\t" << b.n_samples << "\t" << format_double(b.delta_h) << "\t"
        << format_double(b.std_error) << "\n";
  const auto& last = rows.back();
  std::ostringstream summary;
  summary << "bayes ground-truth vs " << gbs::to_string(h1) << " (size " << last.size << ", n="
          << (last.click_number ? std::to_string(*last.click_number) : "all")
          << "): delta_h = " << format_double(last.mean_delta_h) << " +/- "
          << format_double(last.std_error);
  return summary.str();
}

std::string validate_cumulants(std::ostream& f, const ValidateArgs& a,
                               const gbs::ExperimentConfig& config, const gbs::SampleSet& s) {
  const auto variable = gbs::parse_cumulant_variable(a.variable);
  const auto tuples = variable == gbs::CumulantVariable::kBin
                          ? gbs::first_bin_tuples(config.num_modes, config.fanout, a.order)
                          : gbs::all_tuples(gbs::all_modes(config.num_modes), a.order);
  if (tuples.empty()) throw UsageError("no tuples of order " + std::to_string(a.order));
  const auto emp = gbs::cumulants_empirical(s, a.order, tuples, variable);
  const gbs::VacuumEvaluator gt(gbs::build_components(config, gbs::Hypothesis::kGroundTruth));
  const auto exact = gbs::cumulants_exact(gt, a.order, tuples, variable);
  const auto metrics = gbs::compare_correlations(emp, exact);
  write_header(f, "cumulant report", config, s);
  f << "# order " << a.order << "\n# variable " << gbs::to_string(variable) << "\n";
  if (variable == gbs::CumulantVariable::kBin) f << "# tuples over the first bin of every mode\n";
  f << "# reference ground-truth (exact)\n";
  f << "# D " << format_double(metrics.d) << "\n# K " << format_double(metrics.k_slope) << "\n";
  f << "tuple\tempirical\tstd_error\texact\tz\n";
  for (const auto& [t, e] : emp.entries) {
    const double x = exact.entries.at(t).value;
    const double z = e.std_error > 0 ? (e.value - x) / e.std_error : 0.0;
    f << join(t, ',') << "\t" << format_double(e.value) << "\t" << format_double(e.std_error) << "\t"
      << format_double(x) << "\t" << format_double(z) << "\n";
  }
  std::ostringstream summary;
  summary << "cumulants order " << a.order << " (" << gbs::to_string(variable)
          << ") vs ground truth: D = " << format_double(metrics.d)
          << ", K = " << format_double(metrics.k_slope);
  return summary.str();
}

std::string validate_hog(std::ostream& f, const ValidateArgs& a, const gbs::ExperimentConfig& config,
                         const gbs::SampleSet& s) {
  const auto h1 = likelihood_hypothesis(a.hypothesis);
  const gbs::VacuumEvaluator gt(gbs::build_components(config, gbs::Hypothesis::kGroundTruth));
  const gbs::VacuumEvaluator alt(gbs::build_components(config, h1));
  const auto r = gbs::hog_score(s, gt, alt);
  write_header(f, "hog report", config, s);
  f << "# h0 ground-truth\n# h1 " << gbs::to_string(h1) << "\n";
  f << "# caveat " << gbs::HogResult::caveat << "\n";
  f << "score\twins\tties\tlosses\n";
  f << format_double(r.score) << "\t" << r.wins << "\t" << r.ties << "\t" << r.losses << "\n";
  return "hog ground-truth vs " + std::string(gbs::to_string(h1)) + ": " + format_double(r.score) +
         " (spoofable; see report caveat)";
}

std::string validate_clickstats(std::ostream& f, const gbs::ExperimentConfig& config,
                                const gbs::SampleSet& s) {
  const auto emp = gbs::click_stats(s);
  const int max_clicks = config.num_modes * config.fanout;
  std::vector<std::size_t> hist(max_clicks + 1, 0);
  for (const auto& p : s.samples) ++hist[std::accumulate(p.begin(), p.end(), 0)];
  write_header(f, "click statistics", config, s);
  std::vector<std::pair<std::string, std::vector<double>>> exact;
  if (max_clicks <= 24) {
    for (auto h : {gbs::Hypothesis::kGroundTruth, gbs::Hypothesis::kSquashed, gbs::Hypothesis::kThermal})
      exact.emplace_back(std::string(gbs::to_string(h)),
                         gbs::click_number_distribution_exact(gbs::build_components(config, h)));
  } else {
    f << "# exact distributions omitted: more than 24 bins\n";
  }
  f << "source\tmean\tstd_dev\n";
  f << "samples\t" << format_double(emp.mean) << "\t" << format_double(emp.std_dev) << "\n";
  for (const auto& [name, dist] : exact) {
    const auto st = gbs::click_stats(dist);
    f << name << "\t" << format_double(st.mean) << "\t" << format_double(st.std_dev) << "\n";
  }
  f << "\nclicks\tcount\tfrequency";
  for (const auto& [name, dist] : exact) f << "\t" << name;
  f << "\n";
  for (int k = 0; k <= max_clicks; ++k) {
    f << k << "\t" << hist[k] << "\t" << format_double(double(hist[k]) / s.samples.size());
    for (const auto& [name, dist] : exact) f << "\t" << format_double(dist[k]);
    f << "\n";
  }
  return "click number: mean " + format_double(emp.mean) + ", std " + format_double(emp.std_dev);
}

void cmd_validate(const Common& c, const ValidateArgs& a, const std::vector<std::string>& argv) {
  const std::string started = gbs::utc_timestamp();
  if (a.test == "cumulants" && (a.order < 1 || a.order > gbs::kMaxCumulantOrder))
    throw UsageError("cumulant order " + std::to_string(a.order) + " outside the supported range 1.." +
                     std::to_string(gbs::kMaxCumulantOrder));
  const auto config = gbs::load_config(c.config_path);
  const auto samples = load_checked_samples(a.samples, config, a.override_fingerprint);
  if (samples.samples.empty()) throw std::runtime_error("sample file holds no samples");
  Outputs outputs;
  std::string summary;
  {
    auto f = outputs.open(c.out);
    if (a.test == "bayes") summary = validate_bayes(f, c, a, config, samples);
    else if (a.test == "cumulants") summary = validate_cumulants(f, a, config, samples);
    else if (a.test == "hog") summary = validate_hog(f, a, config, samples);
    else summary = validate_clickstats(f, config, samples);
    if (!f) throw std::runtime_error("write to '" + c.out + "' failed");
  }
  finish(outputs, "validate", c.out, gbs::fingerprint(config), c.seed, started, argv);
  std::cout << summary << "\n";
}

// --- cost -------------------------------------------------------------------

struct CostArgs {
  std::string samples;
  double c_machine = 1.0;
  bool c_given = false;
  int m = 0;
  int g_bins = 16;
};

void cmd_cost(const Common& c, const CostArgs& a, const std::vector<std::string>& argv) {
  const std::string started = gbs::utc_timestamp();
  if (!a.c_given)
    std::cerr << "warning: --c-machine not given; assuming 1.0 second per elementary unit\n";
  const auto s = gbs::read_samples(a.samples);
  if (s.samples.empty()) throw std::runtime_error("sample file holds no samples");
  const gbs::CostModel model{a.c_machine, a.m > 0 ? a.m : s.num_modes};
  const auto h = gbs::cost_heatmap(s, model, a.g_bins);
  Outputs outputs;
  {
    auto f = outputs.open(c.out);
    f << "# gbsim cost heat map\n";
    f << "# samples_fingerprint " << s.config_fingerprint << "\n";
    f << "# c_machine " << format_double(model.c_machine) << (a.c_given ? "" : " (default)") << "\n";
    f << "# m " << model.m << "\n";
    f << "# g_bin_width " << format_double(h.g_width) << "\n";
    f << "# mean_seconds " << format_double(h.mean_seconds) << "\n";
    f << "# mean_log10_seconds " << format_double(h.mean_log10_seconds) << "\n";
    f << "# hardest_index " << h.hardest_index << "\n";
    f << "# hardest_pattern " << join(h.hardest, ',') << "\n";
    f << "# hardest_log10_seconds " << format_double(h.hardest_time.log_seconds / std::log(10.0))
      << "\n";
    f << "# skipped_empty " << h.skipped_empty << "\n";
    f << "g_bin_low\tn\tcount\n";
    for (const auto& cell : h.cells)
      f << format_double(cell.g_low) << "\t" << cell.n << "\t" << cell.count << "\n";
  }
  {
    auto f = outputs.open(c.out + ".contours");
    f << "# lines of constant simulation time: G(N) = (2 T / (c M N^3))^(2 / N)\n";
    f << "log10_seconds\tn\tg\n";
    for (const auto& p : h.contours)
      f << format_double(p.log10_time) << "\t" << p.n << "\t" << format_double(p.g) << "\n";
  }
  finish(outputs, "cost", c.out, s.config_fingerprint, c.seed, started, argv);
  std::cout << "mean T = " << format_double(h.mean_seconds) << " s, mean log10 T = "
            << format_double(h.mean_log10_seconds) << ", hardest log10 T = "
            << format_double(h.hardest_time.log_seconds / std::log(10.0))
            << " (c_machine = " << format_double(model.c_machine) << ")\n";
}

// --- ingest -----------------------------------------------------------------

void cmd_ingest(const Common& c, const std::string& input, const std::vector<std::string>& argv) {
  const std::string started = gbs::utc_timestamp();
  const auto config = gbs::load_config(c.config_path);
  auto s = gbs::ingest_samples(input, config);
  s.config_fingerprint = gbs::fingerprint(config);
  s.seed = 0;
  Outputs outputs;
  {
    auto f = outputs.open(c.out);
    gbs::write_samples(f, s, true);
  }
  finish(outputs, "ingest", c.out, s.config_fingerprint, 0, started, argv);
  std::cout << "ingested " << s.samples.size() << " external samples -> " << c.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gbsim: Gaussian boson sampling with pseudo-photon-number-resolving detection"};
  app.set_version_flag("--version", std::string(gbs::kVersion));
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 1024));

  auto add_common = [&](CLI::App* sub, bool config, bool seed) {
    if (config) sub->add_option("--config", common.config_path, "Experiment config (JSON)")->required();
    if (seed) sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--out", common.out, "Output file")->required();
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1, 1024));
  };

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Draw samples from a sampler");
  add_common(sample, true, true);
  sample->add_option("--sampler", sample_args.sampler, "Sampler id")
      ->required()
      ->check(CLI::IsMember(gbs::sampler_ids()));
  sample->add_option("--n", sample_args.n, "Number of samples")->required();

  ProbArgs prob_args;
  auto* prob = app.add_subcommand("prob", "Exact pattern probabilities");
  add_common(prob, true, false);
  prob->add_option("--pattern", prob_args.patterns, "Click counts, e.g. \"0,1,2\"");
  prob->add_option("--samples", prob_args.samples, "Evaluate every distinct pattern of a sample file");
  prob->add_option("--hypothesis", prob_args.hypothesis, "ground-truth | thermal | squashed");
  prob->add_flag("--click-numbers", prob_args.click_numbers, "Also write the exact click-number distribution");

  ValidateArgs val_args;
  auto* validate = app.add_subcommand("validate", "Run a validation test on samples");
  add_common(validate, true, true);
  validate->add_option("--samples", val_args.samples, "Sample file")->required();
  validate->add_option("--test", val_args.test, "bayes | cumulants | hog | clickstats")
      ->required()
      ->check(CLI::IsMember({"bayes", "cumulants", "hog", "clickstats"}));
  validate->add_option("--hypothesis", val_args.hypothesis, "Alternative hypothesis (default thermal)");
  validate->add_option("--order", val_args.order, "Cumulant order (1..4)");
  validate->add_option("--variable", val_args.variable, "bin | mode-clicked | mode-count")
      ->check(CLI::IsMember({"bin", "mode-clicked", "mode-count"}));
  validate->add_option("--subsystem-sizes", val_args.sizes, "Subsystem sizes for bayes")->delimiter(',');
  validate->add_option("--n-condition", val_args.n_condition, "Click numbers to condition on")
      ->delimiter(',');
  validate->add_option("--subsets", val_args.subsets, "Random subsets per size");
  validate->add_flag("--override-fingerprint", val_args.override_fingerprint,
                     "Accept samples whose fingerprint differs from the config");

  CostArgs cost_args;
  auto* cost = app.add_subcommand("cost", "Classical simulation cost heat map");
  add_common(cost, false, false);
  cost->add_option("--samples", cost_args.samples, "Sample file")->required();
  auto* c_opt = cost->add_option("--c-machine", cost_args.c_machine, "Seconds per elementary unit");
  cost->add_option("--m", cost_args.m, "Mode count M in the cost formula (default: from samples)");
  cost->add_option("--g-bins", cost_args.g_bins, "Number of G bins")->check(CLI::Range(1, 1000));

  std::string ingest_input;
  auto* ingest = app.add_subcommand("ingest", "Import external samples against a config");
  add_common(ingest, true, false);
  ingest->add_option("--input", ingest_input, "External sample file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cost_args.c_given = c_opt->count() > 0;
  gbs::set_num_threads(common.threads);
  const std::vector<std::string> args(argv + 1, argv + argc);

  try {
    if (*sample) cmd_sample(common, sample_args, args);
    else if (*prob) cmd_prob(common, prob_args, args);
    else if (*validate) cmd_validate(common, val_args, args);
    else if (*cost) cmd_cost(common, cost_args, args);
    else if (*ingest) cmd_ingest(common, ingest_input, args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
