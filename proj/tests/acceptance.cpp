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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to
// run a subset, e.g. `acceptance 5 6`.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gbs/gbs.hpp"
#include "oracle_suite.hpp"

namespace {

using namespace gbs;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1 ----------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_norm = 1.0;
  std::size_t patterns = 0;
  std::string worst_name;
  for (const auto& inst : testing::small_suite()) {
    const auto& c = inst.config;
    const auto parts = testing::fock_parts(c);
    double norm = 1.0;
    for (const auto& part : parts) {
      double sum = 0.0;
      for (const auto& [k, p] : part) sum += p;
      norm *= sum;
    }
    worst_norm = std::min(worst_norm, norm);
    const auto counts = testing::collapse_to_counts(
        oracle::bin_click_distribution(parts, c.num_modes, c.efficiency, c.fanout), c.num_modes,
        c.fanout);
    const VacuumEvaluator eval(build_components(c, Hypothesis::kGroundTruth));
    for (const auto& [pattern, p_fock] : counts) {
      const double err = std::abs(eval.ppnrd_probability(pattern) - p_fock);
      ++patterns;
      if (err > worst) {
        worst = err;
        worst_name = inst.name;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-6 && worst_norm >= 1 - 1e-9 && elapsed < 300,
          std::to_string(patterns) + " patterns, max |diff| " + fmt(worst) + " (" + worst_name +
              "), min Fock norm " + fmt(worst_norm, 12) + ", " + fmt(elapsed, 3) + " s"};
}

// --- 2 ----------------------------------------------------------------------

Outcome normalization() {
  double worst = 0.0;
  std::size_t count = 0;
  auto suite = testing::small_suite();
  for (auto& i : testing::medium_suite()) suite.push_back(i);
  for (const auto& inst : suite) {
    const VacuumEvaluator eval(build_components(inst.config, Hypothesis::kGroundTruth));
    if (eval.num_bins() > 12) continue;
    CompensatedSum total;
    for (BinMask m = 0; m < (BinMask{1} << eval.num_bins()); ++m) total.add(eval.threshold_probability(m));
    worst = std::max(worst, std::abs(total.value() - 1.0));
    ++count;
  }
  return {worst <= 1e-9, std::to_string(count) + " instances, max |sum - 1| " + fmt(worst)};
}

// --- 3 ----------------------------------------------------------------------

Outcome closed_forms() {
  double worst = 0.0;
  for (double r : {0.5, 1.0, 1.5}) {
    const GaussianComponentSet sq({squeezed_vacuum(r)}, {"squeezed"});
    const std::vector<int> bin0{0};
    worst = std::max(worst, std::abs(vacuum_probability(sq, bin0) - 1.0 / std::cosh(r)));
    const GaussianComponentSet pair({tmss(r)}, {"tmss"});
    const double c = std::cosh(r);
    worst = std::max(worst, std::abs(vacuum_probability(pair, bin0) - 1.0 / (c * c)));
  }
  return {worst <= 1e-12, "max |diff| " + fmt(worst)};
}

// --- 4 ----------------------------------------------------------------------

Outcome squashed_matching() {
  double worst = 0.0;
  for (double r : {0.2, 0.5, 0.8, 1.1, 1.4}) {
    for (double eta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      const double lossy = apply_loss(squeezed_vacuum(r), eta).mean_photon_number();
      const double squashed = squashed_state(lossy).mean_photon_number();
      worst = std::max(worst, std::abs(squashed - lossy));
    }
  }
  return {worst <= 1e-12, "25 grid points, max |diff| " + fmt(worst)};
}

// --- 5, 6, 7 ----------------------------------------------------------------

ExperimentConfig ten_mode(double power_scale = 1.0) {
  auto c = testing::make_config(10, 2,
                                {{0, 1, 0.6, 1.0}, {2, 3, 0.6, 1.0}, {4, 5, 0.6, 1.0},
                                 {6, 7, 0.6, 1.0}, {8, 9, 0.6, 1.0}},
                                std::vector<double>(10, 0.6), 2026);
  c.power_scale = power_scale;
  return c;
}

const SampleSet& ten_mode_samples() {
  static const SampleSet s = sample(ten_mode(), "ground-truth", 50000, 11);
  return s;
}

Outcome bayesian_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = ten_mode();
  const auto& s = ten_mode_samples();
  const auto modes = all_modes(10);
  const SubsystemModel gt(build_components(c, Hypothesis::kGroundTruth), modes);
  const SubsystemModel th(build_components(c, Hypothesis::kThermal), modes);
  const SubsystemModel sq(build_components(c, Hypothesis::kSquashed), modes);
  const auto vs_th = bayesian_score_pooled(s, gt, th);
  const auto vs_sq = bayesian_score_pooled(s, gt, sq);
  const double elapsed = seconds_since(t0);
  const bool pass = vs_th.delta_h > 3 * vs_th.std_error && vs_sq.delta_h > 3 * vs_sq.std_error &&
                    vs_th.delta_h > vs_sq.delta_h && elapsed < 1800;
  return {pass, "dH(thermal) = " + fmt(vs_th.delta_h) + " +/- " + fmt(vs_th.std_error) +
                    ", dH(squashed) = " + fmt(vs_sq.delta_h) + " +/- " + fmt(vs_sq.std_error) + ", " +
                    fmt(elapsed, 3) + " s"};
}

Outcome subsystem_trend() {
  const auto c = ten_mode();
  const auto gt = build_components(c, Hypothesis::kGroundTruth);
  bool pass = true;
  std::string detail;
  for (auto h : {Hypothesis::kSquashed, Hypothesis::kThermal}) {
    const auto rows = bayesian_subsystem_sweep(ten_mode_samples(), gt, build_components(c, h),
                                               {3, 5, 8, 10}, {}, 20, 4);
    int inversions = 0;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const double drop = rows[i].mean_delta_h - rows[i + 1].mean_delta_h;
      if (drop <= 0) continue;
      const double sigma = std::hypot(rows[i].std_error, rows[i + 1].std_error);
      if (drop > sigma || ++inversions > 1) ok = false;
    }
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(h)) + ":";
    for (const auto& r : rows)
      detail += " " + std::to_string(r.size) + "->" + fmt(r.mean_delta_h) + "+/-" + fmt(r.std_error, 2);
  }
  return {pass, detail};
}

Outcome power_trend() {
  std::vector<BayesianResult> res;
  const auto modes = all_modes(10);
  for (double scale : {0.7, 1.0, 1.3}) {
    const auto c = ten_mode(scale);
    const auto s = sample(c, "ground-truth", 50000, 12);
    const SubsystemModel gt(build_components(c, Hypothesis::kGroundTruth), modes);
    const SubsystemModel sq(build_components(c, Hypothesis::kSquashed), modes);
    res.push_back(bayesian_score_pooled(s, gt, sq));
  }
  const bool decreasing = res[0].delta_h > res[1].delta_h && res[1].delta_h > res[2].delta_h;
  const double gap = res[0].delta_h - res[2].delta_h;
  const double sigma = std::hypot(res[0].std_error, res[2].std_error);
  std::string detail = "dH(squashed) at scale 0.7/1.0/1.3:";
  for (const auto& r : res) detail += " " + fmt(r.delta_h) + "+/-" + fmt(r.std_error, 2);
  detail += "; extremes differ by " + fmt(gap / sigma, 3) + " sigma";
  return {decreasing && gap >= 2 * sigma, detail};
}

// --- 8, 9 -------------------------------------------------------------------

ExperimentConfig eight_mode() {
  return testing::make_config(8, 2, {{0, 1, 0.6, 1.0}, {2, 3, 0.6, 1.0}, {4, 5, 0.6, 1.0}, {6, 7, 0.6, 1.0}},
                              std::vector<double>(8, 0.6), 88);
}

const VacuumEvaluator& eight_mode_eval() {
  static const VacuumEvaluator eval(build_components(eight_mode(), Hypothesis::kGroundTruth));
  return eval;
}

const SampleSet& eight_mode_samples() {
  static const SampleSet s = exact_sampler(eight_mode_eval(), 1000000, 21);
  return s;
}

Outcome cumulant_agreement() {
  const auto& eval = eight_mode_eval();
  const auto& s = eight_mode_samples();
  std::size_t within = 0, total = 0;
  std::string detail;
  for (int order : {2, 3}) {
    const auto tuples = first_bin_tuples(8, 2, order);
    const auto emp = cumulants_empirical(s, order, tuples);
    const auto ex = cumulants_exact(eval, order, tuples);
    std::size_t w = 0;
    for (const auto& [t, e] : emp.entries)
      if (std::abs(e.value - ex.entries.at(t).value) <= 4 * e.std_error) ++w;
    within += w;
    total += emp.entries.size();
    detail += "order " + std::to_string(order) + ": " + std::to_string(w) + "/" +
              std::to_string(emp.entries.size()) + " within 4 sigma; ";
  }
  // Round trip on exact moments of the first three bins of distinct modes.
  double worst = 0.0;
  for (int k = 2; k <= 4; ++k) {
    const unsigned full = (1u << k) - 1;
    std::vector<double> mu(full + 1, 1.0);
    for (unsigned sub = 1; sub <= full; ++sub) {
      BinMask m = 0;
      for (int i = 0; i < k; ++i)
        if (sub >> i & 1) m |= bin_bit(2 * i);
      mu[sub] = eval.click_moment(m);
    }
    const auto back = moments_from_cumulants(cumulants_from_moments(mu, k), k);
    for (unsigned sub = 1; sub <= full; ++sub) worst = std::max(worst, std::abs(back[sub] - mu[sub]));
  }
  detail += "round trip max |diff| " + fmt(worst);
  const bool pass = within >= 0.95 * total && worst <= 1e-12;
  return {pass, detail};
}

Outcome spoofer_separation() {
  const auto c = eight_mode();
  const auto& eval = eight_mode_eval();
  const std::size_t n = 1000000;
  auto d_of = [&](const SampleSet& s, int order) {
    const auto tuples = first_bin_tuples(8, 2, order);
    return compare_correlations(cumulants_empirical(s, order, tuples),
                                cumulants_exact(eval, order, tuples))
        .d;
  };
  const auto& exact = eight_mode_samples();
  const double d2_exact = d_of(exact, 2), d3_exact = d_of(exact, 3);
  const double d2_sq = d_of(sample(c, "squashed", n, 31), 2);
  const double d2_th = d_of(sample(c, "thermal", n, 32), 2);
  const double d3_greedy = d_of(sample(c, "greedy", n, 33), 3);
  const double d2_ips = d_of(sample(c, "ips", n, 34), 2);
  const bool pass = d2_exact < d2_sq && d2_sq < d2_th && d3_exact < d3_greedy && d2_exact < d2_ips;
  return {pass, "order 2: exact " + fmt(d2_exact) + ", squashed " + fmt(d2_sq) + ", thermal " +
                    fmt(d2_th) + ", ips " + fmt(d2_ips) + "; order 3: exact " + fmt(d3_exact) +
                    ", greedy " + fmt(d3_greedy)};
}

// --- 10 ---------------------------------------------------------------------

Outcome cost_checks() {
  bool pass = true;
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 2000; ++trial) {
    ClickPattern p(1 + trial % 64);
    for (auto& v : p) v = static_cast<int>(rng() & 1);
    p[trial % p.size()] = 1;
    pass = pass && g_factor(p).g == 2.0;
  }
  pass = pass && g_factor({8, 0, 0}).g == 9.0 && std::abs(g_factor({2, 1, 1, 0, 0}).g - std::cbrt(12.0)) < 1e-14;
  ClickPattern two(144, 0);
  two[3] = two[100] = 1;
  const double worked = simulation_time(two, {1.0, 144}).seconds;
  pass = pass && worked == 1152.0;
  // log T against log c: fit slope over a wide range.
  const ClickPattern p{3, 1, 4, 1, 5, 9, 2, 6};
  double worst = 0.0;
  const double base = simulation_time(p, {1.0, 8}).log_seconds;
  for (double lc = -30; lc <= 30; lc += 5) {
    const double c = std::exp(lc);
    worst = std::max(worst, std::abs(simulation_time(p, {c, 8}).log_seconds - base - lc));
  }
  pass = pass && worst <= 1e-12;
  return {pass, "binary G == 2 for 2000 patterns, worked example T = " + fmt(worked, 10) +
                    " s, log-linearity max |diff| " + fmt(worst)};
}

// --- 11 ---------------------------------------------------------------------

int run_cli(const std::string& args) {
  const int status = std::system((std::string(GBSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string stable_contents(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# created ", 0) != 0) out += line + "\n";
  return out;
}

/// Largest relative difference between numbers found at matching positions.
double max_numeric_diff(const std::string& a, const std::string& b) {
  static const std::regex num(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
  std::vector<double> x, y;
  for (auto it = std::sregex_iterator(a.begin(), a.end(), num); it != std::sregex_iterator(); ++it)
    x.push_back(std::stod(it->str()));
  for (auto it = std::sregex_iterator(b.begin(), b.end(), num); it != std::sregex_iterator(); ++it)
    y.push_back(std::stod(it->str()));
  if (x.size() != y.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(x[i] - y[i]) / std::max(1.0, std::abs(y[i])));
  return worst;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "gbsim_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto config = (dir / "config.json").string();
  std::ofstream(config) << to_json(ten_mode()).dump(2);
  auto p = [&](const std::string& name) { return (dir / name).string(); };

  bool ok = true;
  std::size_t identical = 0, compared = 0;
  double worst_thread = 0.0;
  for (const std::string sampler : {"ground-truth", "squashed", "thermal", "ips", "greedy"}) {
    const std::string base = "sample --config " + config + " --sampler " + sampler + " --n 5000 --seed 9";
    ok = ok && run_cli(base + " --threads 1 --out " + p("a.txt")) == 0;
    ok = ok && run_cli(base + " --threads 1 --out " + p("b.txt")) == 0;
    ok = ok && run_cli(base + " --threads 4 --out " + p("c.txt")) == 0;
    const auto a = stable_contents(p("a.txt"));
    identical += a == stable_contents(p("b.txt"));
    ++compared;
    worst_thread = std::max(worst_thread, max_numeric_diff(stable_contents(p("c.txt")), a));
  }
  ok = ok && run_cli("sample --config " + config + " --sampler ground-truth --n 5000 --seed 9 --out " +
                     p("s.txt")) == 0;
  const std::vector<std::string> reports{
      "--test bayes --subsystem-sizes 3,5,10 --seed 4", "--test bayes --hypothesis squashed --n-condition 2,3",
      "--test cumulants --order 2", "--test cumulants --order 3 --variable mode-count", "--test hog",
      "--test clickstats"};
  for (const auto& r : reports) {
    const std::string base = "validate --config " + config + " --samples " + p("s.txt") + " " + r;
    ok = ok && run_cli(base + " --threads 1 --out " + p("r1.txt")) == 0;
    ok = ok && run_cli(base + " --threads 1 --out " + p("r2.txt")) == 0;
    ok = ok && run_cli(base + " --threads 4 --out " + p("r4.txt")) == 0;
    const auto a = stable_contents(p("r1.txt"));
    identical += a == stable_contents(p("r2.txt"));
    ++compared;
    worst_thread = std::max(worst_thread, max_numeric_diff(stable_contents(p("r4.txt")), a));
  }
  for (int i = 0; i < 2; ++i)
    ok = ok && run_cli("cost --samples " + p("s.txt") + " --c-machine 1e-9 --out " + p(i ? "k2.txt" : "k1.txt")) == 0;
  identical += stable_contents(p("k1.txt")) == stable_contents(p("k2.txt")) &&
               stable_contents(p("k1.txt.contours")) == stable_contents(p("k2.txt.contours"));
  ++compared;
  fs::remove_all(dir);
  return {ok && identical == compared && worst_thread <= 1e-12,
          std::to_string(identical) + "/" + std::to_string(compared) +
              " outputs byte-identical on repeat, max thread-count difference " + fmt(worst_thread) +
              (ok ? "" : ", a CLI invocation failed")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"normalization", normalization},
      {"closed forms", closed_forms},
      {"squashed matching", squashed_matching},
      {"bayesian sanity", bayesian_sanity},
      {"subsystem trend", subsystem_trend},
      {"power trend", power_trend},
      {"cumulants", cumulant_agreement},
      {"spoofer separation", spoofer_separation},
      {"cost model", cost_checks},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << ", " << fmt(seconds_since(t0), 3) << " s): " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all selected criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
