// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: dupkit_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dupkit/blur.hpp"
#include "dupkit/experiment.hpp"
#include "dupkit/learner.hpp"
#include "dupkit/metrics.hpp"
#include "dupkit/oracle.hpp"
#include "dupkit/ranking.hpp"
#include "dupkit/transport.hpp"

using namespace dupkit;

namespace {

// Tolerances and sizes.
constexpr double kTowerTol = 1e-12;
constexpr double kSignTol = 1e-12;
constexpr double kStrictGap = 1e-6;
constexpr double kCorollaryTol = 1e-10;
constexpr double kUvcFlatTol = 1e-6;
constexpr double kDupClosedFormTol = 1e-4;
constexpr double kTransportTol = 1e-9;
constexpr double kGradientTol = 1e-6;
constexpr double kCalibrationSlack = 1e-9;
constexpr double kDoubledTemperatureTol = 0.05;
constexpr double kMetricTol = 1e-12;
constexpr double kAucBand = 0.04;
constexpr double kMinGaussianGap = 0.03;
constexpr double kMinBlurGap = 0.02;
constexpr double kLevel3RateTol = 0.01;
constexpr double kSubsampleSlack = 0.02;

constexpr int kRandomWorlds = 100;
constexpr int kSeeds = 3;
constexpr int kGaussianInstances = 20000;
constexpr int kGaussianEpochs = 30;
constexpr int kBlurImages = 6000;
constexpr int kBlurEpochs = 50;
constexpr int kLevel3RateImages = 60000;
constexpr int kAdjudicatedInstances = 2000;
constexpr int kAdjudicatedLabels = 10;
constexpr int kSubsampleRepeats = 20;
constexpr int kSweepRepeats = 5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string pct(double auc) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%.1f", 100.0 * auc);
  return buffer;
}

std::vector<DiscreteWorld> random_worlds() {
  Rng rng(20240601);
  std::vector<DiscreteWorld> worlds;
  for (int i = 0; i < kRandomWorlds; ++i) worlds.push_back(random_discrete_world(rng));
  return worlds;
}

GradeHistogram random_histogram(Rng& rng, std::size_t k) {
  std::vector<double> w(k, 0.0);
  double total = 0.0;
  for (auto& v : w) {
    if (rng.uniform() < 0.3) continue;
    total += (v = rng.uniform(0.01, 1.0));
  }
  if (total == 0.0) w[rng.index(k)] = total = 1.0;
  for (auto& v : w) v /= total;
  return GradeHistogram(w);
}

// ---------------------------------------------------------------- Gaussian worlds

struct GaussianSetup {
  int dim;
  int components;
  double paper_dup;
  double paper_uvc;
};

constexpr GaussianSetup kGaussianSetups[] = {{3, 5, 0.746, 0.691}, {5, 4, 0.712, 0.620}, {10, 4, 0.634, 0.560}};

struct GaussianRun {
  GaussianMixtureWorld world;
  DataSplit split;
  TrainConfig config;
  MlpModel dup;
  MlpModel uvc;
  double dup_auc = 0.0;
  double uvc_auc = 0.0;
};

TrainConfig gaussian_config(std::uint64_t seed) {
  TrainConfig config;
  config.epochs = kGaussianEpochs;
  config.seed = derive_seed(seed, 13);
  return config;
}

// Same seed streams as run_gaussian_trial, keeping the models.
GaussianRun gaussian_run(const GaussianSetup& setup, std::uint64_t seed) {
  GaussianRun run;
  run.world = sample_gaussian_world(setup.dim, setup.components, derive_seed(seed, 10));
  const UncertaintySpec spec{UncertaintyKind::disagree, 0.5};
  const auto scale = GradeScale::ordinal(static_cast<std::size_t>(setup.components));
  run.split = split_train_test(gen_gaussian_dataset(run.world, kGaussianInstances, 5, spec, derive_seed(seed, 11)),
                               0.2, derive_seed(seed, 12));
  run.config = gaussian_config(seed);
  run.dup = train_model(run.split.train, TrainMode::dup, spec, scale, run.config).model;
  run.uvc = train_model(run.split.train, TrainMode::uvc, spec, scale, run.config).model;
  run.dup_auc = evaluate_auc(run.dup, run.split.test, spec, scale);
  run.uvc_auc = evaluate_auc(run.uvc, run.split.test, spec, scale);
  return run;
}

std::map<std::pair<int, std::uint64_t>, GaussianRun> g_runs;

const GaussianRun& cached_run(int setup_index, std::uint64_t seed) {
  const auto key = std::make_pair(setup_index, seed);
  auto it = g_runs.find(key);
  if (it == g_runs.end()) it = g_runs.emplace(key, gaussian_run(kGaussianSetups[setup_index], seed)).first;
  return it->second;
}

// ---------------------------------------------------------------- criteria

Outcome gaussian_reproduction() {
  Outcome out;
  for (int s = 0; s < 3; ++s) {
    const auto& setup = kGaussianSetups[s];
    std::vector<double> dup, uvc;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      dup.push_back(cached_run(s, seed).dup_auc);
      uvc.push_back(cached_run(s, seed).uvc_auc);
    }
    const double d = mean(dup), u = mean(uvc);
    const bool dup_ok = std::abs(d - setup.paper_dup) <= kAucBand;
    const bool uvc_ok = std::abs(u - setup.paper_uvc) <= kAucBand;
    const bool gap_ok = d - u >= kMinGaussianGap;
    out.pass = out.pass && dup_ok && uvc_ok && gap_ok;
    out.detail += "(" + std::to_string(setup.dim) + "d," + std::to_string(setup.components) + "G) DUP " + pct(d) +
                  (dup_ok ? "" : "[out of band]") + " UVC " + pct(u) + (uvc_ok ? "" : "[out of band]") + " gap " +
                  pct(d - u) + (gap_ok ? "" : "[<3]") + "; ";
  }
  return out;
}

Outcome tower_identity() {
  double worst = 0.0;
  for (const auto& world : random_worlds())
    for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance}) {
      const auto report = bias_report(world, kind);
      worst = std::max(worst, std::abs(report.mean_h_dup - report.mean_true_uncertainty));
    }
  return {worst <= kTowerTol, "max |E[h_dup] - E[U(posterior)]| = " + fmt(worst, 3)};
}

Outcome sign_theorem() {
  double worst = std::numeric_limits<double>::infinity();
  int nondegenerate = 0, strict_misses = 0;
  for (const auto& world : random_worlds()) {
    const auto scale = GradeScale::ordinal(world.grades());
    const bool strict_expected = has_nondegenerate_x(world);
    nondegenerate += strict_expected;
    for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance, UncertaintyKind::entropy}) {
      double largest_gap = 0.0;
      for (int x : world.x_values()) {
        const double gap = exact_h_uvc(world, x, kind, scale) - exact_h_dup(world, x, kind, scale);
        worst = std::min(worst, gap);
        largest_gap = std::max(largest_gap, gap);
      }
      if (strict_expected && largest_gap <= kStrictGap) ++strict_misses;
    }
  }
  return {worst >= -kSignTol && strict_misses == 0,
          "min h_uvc - h_dup = " + fmt(worst, 3) + "; nondegenerate worlds " + std::to_string(nondegenerate) +
              ", strict-gap misses " + std::to_string(strict_misses)};
}

Outcome corollary_equality() {
  double worst = 0.0;
  for (const auto& world : random_worlds())
    for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance}) {
      const auto report = bias_report(world, kind);
      worst = std::max(worst, std::abs(report.empirical_bias - report.formula_bias));
    }
  const auto w2 = bias_report(build_discrete_world({{0.5, 0.0}, {0.0, 0.5}}, {0, 0}), UncertaintyKind::disagree);
  const bool w2_ok = std::abs(w2.empirical_bias - 0.5) <= kCorollaryTol && std::abs(w2.formula_bias - 0.5) <= kCorollaryTol;
  return {worst <= kCorollaryTol && w2_ok, "max |empirical - formula| = " + fmt(worst, 3) + "; W2 bias " +
                                               fmt(w2.empirical_bias, 17) + " formula " + fmt(w2.formula_bias, 17)};
}

Outcome two_gaussian_closed_form() {
  std::vector<std::vector<double>> joint;
  std::vector<int> map;
  for (int i = -600; i <= 600; ++i) {
    const double o = i * 0.01;
    joint.push_back({std::exp(-0.5 * (o + 1) * (o + 1)), std::exp(-0.5 * (o - 1) * (o - 1))});
    map.push_back(std::abs(i));
  }
  const auto world = build_discrete_world(joint, map);
  const auto scale = GradeScale::ordinal(2);
  double uvc_dev = 0.0, dup_dev = 0.0;
  for (int x : world.x_values()) {
    const double p = 1.0 / (1.0 + std::exp(-2.0 * x * 0.01));
    uvc_dev = std::max(uvc_dev, std::abs(exact_h_uvc(world, x, UncertaintyKind::disagree, scale) - 0.5));
    dup_dev = std::max(dup_dev, std::abs(exact_h_dup(world, x, UncertaintyKind::disagree, scale) -
                                         u_disagree(GradeHistogram({p, 1 - p}))));
  }
  return {uvc_dev <= kUvcFlatTol && dup_dev <= kDupClosedFormTol,
          "max |h_uvc - 0.5| = " + fmt(uvc_dev, 3) + ", max |h_dup - closed form| = " + fmt(dup_dev, 3)};
}

Outcome wasserstein_point_mass_theorem() {
  Rng rng(606);
  double worst = 0.0;
  int plan_mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.index(kMaxTransportSupport - 1);
    const auto scale = GradeScale::ordinal(k);
    const auto h = random_histogram(rng, k);
    const std::size_t anchor = rng.index(k);
    for (auto metric : {GroundMetric::abs, GroundMetric::squared_w2, GroundMetric::binary}) {
      const auto [value, plan] = brute_force_wasserstein(h, GradeHistogram::point_mass(k, anchor), metric, scale);
      worst = std::max(worst, std::abs(value - wasserstein_point_mass(h, anchor, metric, scale)));
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t t = 0; t < k; ++t)
          if (plan.plan[r][t] != (t == anchor ? h[r] : 0.0)) ++plan_mismatches;
    }
  }
  return {worst <= kTransportTol && plan_mismatches == 0,
          "max |closed form - transport| = " + fmt(worst, 3) + "; plan mismatches " + std::to_string(plan_mismatches)};
}

Outcome blur_world() {
  Outcome out;
  BlurTrialConfig config;
  config.images = kBlurImages;
  config.train.epochs = kBlurEpochs;
  std::vector<double> dup, uvc;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto result = run_blur_trial(config, seed);
    dup.push_back(result.dup_auc);
    uvc.push_back(result.uvc_auc);
  }
  const double gap = mean(dup) - mean(uvc);
  double level3 = 0, positive = 0;
  for (const auto& s : gen_blur_samples(kLevel3RateImages, config.world, 777))
    if (s.level == 3) ++level3, positive += s.instance.target_disagree;
  const double rate = positive / level3;
  const double analytic = 1.0 - (std::pow(0.52, 3) + 4 * std::pow(0.12, 3));
  out.pass = gap >= kMinBlurGap && std::abs(rate - analytic) <= kLevel3RateTol;
  out.detail = "DUP " + pct(mean(dup)) + " UVC " + pct(mean(uvc)) + " gap " + pct(gap) + "; level-3 positive rate " +
               fmt(rate) + " vs " + fmt(analytic) + " (" + std::to_string(static_cast<int>(level3)) + " images)";
  return out;
}

Outcome learner_correctness() {
  Rng rng(88);
  double worst_grad = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    for (TrainMode mode : {TrainMode::dup, TrainMode::uvc}) {
      const int k = mode == TrainMode::dup ? 2 : 5;
      const auto model = MlpModel::initialize({4, 8, 8, k}, mode, 900 + trial);
      std::vector<TrainExample> rows;
      for (int i = 0; i < 8; ++i) {
        TrainExample ex;
        for (int j = 0; j < 4; ++j) ex.features.push_back(rng.normal());
        ex.group_id = std::to_string(i);
        if (mode == TrainMode::dup) {
          const bool pos = rng.uniform() < 0.5;
          ex.target = {pos ? 0.0 : 1.0, pos ? 1.0 : 0.0};
        } else {
          ex.target = random_histogram(rng, 5).mass();
        }
        rows.push_back(ex);
      }
      worst_grad = std::max(worst_grad, gradient_check(model, make_batch(rows), mode).max_relative_error);
    }
  }

  // Validation targets drawn from a reference model, so T = 1 is optimal for it.
  const auto base = MlpModel::initialize({3, 16, 5}, TrainMode::uvc, 31);
  std::vector<TrainExample> validation;
  for (int i = 0; i < 300; ++i) {
    TrainExample ex;
    ex.features = {rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 2)};
    ex.group_id = std::to_string(i);
    ex.target = forward(base, ex.features);
    validation.push_back(ex);
  }
  const Batch batch = make_batch(validation);
  int calibration_regressions = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto model = MlpModel::initialize({3, 16, 5}, TrainMode::uvc, 500 + trial);
    model.weights().back() *= rng.uniform(0.1, 10.0);
    if (loss(calibrate_temperature(model, validation), batch, TrainMode::uvc) >
        loss(model, batch, TrainMode::uvc) + kCalibrationSlack)
      ++calibration_regressions;
  }
  MlpModel doubled = base;
  doubled.weights().back() *= 2.0;
  doubled.biases().back() *= 2.0;
  const double t = calibrate_temperature(doubled, validation).temperature();
  return {worst_grad < kGradientTol && calibration_regressions == 0 && std::abs(t - 2.0) <= kDoubledTemperatureTol,
          "max gradient rel. error " + fmt(worst_grad, 3) + "; calibration regressions " +
              std::to_string(calibration_regressions) + "; doubled-logit T = " + fmt(t, 6)};
}

Outcome metric_oracles() {
  Rng rng(99);
  double auc_err = 0.0, rho_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> s(n);
    std::vector<int> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(30));
      t[i] = rng.uniform() < 0.4;
    }
    t[0] = 0;
    t[1] = 1;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (t[i] == 1 && t[j] == 0) pairs += 1, wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    auc_err = std::max(auc_err, std::abs(roc_auc(s, t) - wins / pairs));

    const std::size_t m = 3 + rng.index(100);
    std::vector<double> a(m), b(m);
    for (std::size_t i = 0; i < m; ++i) a[i] = rng.normal(), b[i] = rng.normal() + a[i];
    const auto ra = midranks(a), rb = midranks(b);
    double d2 = 0;
    for (std::size_t i = 0; i < m; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double dm = static_cast<double>(m);
    rho_err = std::max(rho_err, std::abs(spearman(a, b) - (1 - 6 * d2 / (dm * (dm * dm - 1)))));
  }
  const double worked_auc = roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  const double worked_rho = spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
  return {auc_err <= kMetricTol && rho_err <= kMetricTol && worked_auc == 0.75 && worked_rho == 0.5,
          "max AUC error " + fmt(auc_err, 3) + ", max Spearman error " + fmt(rho_err, 3) + "; worked AUC " +
              fmt(worked_auc, 17) + ", worked Spearman " + fmt(worked_rho, 17)};
}

Outcome ranking_experiment() {
  Outcome out;
  const std::vector<GroundMetric> metrics{GroundMetric::abs, GroundMetric::squared_w2, GroundMetric::binary};
  std::vector<int> doctors(kAdjudicatedLabels);
  for (int n = 1; n <= kAdjudicatedLabels; ++n) doctors[static_cast<std::size_t>(n - 1)] = n;
  std::map<GroundMetric, std::vector<double>> dup_rho, uvc_rho;
  int monotone_breaks = 0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto& run = cached_run(0, seed);
    const auto scale = GradeScale::ordinal(5);
    const auto adjudicated =
        gen_adjudicated_gaussian(run.world, kAdjudicatedInstances, kAdjudicatedLabels, derive_seed(seed, 14));
    const auto rows = rank_models({{"dup", run.dup}, {"uvc", run.uvc}}, adjudicated, metrics, scale);
    for (const auto& row : rows) (row.mode == TrainMode::dup ? dup_rho : uvc_rho)[row.metric].push_back(row.spearman);
    const auto curve = doctor_subsampling_curve(adjudicated, doctors, metrics, scale, derive_seed(seed, 15),
                                                kSubsampleRepeats);
    for (std::size_t i = 1; i < curve.size(); ++i)
      if (curve[i].metric == curve[i - 1].metric && curve[i].mean_spearman < curve[i - 1].mean_spearman - kSubsampleSlack)
        ++monotone_breaks;
  }
  for (GroundMetric metric : metrics) {
    const double d = mean(dup_rho[metric]), u = mean(uvc_rho[metric]);
    out.pass = out.pass && d > u;
    out.detail += std::string(to_string(metric)) + " DUP " + fmt(d, 3) + " UVC " + fmt(u, 3) + "; ";
  }
  out.pass = out.pass && monotone_breaks == 0;
  out.detail += "subsampling monotonicity breaks " + std::to_string(monotone_breaks);
  return out;
}

Outcome train_size_sweep_gap() {
  const auto& run = cached_run(0, 0);
  const UncertaintySpec spec{UncertaintyKind::disagree, 0.5};
  const auto rows = train_size_sweep(run.split.train, run.split.test, {0.3, 0.5, 0.7, 1.0}, run.config, kSweepRepeats,
                                     spec, GradeScale::ordinal(5));
  Outcome out;
  std::map<double, std::pair<double, double>> by_fraction;
  for (const auto& row : rows)
    (row.mode == TrainMode::dup ? by_fraction[row.fraction].first : by_fraction[row.fraction].second) = row.mean_auc;
  out.pass = by_fraction.size() == 4;
  for (const auto& [fraction, aucs] : by_fraction) {
    out.pass = out.pass && aucs.first > aucs.second;
    out.detail += fmt(fraction, 2) + ": DUP " + pct(aucs.first) + " UVC " + pct(aucs.second) + "; ";
  }
  return out;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Gaussian-mixture AUC reproduction", gaussian_reproduction},
      {2, "tower identity", tower_identity},
      {3, "UVC overestimates, strictly when hidden", sign_theorem},
      {4, "bias formula equality", corollary_equality},
      {5, "two-Gaussian closed form", two_gaussian_closed_form},
      {6, "Wasserstein point-mass plan", wasserstein_point_mass_theorem},
      {7, "blur world DUP vs UVC", blur_world},
      {8, "learner correctness", learner_correctness},
      {9, "metric oracles", metric_oracles},
      {10, "ranking experiment", ranking_experiment},
      {11, "train-size sweep", train_size_sweep_gap},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " [" << c.number << "] " << c.name << ": " << outcome.detail
              << " (" << fmt(seconds, 3) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
