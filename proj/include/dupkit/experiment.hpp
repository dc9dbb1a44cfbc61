// Experiment pipelines shared by the CLI and the acceptance suite.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dupkit/blur.hpp"
#include "dupkit/dataset_io.hpp"
#include "dupkit/learner.hpp"
#include "dupkit/transport.hpp"
#include "dupkit/uncertainty.hpp"
#include "dupkit/worlds.hpp"

namespace dupkit {

struct DataSplit {
  std::vector<LabeledInstance> train;
  std::vector<LabeledInstance> test;
};

/// Group-disjoint split: whole groups go to the test side until it holds
/// round(test_fraction * n) instances.
DataSplit split_train_test(std::vector<LabeledInstance> instances, double test_fraction, std::uint64_t seed);

/// Binary targets recomputed from each instance's histogram under `spec`.
std::vector<int> binary_targets(const std::vector<LabeledInstance>& instances, const UncertaintySpec& spec,
                                const GradeScale& scale);

/// DUP models score P(high uncertainty); UVC models score U(output) with spec.kind.
std::vector<double> model_scores(const MlpModel& model, const std::vector<LabeledInstance>& instances,
                                 const UncertaintySpec& spec, const GradeScale& scale);

double evaluate_auc(const MlpModel& model, const std::vector<LabeledInstance>& test, const UncertaintySpec& spec,
                    const GradeScale& scale);

/// Trains one model; DUP uses the binarized target of spec.kind.
TrainResult train_model(const std::vector<LabeledInstance>& train, TrainMode mode, const UncertaintySpec& spec,
                        const GradeScale& scale, TrainConfig config);

struct ComparisonResult {
  double dup_auc = 0.0;
  double uvc_auc = 0.0;
  double positive_rate = 0.0;
};

/// Both modes trained on the same split and scored on the same test set.
ComparisonResult compare_dup_uvc(const DataSplit& split, const UncertaintySpec& spec, const GradeScale& scale,
                                 const TrainConfig& base);

struct GaussianTrialConfig {
  int dim = 3;
  int components = 5;
  int instances = 6000;
  int labels_per_instance = 5;
  double threshold = 0.5;
  double test_fraction = 0.2;
  TrainConfig train;
};

/// Draws a world and dataset from `seed`, then compares DUP and UVC.
ComparisonResult run_gaussian_trial(const GaussianTrialConfig& config, std::uint64_t seed);

struct BlurTrialConfig {
  int images = 6000;
  BlurWorld world;
  double test_fraction = 0.2;
  TrainConfig train;
};

ComparisonResult run_blur_trial(const BlurTrialConfig& config, std::uint64_t seed);

struct SweepRow {
  double fraction = 0.0;
  TrainMode mode = TrainMode::dup;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  int runs = 0;
};

/// For each fraction and repeat, trains both modes on a group-respecting
/// subsample of `train` and scores them on the fixed `test` split.
std::vector<SweepRow> train_size_sweep(const std::vector<LabeledInstance>& train,
                                       const std::vector<LabeledInstance>& test, const std::vector<double>& fractions,
                                       const TrainConfig& base, int repeats, const UncertaintySpec& spec,
                                       const GradeScale& scale);

/// Gaussian-world instances with `labels_per_instance` labels and the
/// posterior argmax (ties to the lower grade) as adjudicated grade.
std::vector<AdjudicatedInstance> gen_adjudicated_gaussian(const GaussianMixtureWorld& world, int n_instances,
                                                          int labels_per_instance, std::uint64_t seed);

struct RankingRow {
  std::string model;
  TrainMode mode = TrainMode::dup;
  GroundMetric metric = GroundMetric::abs;
  double spearman = 0.0;
};

struct SubsampleRow {
  int n_doctors = 0;
  GroundMetric metric = GroundMetric::abs;
  double mean_spearman = 0.0;
};

/// Spearman between each model's uncertainty score and the Wasserstein
/// distance of the full label histogram to the adjudicated grade.
std::vector<RankingRow> rank_models(const std::vector<std::pair<std::string, MlpModel>>& models,
                                    const std::vector<AdjudicatedInstance>& instances,
                                    const std::vector<GroundMetric>& metrics, const GradeScale& scale);

std::vector<SubsampleRow> doctor_subsampling_curve(const std::vector<AdjudicatedInstance>& instances,
                                                   const std::vector<int>& doctor_counts,
                                                   const std::vector<GroundMetric>& metrics, const GradeScale& scale,
                                                   std::uint64_t seed, int repeats);

double mean(const std::vector<double>& values);
double stddev(const std::vector<double>& values);

}  // namespace dupkit
