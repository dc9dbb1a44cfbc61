#include "dupkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "dupkit/blur.hpp"
#include "dupkit/metrics.hpp"
#include "dupkit/random.hpp"
#include "dupkit/ranking.hpp"

namespace dupkit {

namespace {

// Groups in first-appearance order with their member indices.
std::vector<std::vector<std::size_t>> group_members(const std::vector<LabeledInstance>& instances) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto [it, inserted] = slot.emplace(instances[i].group_id, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
  }
  return members;
}

std::vector<std::vector<double>> features_of(const std::vector<LabeledInstance>& instances) {
  std::vector<std::vector<double>> features;
  features.reserve(instances.size());
  for (const auto& instance : instances) features.push_back(instance.features);
  return features;
}

}  // namespace

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

DataSplit split_train_test(std::vector<LabeledInstance> instances, double test_fraction, std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) throw std::invalid_argument("test fraction must be in (0, 1)");
  auto members = group_members(instances);
  Rng rng(seed);
  rng.shuffle(members);
  const auto wanted = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(instances.size())));
  std::vector<char> is_test(instances.size(), 0);
  std::size_t taken = 0;
  for (const auto& group : members) {
    if (taken >= wanted) break;
    for (std::size_t i : group) is_test[i] = 1;
    taken += group.size();
  }
  DataSplit split;
  for (std::size_t i = 0; i < instances.size(); ++i)
    (is_test[i] ? split.test : split.train).push_back(std::move(instances[i]));
  return split;
}

std::vector<int> binary_targets(const std::vector<LabeledInstance>& instances, const UncertaintySpec& spec,
                                const GradeScale& scale) {
  std::vector<int> targets;
  targets.reserve(instances.size());
  for (const auto& instance : instances)
    targets.push_back(binarize(uncertainty(spec.kind, instance.histogram, scale), spec));
  return targets;
}

std::vector<double> model_scores(const MlpModel& model, const std::vector<LabeledInstance>& instances,
                                 const UncertaintySpec& spec, const GradeScale& scale) {
  return score_all(model, features_of(instances), spec.kind, scale);
}

double evaluate_auc(const MlpModel& model, const std::vector<LabeledInstance>& test, const UncertaintySpec& spec,
                    const GradeScale& scale) {
  if (test.empty()) throw std::invalid_argument("empty test set");
  if (static_cast<int>(test.front().features.size()) != model.input_dim())
    throw std::invalid_argument("test features do not match model input dimension");
  return roc_auc(model_scores(model, test, spec, scale), binary_targets(test, spec, scale));
}

TrainResult train_model(const std::vector<LabeledInstance>& train, TrainMode mode, const UncertaintySpec& spec,
                        const GradeScale& scale, TrainConfig config) {
  config.mode = mode;
  std::vector<LabeledInstance> relabeled;
  const std::vector<LabeledInstance>* source = &train;
  if (mode == TrainMode::dup && spec.kind == UncertaintyKind::disagree) {
    // Stored targets may have been cut at a different threshold.
    relabeled = train;
    for (auto& instance : relabeled) instance.target_disagree = binarize(u_disagree(instance.histogram), spec);
    source = &relabeled;
  } else if (mode == TrainMode::dup && spec.kind == UncertaintyKind::variance) {
    relabeled = train;
    for (auto& instance : relabeled) instance.target_var = binarize(u_var(instance.histogram, scale), spec);
    source = &relabeled;
  } else if (mode == TrainMode::dup) {
    throw std::invalid_argument("DUP models train on disagree or variance targets");
  }
  return train_with_report(make_examples(*source, mode, spec.kind, scale), config);
}

ComparisonResult compare_dup_uvc(const DataSplit& split, const UncertaintySpec& spec, const GradeScale& scale,
                                 const TrainConfig& base) {
  ComparisonResult result;
  const auto targets = binary_targets(split.test, spec, scale);
  result.positive_rate = mean(std::vector<double>(targets.begin(), targets.end()));
  const MlpModel dup = train_model(split.train, TrainMode::dup, spec, scale, base).model;
  result.dup_auc = evaluate_auc(dup, split.test, spec, scale);
  TrainConfig uvc_config = base;
  const MlpModel uvc = train_model(split.train, TrainMode::uvc, spec, scale, uvc_config).model;
  result.uvc_auc = evaluate_auc(uvc, split.test, spec, scale);
  return result;
}

ComparisonResult run_gaussian_trial(const GaussianTrialConfig& config, std::uint64_t seed) {
  const auto world = sample_gaussian_world(config.dim, config.components, derive_seed(seed, 10));
  const UncertaintySpec spec{UncertaintyKind::disagree, config.threshold};
  auto data = gen_gaussian_dataset(world, config.instances, config.labels_per_instance, spec, derive_seed(seed, 11));
  const DataSplit split = split_train_test(std::move(data), config.test_fraction, derive_seed(seed, 12));
  TrainConfig train = config.train;
  train.seed = derive_seed(seed, 13);
  return compare_dup_uvc(split, spec, GradeScale::ordinal(static_cast<std::size_t>(config.components)), train);
}

ComparisonResult run_blur_trial(const BlurTrialConfig& config, std::uint64_t seed) {
  auto data = gen_blur_dataset(config.images, config.world, derive_seed(seed, 20));
  const DataSplit split = split_train_test(std::move(data), config.test_fraction, derive_seed(seed, 21));
  TrainConfig train = config.train;
  train.seed = derive_seed(seed, 22);
  // Any label disagreement is the positive class.
  const UncertaintySpec spec{UncertaintyKind::disagree, 0.0};
  return compare_dup_uvc(split, spec, GradeScale::ordinal(static_cast<std::size_t>(config.world.class_count)), train);
}

std::vector<SweepRow> train_size_sweep(const std::vector<LabeledInstance>& train,
                                       const std::vector<LabeledInstance>& test, const std::vector<double>& fractions,
                                       const TrainConfig& base, int repeats, const UncertaintySpec& spec,
                                       const GradeScale& scale) {
  if (repeats < 1) throw std::invalid_argument("need at least one repeat");
  const auto members = group_members(train);
  std::vector<SweepRow> rows;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const double fraction = fractions[f];
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("sweep fractions must lie in (0, 1]");
    std::vector<double> dup_aucs;
    std::vector<double> uvc_aucs;
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t cell_seed = derive_seed(base.seed, 1000 * (f + 1) + static_cast<std::uint64_t>(r));
      auto order = members;
      Rng rng(cell_seed);
      rng.shuffle(order);
      const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
      std::vector<LabeledInstance> subset;
      for (const auto& group : order) {
        if (subset.size() >= wanted) break;
        for (std::size_t i : group) subset.push_back(train[i]);
      }
      const auto targets = binary_targets(subset, spec, scale);
      const auto positives = std::count(targets.begin(), targets.end(), 1);
      if (positives == 0 || positives == static_cast<long>(targets.size())) {
        std::clog << "warning: fraction " << fraction << " repeat " << r << " has a single class; skipped\n";
        continue;
      }
      TrainConfig config = base;
      config.seed = cell_seed;
      const ComparisonResult result = compare_dup_uvc({std::move(subset), test}, spec, scale, config);
      dup_aucs.push_back(result.dup_auc);
      uvc_aucs.push_back(result.uvc_auc);
    }
    if (dup_aucs.empty()) continue;
    rows.push_back({fraction, TrainMode::dup, mean(dup_aucs), stddev(dup_aucs), static_cast<int>(dup_aucs.size())});
    rows.push_back({fraction, TrainMode::uvc, mean(uvc_aucs), stddev(uvc_aucs), static_cast<int>(uvc_aucs.size())});
  }
  return rows;
}

std::vector<AdjudicatedInstance> gen_adjudicated_gaussian(const GaussianMixtureWorld& world, int n_instances,
                                                          int labels_per_instance, std::uint64_t seed) {
  if (n_instances < 1) throw std::invalid_argument("need at least one instance");
  std::vector<AdjudicatedInstance> instances;
  instances.reserve(static_cast<std::size_t>(n_instances));
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const std::vector<double> o = world.sample(rng);
    const GradeHistogram posterior = gm_posterior(world, o);
    AdjudicatedInstance instance;
    instance.features = obscure(o);
    instance.group_id = "a" + std::to_string(i);
    instance.labels = draw_labels(posterior, labels_per_instance, rng);
    // max_element returns the first maximum, i.e. the lower grade on ties.
    instance.adjudicated =
        static_cast<int>(std::max_element(posterior.mass().begin(), posterior.mass().end()) - posterior.mass().begin());
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<RankingRow> rank_models(const std::vector<std::pair<std::string, MlpModel>>& models,
                                    const std::vector<AdjudicatedInstance>& instances,
                                    const std::vector<GroundMetric>& metrics, const GradeScale& scale) {
  std::vector<std::vector<double>> features;
  for (const auto& instance : instances) features.push_back(instance.features);
  std::vector<RankingRow> rows;
  for (const auto& [name, model] : models) {
    if (!instances.empty() && static_cast<int>(features.front().size()) != model.input_dim())
      throw std::invalid_argument("adjudicated features do not match model " + name);
    const auto scores = score_all(model, features, UncertaintyKind::disagree, scale);
    for (GroundMetric metric : metrics) {
      const auto truth = continuous_disagreement(instances, metric, scale);
      rows.push_back({name, model.mode(), metric, spearman(scores, truth)});
    }
  }
  return rows;
}

std::vector<SubsampleRow> doctor_subsampling_curve(const std::vector<AdjudicatedInstance>& instances,
                                                   const std::vector<int>& doctor_counts,
                                                   const std::vector<GroundMetric>& metrics, const GradeScale& scale,
                                                   std::uint64_t seed, int repeats) {
  std::vector<SubsampleRow> rows;
  for (GroundMetric metric : metrics) {
    const auto truth = continuous_disagreement(instances, metric, scale);
    for (int n : doctor_counts)
      rows.push_back({n, metric, subsample_doctor_ranking(instances, n, metric, truth, scale, seed, repeats)});
  }
  return rows;
}

}  // namespace dupkit
