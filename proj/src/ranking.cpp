#include "dupkit/ranking.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "dupkit/metrics.hpp"
#include "dupkit/oracle.hpp"
#include "dupkit/random.hpp"

namespace dupkit {

int aggregate_majority(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::map<int, int> counts;
  for (int label : labels) ++counts[label];
  int best = counts.begin()->first;
  int best_count = 0;
  // Ascending keys: strict improvement keeps the lower grade on ties.
  for (const auto& [grade, count] : counts)
    if (count > best_count) {
      best = grade;
      best_count = count;
    }
  return best;
}

int aggregate_median(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::vector<int> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

std::string_view to_string(Aggregation aggregation) {
  return aggregation == Aggregation::majority ? "majority" : "median";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "majority") return Aggregation::majority;
  if (name == "median") return Aggregation::median;
  throw std::invalid_argument("unknown aggregation: " + std::string(name));
}

std::vector<int> agreement_labels(const std::vector<AdjudicatedInstance>& instances, Aggregation aggregation,
                                  bool referable_only, const GradeScale& scale) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  std::vector<int> result;
  result.reserve(instances.size());
  for (const auto& instance : instances) {
    const int aggregated =
        aggregation == Aggregation::majority ? aggregate_majority(instance.labels) : aggregate_median(instance.labels);
    if (referable_only) {
      const bool a = scale.is_referable(static_cast<std::size_t>(aggregated));
      const bool b = scale.is_referable(static_cast<std::size_t>(instance.adjudicated));
      result.push_back(a != b ? 1 : 0);
    } else {
      result.push_back(aggregated != instance.adjudicated ? 1 : 0);
    }
  }
  return result;
}

std::vector<double> continuous_disagreement(const std::vector<AdjudicatedInstance>& instances, GroundMetric metric,
                                            const GradeScale& scale) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  std::vector<double> result;
  result.reserve(instances.size());
  for (const auto& instance : instances)
    result.push_back(wasserstein_point_mass(empirical_histogram(instance.labels, scale),
                                            static_cast<std::size_t>(instance.adjudicated), metric, scale));
  return result;
}

double subsample_doctor_ranking(const std::vector<AdjudicatedInstance>& instances, int n_doctors, GroundMetric metric,
                                std::span<const double> ground_truth, const GradeScale& scale, std::uint64_t seed,
                                int repeats) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  if (ground_truth.size() != instances.size()) throw std::invalid_argument("ground truth length mismatch");
  if (n_doctors < 1 || repeats < 1) throw std::invalid_argument("need n_doctors >= 1 and repeats >= 1");
  for (const auto& instance : instances)
    if (instance.labels.size() < static_cast<std::size_t>(n_doctors))
      throw std::invalid_argument("instance " + instance.group_id + " has fewer than " + std::to_string(n_doctors) +
                                  " labels");
  double total = 0.0;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> distances;
    distances.reserve(instances.size());
    for (const auto& instance : instances) {
      std::vector<int> pool = instance.labels;
      for (std::size_t i = 0; i < static_cast<std::size_t>(n_doctors); ++i)
        std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      pool.resize(static_cast<std::size_t>(n_doctors));
      distances.push_back(wasserstein_point_mass(empirical_histogram(pool, scale),
                                                 static_cast<std::size_t>(instance.adjudicated), metric, scale));
    }
    if (std::adjacent_find(distances.begin(), distances.end(), std::not_equal_to<>()) != distances.end())
      total += spearman(distances, ground_truth);
  }
  return total / repeats;
}

}  // namespace dupkit
