// Grade aggregation, agreement targets and Wasserstein-based ranking
// against adjudicated grades.
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dupkit/dataset_io.hpp"
#include "dupkit/transport.hpp"
#include "dupkit/uncertainty.hpp"

namespace dupkit {

/// Modal grade; ties go to the lower grade.
int aggregate_majority(std::span<const int> labels);

/// Middle grade; the lower middle for even counts.
int aggregate_median(std::span<const int> labels);

enum class Aggregation { majority, median };

std::string_view to_string(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view name);

/// 1 where the aggregated labels disagree with the adjudicated grade,
/// optionally after collapsing both to referable / non-referable.
std::vector<int> agreement_labels(const std::vector<AdjudicatedInstance>& instances, Aggregation aggregation,
                                  bool referable_only, const GradeScale& scale);

/// Wasserstein distance from each instance's empirical histogram to its
/// adjudicated grade.
std::vector<double> continuous_disagreement(const std::vector<AdjudicatedInstance>& instances, GroundMetric metric,
                                            const GradeScale& scale);

/// Mean Spearman, over `repeats` draws, between the distances computed
/// from n_doctors labels sampled without replacement and `ground_truth`.
/// A repeat whose subsampled distances are all equal scores 0.
double subsample_doctor_ranking(const std::vector<AdjudicatedInstance>& instances, int n_doctors, GroundMetric metric,
                                std::span<const double> ground_truth, const GradeScale& scale, std::uint64_t seed,
                                int repeats);

}  // namespace dupkit
