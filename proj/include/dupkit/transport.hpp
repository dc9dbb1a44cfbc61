// Exact min-cost transport between small discrete histograms.
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "dupkit/uncertainty.hpp"

namespace dupkit {

enum class GroundMetric { abs, squared_w2, binary };

std::string_view to_string(GroundMetric metric);
GroundMetric parse_ground_metric(std::string_view name);

/// Cost d(r, t) between grade indices.
double ground_cost(GroundMetric metric, std::size_t r, std::size_t t, const GradeScale& scale);

struct TransportPlan {
  /// plan[r][t] over the full grade range of source x target.
  std::vector<std::vector<double>> plan;
  /// Expected ground cost under the plan.
  double cost = 0.0;
};

inline constexpr std::size_t kMaxTransportSupport = 12;

/// Optimal transport by successive shortest paths on the bipartite support
/// graph. Returns the distance (square root of the expected cost for
/// squared_w2) and the optimal plan.
std::pair<double, TransportPlan> brute_force_wasserstein(const GradeHistogram& source, const GradeHistogram& target,
                                                         GroundMetric metric, const GradeScale& scale);

}  // namespace dupkit
