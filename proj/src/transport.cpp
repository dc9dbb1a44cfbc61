#include "dupkit/transport.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dupkit {

std::string_view to_string(GroundMetric metric) {
  switch (metric) {
    case GroundMetric::abs: return "abs";
    case GroundMetric::squared_w2: return "squared_w2";
    case GroundMetric::binary: return "binary";
  }
  return "unknown";
}

GroundMetric parse_ground_metric(std::string_view name) {
  if (name == "abs") return GroundMetric::abs;
  if (name == "squared_w2" || name == "w2") return GroundMetric::squared_w2;
  if (name == "binary") return GroundMetric::binary;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

double ground_cost(GroundMetric metric, std::size_t r, std::size_t t, const GradeScale& scale) {
  const double diff = scale.grade(r) - scale.grade(t);
  switch (metric) {
    case GroundMetric::abs: return std::abs(diff);
    case GroundMetric::squared_w2: return diff * diff;
    case GroundMetric::binary: return r == t ? 0.0 : 1.0;
  }
  throw std::invalid_argument("unknown metric");
}

std::pair<double, TransportPlan> brute_force_wasserstein(const GradeHistogram& source, const GradeHistogram& target,
                                                         GroundMetric metric, const GradeScale& scale) {
  if (source.size() != scale.size() || target.size() != scale.size())
    throw std::invalid_argument("histogram length does not match grade scale");
  std::vector<std::size_t> rs;
  std::vector<std::size_t> ts;
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (source[i] > 0.0) rs.push_back(i);
    if (target[i] > 0.0) ts.push_back(i);
  }
  if (rs.size() > kMaxTransportSupport || ts.size() > kMaxTransportSupport)
    throw std::invalid_argument("support too large for exact transport");

  const std::size_t nr = rs.size();
  const std::size_t nt = ts.size();
  std::vector<double> supply(nr);
  std::vector<double> demand(nt);
  for (std::size_t a = 0; a < nr; ++a) supply[a] = source[rs[a]];
  for (std::size_t b = 0; b < nt; ++b) demand[b] = target[ts[b]];
  std::vector<std::vector<double>> cost(nr, std::vector<double>(nt));
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = 0; b < nt; ++b) cost[a][b] = ground_cost(metric, rs[a], ts[b], scale);
  std::vector<std::vector<double>> flow(nr, std::vector<double>(nt, 0.0));

  // Mass differences below this are treated as roundoff when choosing a bottleneck.
  constexpr double kSlack = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Successive shortest paths. Nodes 0..nr-1 are sources, nr..nr+nt-1 targets.
  const std::size_t n = nr + nt;
  for (std::size_t iteration = 0; iteration < 4 * (n + 1) * (n + 1); ++iteration) {
    std::vector<double> dist(n, kInf);
    std::vector<std::ptrdiff_t> prev(n, -1);
    bool any_supply = false;
    for (std::size_t a = 0; a < nr; ++a)
      if (supply[a] > 0.0) {
        dist[a] = 0.0;
        any_supply = true;
      }
    if (!any_supply) break;
    // Bellman-Ford over forward arcs r->t and residual backward arcs t->r.
    for (std::size_t round = 0; round < n; ++round) {
      bool changed = false;
      for (std::size_t a = 0; a < nr; ++a) {
        if (dist[a] == kInf) continue;
        for (std::size_t b = 0; b < nt; ++b) {
          const double d = dist[a] + cost[a][b];
          if (d < dist[nr + b] - 1e-15) {
            dist[nr + b] = d;
            prev[nr + b] = static_cast<std::ptrdiff_t>(a);
            changed = true;
          }
        }
      }
      for (std::size_t b = 0; b < nt; ++b) {
        if (dist[nr + b] == kInf) continue;
        for (std::size_t a = 0; a < nr; ++a) {
          if (flow[a][b] <= 0.0) continue;
          const double d = dist[nr + b] - cost[a][b];
          if (d < dist[a] - 1e-15) {
            dist[a] = d;
            prev[a] = static_cast<std::ptrdiff_t>(nr + b);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    std::ptrdiff_t sink = -1;
    for (std::size_t b = 0; b < nt; ++b) {
      if (demand[b] <= kSlack || dist[nr + b] == kInf) continue;
      if (sink < 0 || dist[nr + b] < dist[static_cast<std::size_t>(sink)]) sink = static_cast<std::ptrdiff_t>(nr + b);
    }
    if (sink < 0) break;

    // Walk back to the originating source and find the bottleneck.
    double bottleneck = kInf;
    std::size_t node = static_cast<std::size_t>(sink);
    while (prev[node] >= 0) {
      const auto from = static_cast<std::size_t>(prev[node]);
      if (node < nr) bottleneck = std::min(bottleneck, flow[node][from - nr]);
      node = from;
    }
    const std::size_t origin = node;
    bottleneck = std::min(bottleneck, supply[origin]);
    const double sink_demand = demand[static_cast<std::size_t>(sink) - nr];
    if (sink_demand + kSlack < bottleneck) bottleneck = sink_demand;
    if (!(bottleneck > 0.0)) break;

    node = static_cast<std::size_t>(sink);
    while (prev[node] >= 0) {
      const auto from = static_cast<std::size_t>(prev[node]);
      if (node >= nr) {
        flow[from][node - nr] += bottleneck;
      } else {
        flow[node][from - nr] -= bottleneck;
        if (flow[node][from - nr] < 0.0) flow[node][from - nr] = 0.0;
      }
      node = from;
    }
    supply[origin] -= bottleneck;
    if (supply[origin] < kSlack) supply[origin] = 0.0;
    demand[static_cast<std::size_t>(sink) - nr] -= bottleneck;
  }

  TransportPlan result;
  result.plan.assign(scale.size(), std::vector<double>(scale.size(), 0.0));
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = 0; b < nt; ++b) {
      result.plan[rs[a]][ts[b]] = flow[a][b];
      result.cost += flow[a][b] * cost[a][b];
    }
  const double distance = metric == GroundMetric::squared_w2 ? std::sqrt(result.cost) : result.cost;
  return {distance, std::move(result)};
}

}  // namespace dupkit
