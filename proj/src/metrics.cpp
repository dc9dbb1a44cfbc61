#include "dupkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dupkit {

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double roc_auc(std::span<const double> scores, std::span<const int> targets) {
  if (scores.size() != targets.size()) throw std::invalid_argument("scores and targets differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  std::size_t positives = 0;
  for (int t : targets) {
    if (t != 0 && t != 1) throw std::invalid_argument("targets must be 0/1");
    positives += static_cast<std::size_t>(t);
  }
  const std::size_t negatives = targets.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("AUC undefined: targets contain a single class");
  const std::vector<double> ranks = midranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (targets[i] == 1) rank_sum += ranks[i];
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> targets) {
  if (scores.size() != targets.size()) throw std::invalid_argument("scores and targets differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double positives = 0.0;
  for (int t : targets) positives += t;
  const double negatives = static_cast<double>(targets.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw std::invalid_argument("AUC undefined: targets contain a single class");

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (targets[order[i]] == 1)
      tp += 1.0;
    else
      fp += 1.0;
    if (i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]])
      curve.push_back({fp / negatives, tp / positives, scores[order[i]]});
  }
  return curve;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vectors differ in length");
  if (a.size() < 2) throw std::invalid_argument("correlation needs at least two points");
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("correlation undefined for a constant vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vectors differ in length");
  const std::vector<double> ra = midranks(a);
  const std::vector<double> rb = midranks(b);
  return pearson(ra, rb);
}

RankingReport binary_report(std::vector<double> scores, const std::vector<int>& targets) {
  RankingReport report;
  report.auc = roc_auc(scores, targets);
  report.n = scores.size();
  report.scores = std::move(scores);
  report.targets.assign(targets.begin(), targets.end());
  return report;
}

RankingReport continuous_report(std::vector<double> scores, std::vector<double> targets) {
  RankingReport report;
  report.spearman = spearman(scores, targets);
  report.n = scores.size();
  report.scores = std::move(scores);
  report.targets = std::move(targets);
  return report;
}

}  // namespace dupkit
