// Rank-based evaluation metrics.
#pragma once

#include <span>
#include <vector>

namespace dupkit {

/// 1-based ranks with ties given the mean of the ranks they span.
std::vector<double> midranks(std::span<const double> values);

/// Mann-Whitney AUC: P(score+ > score-) + P(tie) / 2.
double roc_auc(std::span<const double> scores, std::span<const int> targets);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Points for every distinct score threshold, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> targets);

/// Pearson correlation of midranks.
double spearman(std::span<const double> a, std::span<const double> b);

double pearson(std::span<const double> a, std::span<const double> b);

struct RankingReport {
  std::vector<double> scores;
  std::vector<double> targets;
  std::size_t n = 0;
  double auc = -1.0;       // set when targets are binary
  double spearman = -2.0;  // set when targets are continuous
};

RankingReport binary_report(std::vector<double> scores, const std::vector<int>& targets);
RankingReport continuous_report(std::vector<double> scores, std::vector<double> targets);

}  // namespace dupkit
