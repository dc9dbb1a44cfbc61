#include "dupkit/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dupkit {

GradeScale::GradeScale(std::vector<double> grades, std::size_t referable_threshold)
    : grades_(std::move(grades)), referable_threshold_(referable_threshold) {
  if (grades_.size() < 2) throw std::invalid_argument("grade scale needs at least two grades");
  for (std::size_t i = 1; i < grades_.size(); ++i) {
    if (!(grades_[i] > grades_[i - 1]))
      throw std::invalid_argument("grades must be strictly increasing");
  }
  if (referable_threshold_ >= grades_.size())
    throw std::invalid_argument("referable threshold outside grade scale");
}

GradeScale GradeScale::ordinal(std::size_t k, std::size_t referable_threshold) {
  std::vector<double> grades(k);
  std::iota(grades.begin(), grades.end(), 1.0);
  return GradeScale(std::move(grades), referable_threshold);
}

double GradeScale::max_variance() const {
  const double half = (grades_.back() - grades_.front()) / 2.0;
  return half * half;
}

GradeHistogram::GradeHistogram(std::vector<double> mass, std::optional<int> count)
    : mass_(std::move(mass)), count_(count) {
  if (mass_.empty()) throw std::invalid_argument("empty histogram");
  double total = 0.0;
  for (double m : mass_) {
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("histogram mass must be finite and nonnegative");
    total += m;
  }
  if (std::abs(total - 1.0) > kTolerance) throw std::invalid_argument("histogram mass does not sum to 1");
  if (count_) {
    if (*count_ < 1) throw std::invalid_argument("histogram count must be positive");
    for (double m : mass_) {
      const double scaled = m * *count_;
      if (std::abs(scaled - std::round(scaled)) > kTolerance * *count_)
        throw std::invalid_argument("histogram mass is not a multiple of 1/count");
    }
  }
}

GradeHistogram GradeHistogram::point_mass(std::size_t k, std::size_t index) {
  if (index >= k) throw std::out_of_range("unknown grade");
  std::vector<double> mass(k, 0.0);
  mass[index] = 1.0;
  return GradeHistogram(std::move(mass));
}

GradeHistogram GradeHistogram::uniform(std::size_t k) {
  return GradeHistogram(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

GradeHistogram GradeHistogram::mix(const GradeHistogram& a, const GradeHistogram& b, double lambda) {
  if (a.size() != b.size()) throw std::invalid_argument("histogram length mismatch");
  std::vector<double> mass(a.size());
  for (std::size_t l = 0; l < mass.size(); ++l) mass[l] = lambda * a[l] + (1.0 - lambda) * b[l];
  return GradeHistogram(std::move(mass));
}

GradeHistogram empirical_histogram(std::span<const int> labels, const GradeScale& scale) {
  if (labels.empty()) throw std::invalid_argument("no labels");
  std::vector<int> counts(scale.size(), 0);
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= scale.size())
      throw std::out_of_range("unknown grade " + std::to_string(label));
    ++counts[static_cast<std::size_t>(label)];
  }
  const int n = static_cast<int>(labels.size());
  std::vector<double> mass(scale.size());
  for (std::size_t l = 0; l < mass.size(); ++l) mass[l] = static_cast<double>(counts[l]) / n;
  return GradeHistogram(std::move(mass), n);
}

double u_disagree(const GradeHistogram& h) {
  double sum_sq = 0.0;
  for (double m : h.mass()) sum_sq += m * m;
  return 1.0 - sum_sq;
}

double u_var(const GradeHistogram& h, const GradeScale& scale) {
  if (h.size() != scale.size()) throw std::invalid_argument("histogram length does not match grade scale");
  // Centre on the first grade so translated scales give identical roundoff.
  const double origin = scale.grade(0);
  double mean = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) mean += h[l] * (scale.grade(l) - origin);
  double var = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) {
    const double dev = scale.grade(l) - origin - mean;
    var += h[l] * dev * dev;
  }
  return var;
}

double u_entropy(const GradeHistogram& h) {
  double entropy = 0.0;
  for (double m : h.mass()) {
    if (m > 0.0) entropy -= m * std::log(m);
  }
  return entropy;
}

std::string_view to_string(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::disagree: return "disagree";
    case UncertaintyKind::variance: return "variance";
    case UncertaintyKind::entropy: return "entropy";
  }
  return "unknown";
}

UncertaintyKind parse_uncertainty_kind(std::string_view name) {
  if (name == "disagree") return UncertaintyKind::disagree;
  if (name == "variance" || name == "var") return UncertaintyKind::variance;
  if (name == "entropy") return UncertaintyKind::entropy;
  throw std::invalid_argument("unknown uncertainty kind: " + std::string(name));
}

double uncertainty(UncertaintyKind kind, const GradeHistogram& h, const GradeScale& scale) {
  switch (kind) {
    case UncertaintyKind::disagree: return u_disagree(h);
    case UncertaintyKind::variance: return u_var(h, scale);
    case UncertaintyKind::entropy: return u_entropy(h);
  }
  throw std::invalid_argument("unknown uncertainty kind");
}

double max_uncertainty(UncertaintyKind kind, const GradeScale& scale) {
  const double k = static_cast<double>(scale.size());
  switch (kind) {
    case UncertaintyKind::disagree: return 1.0 - 1.0 / k;
    case UncertaintyKind::variance: return scale.max_variance();
    case UncertaintyKind::entropy: return std::log(k);
  }
  throw std::invalid_argument("unknown uncertainty kind");
}

void UncertaintySpec::validate(const GradeScale& scale) const {
  if (!std::isfinite(threshold) || threshold < 0.0 || threshold > max_uncertainty(kind, scale))
    throw std::invalid_argument("threshold " + std::to_string(threshold) + " outside attainable range of " +
                                std::string(to_string(kind)));
}

int binarize(double score, const UncertaintySpec& spec) {
  if (std::isnan(score)) throw std::invalid_argument("NaN uncertainty score");
  return score > spec.threshold ? 1 : 0;
}

}  // namespace dupkit
