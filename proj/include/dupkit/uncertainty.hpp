// Grade scales, grade histograms and the concave uncertainty scores built on them.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dupkit {

/// Ordered set of grade values c_1 < ... < c_k with a referable cut.
class GradeScale {
 public:
  GradeScale(std::vector<double> grades, std::size_t referable_threshold);

  /// Grades 1, 2, ..., k.
  static GradeScale ordinal(std::size_t k, std::size_t referable_threshold = 0);

  std::size_t size() const { return grades_.size(); }
  double grade(std::size_t index) const { return grades_.at(index); }
  const std::vector<double>& grades() const { return grades_; }
  std::size_t referable_threshold() const { return referable_threshold_; }
  bool is_referable(std::size_t index) const { return index >= referable_threshold_; }

  /// Largest attainable variance, ((c_k - c_1) / 2)^2.
  double max_variance() const;

 private:
  std::vector<double> grades_;
  std::size_t referable_threshold_;
};

/// Probability mass over the k grades of a scale. Optionally remembers how
/// many raw labels it was built from.
class GradeHistogram {
 public:
  static constexpr double kTolerance = 1e-9;

  explicit GradeHistogram(std::vector<double> mass, std::optional<int> count = std::nullopt);

  static GradeHistogram point_mass(std::size_t k, std::size_t index);
  static GradeHistogram uniform(std::size_t k);

  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t index) const { return mass_[index]; }
  const std::vector<double>& mass() const { return mass_; }
  std::optional<int> count() const { return count_; }

  /// Mixture lambda * a + (1 - lambda) * b; drops the label count.
  static GradeHistogram mix(const GradeHistogram& a, const GradeHistogram& b, double lambda);

  friend bool operator==(const GradeHistogram&, const GradeHistogram&) = default;

 private:
  std::vector<double> mass_;
  std::optional<int> count_;
};

/// Builds p_hat from a multiset of 0-based grade indices.
GradeHistogram empirical_histogram(std::span<const int> labels, const GradeScale& scale);

/// Probability that two independent draws from h differ: 1 - sum_l p_l^2.
double u_disagree(const GradeHistogram& h);

/// Variance of the grade value under h.
double u_var(const GradeHistogram& h, const GradeScale& scale);

/// Shannon entropy in nats, 0 ln 0 = 0.
double u_entropy(const GradeHistogram& h);

enum class UncertaintyKind { disagree, variance, entropy };

std::string_view to_string(UncertaintyKind kind);
UncertaintyKind parse_uncertainty_kind(std::string_view name);

double uncertainty(UncertaintyKind kind, const GradeHistogram& h, const GradeScale& scale);

/// Upper end of the attainable range of `kind` on `scale`.
double max_uncertainty(UncertaintyKind kind, const GradeScale& scale);

struct UncertaintySpec {
  UncertaintyKind kind = UncertaintyKind::disagree;
  double threshold = 0.3;

  /// Throws if the threshold lies outside the attainable range on `scale`.
  void validate(const GradeScale& scale) const;
};

/// Default binarization cuts for the medical-style setting.
inline constexpr double kDisagreeThreshold = 0.3;
inline constexpr double kVarianceThreshold = 2.0 / 9.0;

/// 1 iff score > threshold. Ties go to the low-uncertainty class.
int binarize(double score, const UncertaintySpec& spec);

}  // namespace dupkit
