// Synthetic data-generating processes with known ground truth.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dupkit/random.hpp"
#include "dupkit/uncertainty.hpp"

namespace dupkit {

/// Uniform-or-weighted mixture of isotropic Gaussians sharing one variance.
struct GaussianMixtureWorld {
  int dim = 0;
  std::vector<std::vector<double>> centers;
  std::vector<double> weights;
  double variance = 1.0;

  std::size_t components() const { return centers.size(); }
  void validate() const;
  /// Draws o from the mixture.
  std::vector<double> sample(Rng& rng) const;
};

/// Centers i.i.d. N(0, I/d), uniform weights, unit variance.
GaussianMixtureWorld sample_gaussian_world(int dim, int components, std::uint64_t seed);

/// Posterior over mixture components at o.
GradeHistogram gm_posterior(const GaussianMixtureWorld& world, std::span<const double> o);

/// The obscuring map x = |o|, componentwise.
std::vector<double> obscure(std::span<const double> o);

/// n i.i.d. grade indices drawn from h.
std::vector<int> draw_labels(const GradeHistogram& h, int n, Rng& rng);
std::vector<int> draw_labels(const GradeHistogram& h, int n, std::uint64_t seed);

/// One model-visible example with its raw labels and derived targets.
struct LabeledInstance {
  std::vector<double> features;
  std::string group_id;
  std::vector<int> labels;
  GradeHistogram histogram{std::vector<double>{1.0, 0.0}};
  int target_disagree = 0;
  int target_var = 0;

  int target(UncertaintyKind kind) const;
  friend bool operator==(const LabeledInstance&, const LabeledInstance&) = default;
};

/// Binarization cuts used when a dataset carries both target columns.
struct TargetThresholds {
  double disagree = kDisagreeThreshold;
  double variance = kVarianceThreshold;
};

/// Fills histogram and both binary targets from `labels`.
LabeledInstance make_instance(std::vector<double> features, std::string group_id, std::vector<int> labels,
                              const GradeScale& scale, const TargetThresholds& thresholds);

/// Threshold pair in which `spec` overrides the matching default.
TargetThresholds thresholds_for(const UncertaintySpec& spec);

std::vector<LabeledInstance> gen_gaussian_dataset(const GaussianMixtureWorld& world, int n_instances,
                                                  int labels_per_instance, const UncertaintySpec& spec,
                                                  std::uint64_t seed);

/// Finite joint distribution p(o, y) with an obscuring table o -> x.
class DiscreteWorld {
 public:
  DiscreteWorld(std::vector<std::vector<double>> joint, std::vector<int> obscure_map);

  std::size_t observations() const { return joint_.size(); }
  std::size_t grades() const { return joint_.front().size(); }
  const std::vector<std::vector<double>>& joint() const { return joint_; }
  const std::vector<int>& obscure_map() const { return obscure_map_; }

  double p_obs(std::size_t o) const { return p_obs_[o]; }
  /// E[Y | O = o] as a histogram over grades.
  const GradeHistogram& posterior(std::size_t o) const { return posteriors_[o]; }

  /// Distinct obscured values, ascending.
  const std::vector<int>& x_values() const { return x_values_; }
  std::vector<std::size_t> preimage(int x) const;
  double p_x(int x) const;

 private:
  std::vector<std::vector<double>> joint_;
  std::vector<int> obscure_map_;
  std::vector<double> p_obs_;
  std::vector<GradeHistogram> posteriors_;
  std::vector<int> x_values_;
};

/// Normalizes a nonnegative table and validates the obscuring map.
DiscreteWorld build_discrete_world(const std::vector<std::vector<double>>& table, const std::vector<int>& obscure_map);

/// Random world with between 2 and max_obs observations and 2..max_grades grades.
DiscreteWorld random_discrete_world(Rng& rng, int max_obs = 8, int max_grades = 5);

}  // namespace dupkit
