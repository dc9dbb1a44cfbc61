#include "dupkit/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dupkit {

void GaussianMixtureWorld::validate() const {
  if (dim < 1) throw std::invalid_argument("mixture dimension must be positive");
  if (centers.size() < 2) throw std::invalid_argument("mixture needs at least two components");
  if (weights.size() != centers.size()) throw std::invalid_argument("one weight per component required");
  if (!(variance > 0.0)) throw std::invalid_argument("mixture variance must be positive");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  for (const auto& c : centers) {
    if (c.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("center dimension mismatch");
  }
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (centers[i] == centers[j]) throw std::invalid_argument("mixture centers must be distinct");
}

std::vector<double> GaussianMixtureWorld::sample(Rng& rng) const {
  const std::size_t component = rng.categorical(weights);
  const double stddev = std::sqrt(variance);
  std::vector<double> o(static_cast<std::size_t>(dim));
  for (std::size_t j = 0; j < o.size(); ++j) o[j] = centers[component][j] + rng.normal(0.0, stddev);
  return o;
}

GaussianMixtureWorld sample_gaussian_world(int dim, int components, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("mixture dimension must be positive");
  if (components < 2) throw std::invalid_argument("mixture needs at least two components");
  Rng rng(seed);
  GaussianMixtureWorld world;
  world.dim = dim;
  const double stddev = std::sqrt(1.0 / dim);
  world.centers.assign(static_cast<std::size_t>(components), std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& center : world.centers)
    for (double& v : center) v = rng.normal(0.0, stddev);
  world.weights.assign(static_cast<std::size_t>(components), 1.0 / components);
  world.variance = 1.0;
  world.validate();
  return world;
}

GradeHistogram gm_posterior(const GaussianMixtureWorld& world, std::span<const double> o) {
  if (o.size() != static_cast<std::size_t>(world.dim)) throw std::invalid_argument("observation dimension mismatch");
  for (double v : o)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite observation");
  const std::size_t m = world.components();
  std::vector<double> log_w(m);
  for (std::size_t i = 0; i < m; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < o.size(); ++j) {
      const double diff = o[j] - world.centers[i][j];
      sq += diff * diff;
    }
    log_w[i] = std::log(world.weights[i]) - 0.5 * sq / world.variance;
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double& v : log_w) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : log_w) v /= total;
  return GradeHistogram(std::move(log_w));
}

std::vector<double> obscure(std::span<const double> o) {
  std::vector<double> x(o.size());
  std::transform(o.begin(), o.end(), x.begin(), [](double v) { return std::abs(v); });
  return x;
}

std::vector<int> draw_labels(const GradeHistogram& h, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one label");
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int& label : labels) label = static_cast<int>(rng.categorical(h.mass()));
  return labels;
}

std::vector<int> draw_labels(const GradeHistogram& h, int n, std::uint64_t seed) {
  Rng rng(seed);
  return draw_labels(h, n, rng);
}

int LabeledInstance::target(UncertaintyKind kind) const {
  switch (kind) {
    case UncertaintyKind::disagree: return target_disagree;
    case UncertaintyKind::variance: return target_var;
    case UncertaintyKind::entropy: break;
  }
  throw std::invalid_argument("instances carry no stored entropy target");
}

LabeledInstance make_instance(std::vector<double> features, std::string group_id, std::vector<int> labels,
                              const GradeScale& scale, const TargetThresholds& thresholds) {
  LabeledInstance instance;
  instance.histogram = empirical_histogram(labels, scale);
  instance.features = std::move(features);
  instance.group_id = std::move(group_id);
  instance.labels = std::move(labels);
  instance.target_disagree =
      binarize(u_disagree(instance.histogram), {UncertaintyKind::disagree, thresholds.disagree});
  instance.target_var = binarize(u_var(instance.histogram, scale), {UncertaintyKind::variance, thresholds.variance});
  return instance;
}

TargetThresholds thresholds_for(const UncertaintySpec& spec) {
  TargetThresholds thresholds;
  if (spec.kind == UncertaintyKind::disagree) thresholds.disagree = spec.threshold;
  if (spec.kind == UncertaintyKind::variance) thresholds.variance = spec.threshold;
  return thresholds;
}

std::vector<LabeledInstance> gen_gaussian_dataset(const GaussianMixtureWorld& world, int n_instances,
                                                  int labels_per_instance, const UncertaintySpec& spec,
                                                  std::uint64_t seed) {
  if (n_instances < 1) throw std::invalid_argument("need at least one instance");
  world.validate();
  const GradeScale scale = GradeScale::ordinal(world.components());
  spec.validate(scale);
  const TargetThresholds thresholds = thresholds_for(spec);

  std::vector<LabeledInstance> instances;
  instances.reserve(static_cast<std::size_t>(n_instances));
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const std::vector<double> o = world.sample(rng);
    std::vector<int> labels = draw_labels(gm_posterior(world, o), labels_per_instance, rng);
    instances.push_back(make_instance(obscure(o), "g" + std::to_string(i), std::move(labels), scale, thresholds));
  }
  return instances;
}

DiscreteWorld::DiscreteWorld(std::vector<std::vector<double>> joint, std::vector<int> obscure_map)
    : joint_(std::move(joint)), obscure_map_(std::move(obscure_map)) {
  if (joint_.empty() || joint_.front().size() < 2) throw std::invalid_argument("world needs observations and >= 2 grades");
  if (obscure_map_.size() != joint_.size()) throw std::invalid_argument("obscure map must cover every observation");
  double total = 0.0;
  for (const auto& row : joint_) {
    if (row.size() != joint_.front().size()) throw std::invalid_argument("ragged joint table");
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("joint entries must be nonnegative");
      total += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("joint table must sum to 1");
  for (const auto& row : joint_) {
    double p_o = 0.0;
    for (double p : row) p_o += p;
    if (!(p_o > 0.0)) throw std::invalid_argument("every observation needs positive mass");
    std::vector<double> post(row.size());
    for (std::size_t y = 0; y < row.size(); ++y) post[y] = row[y] / p_o;
    p_obs_.push_back(p_o);
    posteriors_.emplace_back(std::move(post));
  }
  const std::set<int> xs(obscure_map_.begin(), obscure_map_.end());
  x_values_.assign(xs.begin(), xs.end());
}

std::vector<std::size_t> DiscreteWorld::preimage(int x) const {
  std::vector<std::size_t> result;
  for (std::size_t o = 0; o < obscure_map_.size(); ++o)
    if (obscure_map_[o] == x) result.push_back(o);
  return result;
}

double DiscreteWorld::p_x(int x) const {
  double total = 0.0;
  for (std::size_t o : preimage(x)) total += p_obs_[o];
  return total;
}

DiscreteWorld build_discrete_world(const std::vector<std::vector<double>>& table, const std::vector<int>& obscure_map) {
  double total = 0.0;
  for (const auto& row : table)
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("joint entries must be nonnegative");
      total += p;
    }
  if (!(total > 0.0)) throw std::invalid_argument("joint table is all zero");
  std::vector<std::vector<double>> joint = table;
  for (auto& row : joint)
    for (double& p : row) p /= total;
  return DiscreteWorld(std::move(joint), obscure_map);
}

DiscreteWorld random_discrete_world(Rng& rng, int max_obs, int max_grades) {
  const int n_obs = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(max_obs - 1)));
  const int k = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(max_grades - 1)));
  std::vector<std::vector<double>> table(static_cast<std::size_t>(n_obs), std::vector<double>(static_cast<std::size_t>(k)));
  for (auto& row : table) {
    // Sparse rows make point-mass posteriors and exact ties show up.
    for (double& p : row) p = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
    if (std::all_of(row.begin(), row.end(), [](double p) { return p == 0.0; })) row[rng.index(row.size())] = 1.0;
  }
  const int n_x = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n_obs)));
  std::vector<int> obscure_map(static_cast<std::size_t>(n_obs));
  for (int& x : obscure_map) x = static_cast<int>(rng.index(static_cast<std::size_t>(n_x)));
  return build_discrete_world(table, obscure_map);
}

}  // namespace dupkit
