#include "dupkit/learner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "dupkit/random.hpp"

namespace dupkit {

namespace {

constexpr double kLogClip = 1e-12;

// Per-layer gradient buffers, shaped like the model.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::RowVectorXd> biases;
  Eigen::VectorXd aux_weights;
  double aux_bias = 0.0;

  explicit Gradients(const MlpModel& model) {
    for (std::size_t l = 0; l < model.layers(); ++l) {
      weights.push_back(Eigen::MatrixXd::Zero(model.weights()[l].rows(), model.weights()[l].cols()));
      biases.push_back(Eigen::RowVectorXd::Zero(model.biases()[l].size()));
    }
    aux_weights = Eigen::VectorXd::Zero(model.aux_weights().size());
  }
};

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits, double temperature) {
  Eigen::MatrixXd scaled = logits / temperature;
  const Eigen::VectorXd top = scaled.rowwise().maxCoeff();
  scaled.colwise() -= top;
  Eigen::MatrixXd e = scaled.array().exp().matrix();
  const Eigen::VectorXd total = e.rowwise().sum();
  for (Eigen::Index i = 0; i < e.rows(); ++i) e.row(i) /= total(i);
  return e;
}

double cross_entropy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double t = targets(i, j);
      if (t != 0.0) total -= t * std::log(std::max(probs(i, j), kLogClip));
    }
  return total / static_cast<double>(probs.rows());
}

void check_batch(const MlpModel& model, const Batch& batch, TrainMode mode) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (model.mode() != mode) throw std::invalid_argument("model mode does not match loss mode");
  if (batch.features.cols() != model.input_dim()) throw std::invalid_argument("feature width does not match model");
  if (batch.targets.cols() != model.output_dim() || batch.targets.rows() != batch.size())
    throw std::invalid_argument("target width does not match model output");
  if (mode == TrainMode::dup) {
    for (Eigen::Index i = 0; i < batch.targets.rows(); ++i) {
      const double a = batch.targets(i, 0);
      const double b = batch.targets(i, 1);
      if (!((a == 0.0 && b == 1.0) || (a == 1.0 && b == 0.0)))
        throw std::invalid_argument("DUP targets must be one-hot binary");
    }
  }
}

// Forward and backward pass; returns the loss and fills `grads`.
double backprop(const MlpModel& model, const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                const Eigen::VectorXd& aux_targets, double aux_weight, Gradients& grads) {
  const std::size_t n_layers = model.layers();
  const double n = static_cast<double>(features.rows());
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(n_layers + 1);
  activations.push_back(features);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = activations.back() * model.weights()[l];
    z.rowwise() += model.biases()[l];
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    activations.push_back(std::move(z));
  }
  const double t = model.temperature();
  const Eigen::MatrixXd probs = row_softmax(activations.back(), t);
  double value = cross_entropy(probs, targets);

  Eigen::MatrixXd delta(probs.rows(), probs.cols());
  const Eigen::VectorXd target_mass = targets.rowwise().sum();
  for (Eigen::Index i = 0; i < probs.rows(); ++i) delta.row(i) = probs.row(i) * target_mass(i) - targets.row(i);
  delta /= (n * t);

  Eigen::MatrixXd aux_delta;
  const Eigen::MatrixXd& last_hidden = activations[n_layers - 1];
  if (model.has_aux_head() && aux_weight != 0.0) {
    Eigen::VectorXd residual = (last_hidden * model.aux_weights()).array() + model.aux_bias();
    residual -= aux_targets;
    value += aux_weight * residual.squaredNorm() / n;
    const Eigen::VectorXd scaled = residual * (2.0 * aux_weight / n);
    grads.aux_weights = last_hidden.transpose() * scaled;
    grads.aux_bias = scaled.sum();
    aux_delta = scaled * model.aux_weights().transpose();
  } else if (model.has_aux_head()) {
    grads.aux_weights.setZero();
    grads.aux_bias = 0.0;
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    grads.weights[l].noalias() = activations[l].transpose() * delta;
    grads.biases[l] = delta.colwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * model.weights()[l].transpose();
    if (l == n_layers - 1 && aux_delta.size() > 0) upstream += aux_delta;
    delta = (activations[l].array() > 0.0).select(upstream, 0.0);
  }
  return value;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    flat.insert(flat.end(), grads.weights[l].data(), grads.weights[l].data() + grads.weights[l].size());
    flat.insert(flat.end(), grads.biases[l].data(), grads.biases[l].data() + grads.biases[l].size());
  }
  if (grads.aux_weights.size() > 0) {
    flat.insert(flat.end(), grads.aux_weights.data(), grads.aux_weights.data() + grads.aux_weights.size());
    flat.push_back(grads.aux_bias);
  }
  return flat;
}

Batch gather(const Batch& full, std::span<const std::size_t> rows) {
  Batch batch;
  batch.features.resize(static_cast<Eigen::Index>(rows.size()), full.features.cols());
  batch.targets.resize(static_cast<Eigen::Index>(rows.size()), full.targets.cols());
  batch.aux_targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    batch.features.row(dst) = full.features.row(src);
    batch.targets.row(dst) = full.targets.row(src);
    batch.aux_targets(dst) = full.aux_targets(src);
  }
  return batch;
}

void check_features(std::span<const double> features, int expected) {
  if (features.size() != static_cast<std::size_t>(expected)) throw std::invalid_argument("feature length does not match model");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature");
}

}  // namespace

std::string_view to_string(TrainMode mode) { return mode == TrainMode::dup ? "dup" : "uvc"; }

TrainMode parse_train_mode(std::string_view name) {
  if (name == "dup") return TrainMode::dup;
  if (name == "uvc") return TrainMode::uvc;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must be in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (validation_fraction < 0.0 || validation_fraction >= 0.5)
    throw std::invalid_argument("validation fraction must be in [0, 0.5)");
  if (hidden.empty()) throw std::invalid_argument("need at least one hidden layer");
  for (int width : hidden)
    if (width < 1) throw std::invalid_argument("hidden widths must be positive");
  if (aux_weight < 0.0) throw std::invalid_argument("aux weight must be nonnegative");
}

Batch make_batch(std::span<const TrainExample> examples) {
  if (examples.empty()) throw std::invalid_argument("empty batch");
  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto d = static_cast<Eigen::Index>(examples.front().features.size());
  const auto k = static_cast<Eigen::Index>(examples.front().target.size());
  Batch batch;
  batch.features.resize(n, d);
  batch.targets.resize(n, k);
  batch.aux_targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(ex.features.size()) != d || static_cast<Eigen::Index>(ex.target.size()) != k)
      throw std::invalid_argument("ragged examples");
    for (Eigen::Index j = 0; j < d; ++j) batch.features(i, j) = ex.features[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < k; ++j) batch.targets(i, j) = ex.target[static_cast<std::size_t>(j)];
    batch.aux_targets(i) = ex.aux_target;
  }
  return batch;
}

std::vector<TrainExample> make_examples(const std::vector<LabeledInstance>& instances, TrainMode mode,
                                        UncertaintyKind kind, const GradeScale& scale) {
  std::vector<TrainExample> examples;
  examples.reserve(instances.size());
  for (const auto& instance : instances) {
    TrainExample ex;
    ex.features = instance.features;
    ex.group_id = instance.group_id;
    if (mode == TrainMode::dup) {
      const int positive = instance.target(kind);
      ex.target = {positive ? 0.0 : 1.0, positive ? 1.0 : 0.0};
    } else {
      if (instance.histogram.size() != scale.size()) throw std::invalid_argument("histogram does not match grade scale");
      ex.target = instance.histogram.mass();
    }
    ex.aux_target = uncertainty(kind, instance.histogram, scale);
    examples.push_back(std::move(ex));
  }
  return examples;
}

MlpModel MlpModel::initialize(std::vector<int> layer_dims, TrainMode mode, std::uint64_t seed, bool aux_head) {
  if (layer_dims.size() < 2) throw std::invalid_argument("need input and output widths");
  for (int w : layer_dims)
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  if (mode == TrainMode::dup && layer_dims.back() != 2) throw std::invalid_argument("DUP models have two outputs");
  if (aux_head && layer_dims.size() < 3) throw std::invalid_argument("aux head needs a hidden layer");
  MlpModel model;
  model.mode_ = mode;
  model.layer_dims_ = std::move(layer_dims);
  model.seed_ = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < model.layer_dims_.size(); ++l) {
    const int in = model.layer_dims_[l];
    const int out = model.layer_dims_[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(in, out);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
    model.weights_.push_back(std::move(w));
    model.biases_.push_back(Eigen::RowVectorXd::Zero(out));
  }
  if (aux_head) {
    const int in = model.layer_dims_[model.layer_dims_.size() - 2];
    const double limit = std::sqrt(6.0 / (in + 1));
    model.aux_weights_.resize(in);
    for (Eigen::Index r = 0; r < in; ++r) model.aux_weights_(r) = rng.uniform(-limit, limit);
  }
  model.config_.mode = mode;
  return model;
}

void MlpModel::set_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("temperature must be positive");
  temperature_ = t;
}

Eigen::MatrixXd MlpModel::logits(const Eigen::MatrixXd& features) const {
  if (features.cols() != input_dim()) throw std::invalid_argument("feature width does not match model");
  Eigen::MatrixXd h = features;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = h * weights_[l];
    z.rowwise() += biases_[l];
    h = l + 1 < weights_.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

Eigen::MatrixXd MlpModel::predict(const Eigen::MatrixXd& features) const {
  return row_softmax(logits(features), temperature_);
}

Eigen::VectorXd MlpModel::predict_aux(const Eigen::MatrixXd& features) const {
  if (!has_aux_head()) throw std::logic_error("model has no aux head");
  Eigen::MatrixXd h = features;
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    Eigen::MatrixXd z = h * weights_[l];
    z.rowwise() += biases_[l];
    h = z.cwiseMax(0.0);
  }
  return (h * aux_weights_).array() + aux_bias_;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    count += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  if (has_aux_head()) count += static_cast<std::size_t>(aux_weights_.size()) + 1;
  return count;
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
    flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  if (has_aux_head()) {
    flat.insert(flat.end(), aux_weights_.data(), aux_weights_.data() + aux_weights_.size());
    flat.push_back(aux_bias_);
  }
  return flat;
}

void MlpModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  auto it = flat.begin();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::copy_n(it, weights_[l].size(), weights_[l].data());
    it += weights_[l].size();
    std::copy_n(it, biases_[l].size(), biases_[l].data());
    it += biases_[l].size();
  }
  if (has_aux_head()) {
    std::copy_n(it, aux_weights_.size(), aux_weights_.data());
    it += aux_weights_.size();
    aux_bias_ = *it;
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  return a.mode_ == b.mode_ && a.layer_dims_ == b.layer_dims_ && a.temperature_ == b.temperature_ &&
         a.parameters() == b.parameters() && a.has_aux_head() == b.has_aux_head();
}

std::vector<double> forward(const MlpModel& model, std::span<const double> features) {
  check_features(features, model.input_dim());
  const Eigen::Map<const Eigen::RowVectorXd> row(features.data(), static_cast<Eigen::Index>(features.size()));
  const Eigen::MatrixXd probs = model.predict(Eigen::MatrixXd(row));
  return {probs.data(), probs.data() + probs.size()};
}

double loss(const MlpModel& model, const Batch& batch, TrainMode mode, double aux_weight) {
  check_batch(model, batch, mode);
  double value = cross_entropy(model.predict(batch.features), batch.targets);
  if (model.has_aux_head() && aux_weight != 0.0)
    value += aux_weight * (model.predict_aux(batch.features) - batch.aux_targets).squaredNorm() /
             static_cast<double>(batch.size());
  return value;
}

std::pair<double, std::vector<double>> loss_and_gradient(const MlpModel& model, const Batch& batch, TrainMode mode,
                                                         double aux_weight) {
  check_batch(model, batch, mode);
  Gradients grads(model);
  const double value = backprop(model, batch.features, batch.targets, batch.aux_targets, aux_weight, grads);
  return {value, flatten(grads)};
}

GradientCheckResult gradient_check(const MlpModel& model, const Batch& batch, TrainMode mode, double aux_weight) {
  const auto [value, analytic] = loss_and_gradient(model, batch, mode, aux_weight);
  (void)value;
  constexpr double kStep = 1e-6;
  MlpModel probe = model;
  std::vector<double> params = model.parameters();
  GradientCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + kStep;
    probe.set_parameters(params);
    const double up = loss(probe, batch, mode, aux_weight);
    params[i] = saved - kStep;
    probe.set_parameters(params);
    const double down = loss(probe, batch, mode, aux_weight);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double abs_err = std::abs(numeric - analytic[i]);
    // Relative to the gradient scale, floored at 1 so tiny gradients are judged absolutely.
    const double rel_err = abs_err / std::max({std::abs(numeric), std::abs(analytic[i]), 1.0});
    result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
    result.max_relative_error = std::max(result.max_relative_error, rel_err);
  }
  return result;
}

std::pair<std::vector<TrainExample>, std::vector<TrainExample>> split_by_group(std::vector<TrainExample> examples,
                                                                              double validation_fraction,
                                                                              std::uint64_t seed) {
  std::vector<std::string> groups;
  std::unordered_set<std::string> seen;
  for (const auto& ex : examples)
    if (seen.insert(ex.group_id).second) groups.push_back(ex.group_id);
  Rng rng(seed);
  rng.shuffle(groups);

  std::unordered_map<std::string, std::size_t> group_size;
  for (const auto& ex : examples) ++group_size[ex.group_id];
  const auto wanted = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(examples.size())));
  std::unordered_set<std::string> validation_groups;
  std::size_t taken = 0;
  for (const auto& g : groups) {
    if (taken >= wanted) break;
    validation_groups.insert(g);
    taken += group_size[g];
  }
  std::vector<TrainExample> train_part;
  std::vector<TrainExample> validation_part;
  for (auto& ex : examples) {
    if (validation_groups.count(ex.group_id))
      validation_part.push_back(std::move(ex));
    else
      train_part.push_back(std::move(ex));
  }
  return {std::move(train_part), std::move(validation_part)};
}

TrainResult train_with_report(const std::vector<TrainExample>& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("empty training set");
  const int out_dim = static_cast<int>(dataset.front().target.size());
  if (config.mode == TrainMode::dup && out_dim != 2) throw std::invalid_argument("DUP targets must have two entries");

  auto [train_set, validation_set] = split_by_group(dataset, config.validation_fraction, derive_seed(config.seed, 1));
  if (train_set.empty()) throw std::invalid_argument("validation split left no training data");

  if (config.mode == TrainMode::dup) {
    const bool any_positive = std::any_of(train_set.begin(), train_set.end(), [](const auto& ex) { return ex.target[1] == 1.0; });
    const bool any_negative = std::any_of(train_set.begin(), train_set.end(), [](const auto& ex) { return ex.target[0] == 1.0; });
    if (!(any_positive && any_negative)) std::clog << "warning: DUP training set contains a single class\n";
  }

  std::vector<int> dims;
  dims.push_back(static_cast<int>(dataset.front().features.size()));
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(out_dim);
  MlpModel model = MlpModel::initialize(dims, config.mode, derive_seed(config.seed, 0), config.aux_weight > 0.0);
  model.set_config(config);

  const Batch full_train = make_batch(train_set);
  const bool has_validation = !validation_set.empty();
  const Batch validation = has_validation ? make_batch(validation_set) : Batch{};

  Gradients grads(model);
  Gradients velocity(model);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.seed, 2));

  TrainResult result;
  result.train_size = train_set.size();
  auto evaluate = [&](int epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss(model, full_train, config.mode, config.aux_weight);
    stats.validation_loss = has_validation ? loss(model, validation, config.mode, config.aux_weight) : stats.train_loss;
    result.history.push_back(stats);
    if (epoch == 0 || stats.validation_loss < result.best_validation_loss) {
      result.best_validation_loss = stats.validation_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  };
  evaluate(0);

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const Batch batch = gather(full_train, std::span<const std::size_t>(order).subspan(start, stop - start));
      backprop(model, batch.features, batch.targets, batch.aux_targets, config.aux_weight, grads);
      for (std::size_t l = 0; l < model.layers(); ++l) {
        velocity.weights[l] = config.momentum * velocity.weights[l] + grads.weights[l];
        velocity.biases[l] = config.momentum * velocity.biases[l] + grads.biases[l];
        model.weights()[l] -= config.learning_rate * velocity.weights[l];
        model.biases()[l] -= config.learning_rate * velocity.biases[l];
      }
      if (model.has_aux_head()) {
        velocity.aux_weights = config.momentum * velocity.aux_weights + grads.aux_weights;
        velocity.aux_bias = config.momentum * velocity.aux_bias + grads.aux_bias;
        model.aux_weights() -= config.learning_rate * velocity.aux_weights;
        model.aux_bias() -= config.learning_rate * velocity.aux_bias;
      }
    }
    evaluate(epoch);
  }
  result.final_train_loss = result.history.back().train_loss;

  if (config.calibrate && has_validation) result.model = calibrate_temperature(result.model, validation_set);
  result.validation = std::move(validation_set);
  return result;
}

MlpModel train(const std::vector<TrainExample>& dataset, const TrainConfig& config) {
  return train_with_report(dataset, config).model;
}

MlpModel calibrate_temperature(const MlpModel& model, const std::vector<TrainExample>& validation) {
  if (validation.empty()) throw std::invalid_argument("empty validation set");
  const Batch batch = make_batch(validation);
  if (batch.targets.cols() != model.output_dim()) throw std::invalid_argument("validation targets do not match model");
  const Eigen::MatrixXd logits = model.logits(batch.features);
  auto objective = [&](double log_t) { return cross_entropy(row_softmax(logits, std::exp(log_t)), batch.targets); };

  constexpr double kInvPhi = 0.6180339887498949;
  double lo = -3.0;
  double hi = 3.0;
  double a = hi - kInvPhi * (hi - lo);
  double b = lo + kInvPhi * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  while (hi - lo > 1e-4) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - kInvPhi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + kInvPhi * (hi - lo);
      fb = objective(b);
    }
  }
  const double best_log_t = 0.5 * (lo + hi);
  MlpModel calibrated = model;
  // Never do worse than the uncalibrated model.
  calibrated.set_temperature(objective(best_log_t) <= objective(0.0) ? std::exp(best_log_t) : 1.0);
  return calibrated;
}

double uvc_score(const MlpModel& model, std::span<const double> features, UncertaintyKind kind, const GradeScale& scale) {
  if (model.mode() != TrainMode::uvc) throw std::invalid_argument("uvc_score needs a UVC-mode model");
  if (static_cast<std::size_t>(model.output_dim()) != scale.size())
    throw std::invalid_argument("model output does not match grade scale");
  std::vector<double> probs = forward(model, features);
  // Renormalize away the last-ulp drift of the softmax.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return uncertainty(kind, GradeHistogram(std::move(probs)), scale);
}

double dup_score(const MlpModel& model, std::span<const double> features) {
  if (model.mode() != TrainMode::dup) throw std::invalid_argument("dup_score needs a DUP-mode model");
  return forward(model, features)[1];
}

std::vector<double> score_all(const MlpModel& model, const std::vector<std::vector<double>>& features,
                              UncertaintyKind kind, const GradeScale& scale) {
  std::vector<double> scores;
  if (features.empty()) return scores;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), model.input_dim());
  for (std::size_t i = 0; i < features.size(); ++i) {
    check_features(features[i], model.input_dim());
    for (int j = 0; j < model.input_dim(); ++j) x(static_cast<Eigen::Index>(i), j) = features[i][static_cast<std::size_t>(j)];
  }
  const Eigen::MatrixXd probs = model.predict(x);
  scores.reserve(features.size());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (model.mode() == TrainMode::dup) {
      scores.push_back(probs(i, 1));
    } else {
      std::vector<double> p(probs.cols());
      for (Eigen::Index j = 0; j < probs.cols(); ++j) p[static_cast<std::size_t>(j)] = probs(i, j);
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= total;
      scores.push_back(uncertainty(kind, GradeHistogram(std::move(p)), scale));
    }
  }
  return scores;
}

}  // namespace dupkit
