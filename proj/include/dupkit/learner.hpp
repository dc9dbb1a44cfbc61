// Small fully connected network trained either to predict binarized
// uncertainty directly (DUP) or to predict the grade histogram (UVC).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dupkit/uncertainty.hpp"
#include "dupkit/worlds.hpp"

namespace dupkit {

enum class TrainMode { dup, uvc };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::dup;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  bool calibrate = false;
  std::vector<int> hidden = {300, 300};
  /// Weight of the auxiliary squared-error head regressing the raw
  /// uncertainty value. 0 disables the head. Experimental.
  double aux_weight = 0.0;

  void validate() const;
};

/// One training row: model input, split group, soft or one-hot target.
struct TrainExample {
  std::vector<double> features;
  std::string group_id;
  std::vector<double> target;
  double aux_target = 0.0;
};

/// Rows as matrices; one sample per row.
struct Batch {
  Eigen::MatrixXd features;
  Eigen::MatrixXd targets;
  Eigen::VectorXd aux_targets;

  Eigen::Index size() const { return features.rows(); }
};

Batch make_batch(std::span<const TrainExample> examples);

/// DUP rows get a one-hot target from the stored binary target of `kind`;
/// UVC rows get the empirical histogram.
std::vector<TrainExample> make_examples(const std::vector<LabeledInstance>& instances, TrainMode mode,
                                        UncertaintyKind kind, const GradeScale& scale);

class MlpModel {
 public:
  MlpModel() = default;

  /// Glorot-uniform weights, zero biases, T = 1.
  static MlpModel initialize(std::vector<int> layer_dims, TrainMode mode, std::uint64_t seed, bool aux_head = false);

  TrainMode mode() const { return mode_; }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int input_dim() const { return layer_dims_.front(); }
  int output_dim() const { return layer_dims_.back(); }
  std::size_t layers() const { return weights_.size(); }

  double temperature() const { return temperature_; }
  void set_temperature(double t);

  std::uint64_t seed() const { return seed_; }
  const TrainConfig& config() const { return config_; }
  void set_config(const TrainConfig& config) { config_ = config; }

  /// weights[l] has shape (in, out); logits = h W + b.
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  std::vector<Eigen::RowVectorXd>& biases() { return biases_; }
  const std::vector<Eigen::RowVectorXd>& biases() const { return biases_; }

  bool has_aux_head() const { return aux_weights_.size() > 0; }
  Eigen::VectorXd& aux_weights() { return aux_weights_; }
  const Eigen::VectorXd& aux_weights() const { return aux_weights_; }
  double& aux_bias() { return aux_bias_; }
  double aux_bias() const { return aux_bias_; }

  /// Untempered logits for a batch.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& features) const;

  /// softmax(logits / T) per row.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& features) const;

  /// Auxiliary regression output per row; requires the aux head.
  Eigen::VectorXd predict_aux(const Eigen::MatrixXd& features) const;

  /// Flat copy of every parameter; used by the optimizer and gradient checks.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  std::size_t parameter_count() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);

 private:
  TrainMode mode_ = TrainMode::dup;
  std::vector<int> layer_dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::RowVectorXd> biases_;
  Eigen::VectorXd aux_weights_;
  double aux_bias_ = 0.0;
  double temperature_ = 1.0;
  std::uint64_t seed_ = 0;
  TrainConfig config_;
};

/// Single-example forward pass. Throws on non-finite features.
std::vector<double> forward(const MlpModel& model, std::span<const double> features);

/// Mean cross-entropy (log clipped at 1e-12) plus the weighted auxiliary
/// squared error when the model has an aux head.
double loss(const MlpModel& model, const Batch& batch, TrainMode mode, double aux_weight = 0.0);

/// Loss and its gradient with respect to parameters(), in the same order.
std::pair<double, std::vector<double>> loss_and_gradient(const MlpModel& model, const Batch& batch, TrainMode mode,
                                                         double aux_weight = 0.0);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
};

/// Analytic gradient against central differences with step 1e-6.
GradientCheckResult gradient_check(const MlpModel& model, const Batch& batch, TrainMode mode, double aux_weight = 0.0);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double final_train_loss = 0.0;
  double best_validation_loss = 0.0;
  std::vector<TrainExample> validation;
  std::size_t train_size = 0;
};

/// Group-disjoint split of `examples` into (train, validation).
std::pair<std::vector<TrainExample>, std::vector<TrainExample>> split_by_group(std::vector<TrainExample> examples,
                                                                              double validation_fraction,
                                                                              std::uint64_t seed);

/// Minibatch SGD with momentum; keeps the parameters with the best
/// validation loss seen at the end of any epoch.
TrainResult train_with_report(const std::vector<TrainExample>& dataset, const TrainConfig& config);
MlpModel train(const std::vector<TrainExample>& dataset, const TrainConfig& config);

/// Fits T by golden-section search on ln T in [-3, 3]; other parameters untouched.
MlpModel calibrate_temperature(const MlpModel& model, const std::vector<TrainExample>& validation);

/// U applied to the tempered output distribution of a UVC model.
double uvc_score(const MlpModel& model, std::span<const double> features, UncertaintyKind kind, const GradeScale& scale);

/// Probability of the high-uncertainty class from a DUP model.
double dup_score(const MlpModel& model, std::span<const double> features);

/// Batched scoring: dup_score for DUP models, uvc_score for UVC models.
std::vector<double> score_all(const MlpModel& model, const std::vector<std::vector<double>>& features,
                              UncertaintyKind kind, const GradeScale& scale);

}  // namespace dupkit
