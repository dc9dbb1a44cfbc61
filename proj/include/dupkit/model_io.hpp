// Versioned JSON persistence for trained models.
#pragma once

#include <filesystem>

#include <json.hpp>

#include "dupkit/learner.hpp"

namespace dupkit {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

/// {version, mode, layer_dims, weights, biases, temperature, seed, config}.
/// Weight matrices are stored row-major as nested arrays of shape (in, out).
nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace dupkit
