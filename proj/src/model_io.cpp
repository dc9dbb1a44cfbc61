#include "dupkit/model_io.hpp"

#include <fstream>
#include <stdexcept>

namespace dupkit {

nlohmann::json config_to_json(const TrainConfig& config) {
  return {{"mode", to_string(config.mode)},
          {"learning_rate", config.learning_rate},
          {"momentum", config.momentum},
          {"batch_size", config.batch_size},
          {"epochs", config.epochs},
          {"seed", config.seed},
          {"validation_fraction", config.validation_fraction},
          {"calibrate", config.calibrate},
          {"hidden", config.hidden},
          {"aux_weight", config.aux_weight}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig config;
  config.mode = parse_train_mode(j.at("mode").get<std::string>());
  config.learning_rate = j.at("learning_rate").get<double>();
  config.momentum = j.at("momentum").get<double>();
  config.batch_size = j.at("batch_size").get<int>();
  config.epochs = j.at("epochs").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.validation_fraction = j.at("validation_fraction").get<double>();
  config.calibrate = j.at("calibrate").get<bool>();
  config.hidden = j.at("hidden").get<std::vector<int>>();
  config.aux_weight = j.value("aux_weight", 0.0);
  return config;
}

nlohmann::json model_to_json(const MlpModel& model) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const auto& w = model.weights()[l];
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[static_cast<std::size_t>(c)] = w(r, c);
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    const auto& b = model.biases()[l];
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  nlohmann::json j = {{"version", kModelFormatVersion},
                      {"mode", to_string(model.mode())},
                      {"layer_dims", model.layer_dims()},
                      {"weights", std::move(weights)},
                      {"biases", std::move(biases)},
                      {"temperature", model.temperature()},
                      {"seed", model.seed()},
                      {"config", config_to_json(model.config())}};
  if (model.has_aux_head()) {
    const auto& a = model.aux_weights();
    j["aux_head"] = {{"weights", std::vector<double>(a.data(), a.data() + a.size())}, {"bias", model.aux_bias()}};
  }
  return j;
}

MlpModel model_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kModelFormatVersion) throw std::runtime_error("unsupported model format version");
  const TrainMode mode = parse_train_mode(j.at("mode").get<std::string>());
  const auto dims = j.at("layer_dims").get<std::vector<int>>();
  const bool aux = j.contains("aux_head");
  MlpModel model = MlpModel::initialize(dims, mode, j.at("seed").get<std::uint64_t>(), aux);
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != model.layers() || biases.size() != model.layers()) throw std::runtime_error("layer count mismatch");
  for (std::size_t l = 0; l < model.layers(); ++l) {
    auto& w = model.weights()[l];
    const auto& rows = weights[l];
    if (rows.size() != static_cast<std::size_t>(w.rows())) throw std::runtime_error("weight shape mismatch");
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(w.cols())) throw std::runtime_error("weight shape mismatch");
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)];
    }
    const auto b = biases[l].get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(model.biases()[l].size())) throw std::runtime_error("bias shape mismatch");
    for (std::size_t c = 0; c < b.size(); ++c) model.biases()[l](static_cast<Eigen::Index>(c)) = b[c];
  }
  if (aux) {
    const auto a = j.at("aux_head").at("weights").get<std::vector<double>>();
    if (a.size() != static_cast<std::size_t>(model.aux_weights().size())) throw std::runtime_error("aux head shape mismatch");
    for (std::size_t r = 0; r < a.size(); ++r) model.aux_weights()(static_cast<Eigen::Index>(r)) = a[r];
    model.aux_bias() = j.at("aux_head").at("bias").get<double>();
  }
  model.set_temperature(j.at("temperature").get<double>());
  model.set_config(config_from_json(j.at("config")));
  return model;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace dupkit
