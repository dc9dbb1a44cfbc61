#include "dupkit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "dupkit/blur.hpp"
#include "dupkit/dataset_io.hpp"
#include "dupkit/experiment.hpp"
#include "dupkit/learner.hpp"
#include "dupkit/metrics.hpp"
#include "dupkit/model_io.hpp"
#include "dupkit/oracle.hpp"
#include "dupkit/ranking.hpp"

namespace dupkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown when a bias-check invariant fails.
struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kEntropyThreshold = 0.5;

struct GenOptions {
  std::string world = "gaussian";
  int dim = 3;
  int components = 5;
  int instances = 20000;
  int labels = 0;
  std::string uncertainty = "disagree";
  double threshold = 0.5;
  double test_fraction = 0.2;
  int adjudicated = 1000;
  int adjudicated_labels = 10;
  std::string world_file;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct TrainOptions {
  std::string data = ".";
  std::string mode;
  std::string uncertainty = "disagree";
  double threshold = -1.0;
  int epochs = -1;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  double validation_fraction = 0.1;
  double aux_weight = 0.0;
  bool calibrate = false;
  std::vector<int> hidden = {300, 300};
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct EvalOptions {
  std::string data = ".";
  std::vector<std::string> models;
  std::vector<std::string> uncertainty = {"disagree"};
  std::string out = ".";
};

struct BiasOptions {
  std::string world_file;
  int random = 0;
  std::vector<std::string> uncertainty = {"disagree", "variance", "entropy"};
  std::uint64_t seed = 0;
  std::string out;
};

struct RankOptions {
  std::string data = ".";
  std::string adjudicated;
  std::vector<std::string> models;
  std::vector<std::string> metrics = {"abs", "squared_w2", "binary"};
  std::vector<int> doctors;
  int repeats = 20;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct SweepOptions {
  std::string data = ".";
  std::vector<double> fractions = {0.3, 0.5, 0.7, 1.0};
  int repeats = 5;
  std::string uncertainty = "disagree";
  double threshold = -1.0;
  int epochs = -1;
  std::uint64_t seed = 0;
  std::string out = ".";
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string percent(double auc) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * auc;
  return s.str();
}

json thresholds_json(double disagree, double variance, double entropy) {
  return {{"disagree", disagree}, {"variance", variance}, {"entropy", entropy}};
}

// Manifest + grade scale of a generated data directory.
struct DataDir {
  json manifest;
  GradeScale scale = GradeScale::ordinal(2);

  double threshold(UncertaintyKind kind) const {
    return manifest.at("thresholds").at(std::string(to_string(kind))).get<double>();
  }
  int default_epochs() const { return manifest.at("default_epochs").get<int>(); }
};

DataDir open_data_dir(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw std::runtime_error("missing dataset manifest " + manifest_path.string());
  DataDir data;
  data.manifest = read_json(manifest_path);
  data.scale = GradeScale::ordinal(data.manifest.at("grades").get<std::size_t>());
  return data;
}

std::vector<LabeledInstance> read_split(const fs::path& dir, const std::string& name, const GradeScale& scale) {
  const fs::path path = dir / (name + ".csv");
  if (!fs::exists(path)) throw std::runtime_error("missing dataset file " + path.string());
  return read_dataset_csv(path, scale);
}

DiscreteWorld load_discrete_world(const fs::path& path) {
  const json j = read_json(path);
  try {
    return build_discrete_world(j.at("joint").get<std::vector<std::vector<double>>>(),
                                j.at("obscure").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed world file " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- gen

int cmd_gen(const GenOptions& opt, std::ostream& out) {
  const fs::path dir(opt.out);
  ensure_dir(dir);
  const UncertaintyKind kind = parse_uncertainty_kind(opt.uncertainty);
  json manifest = {{"command", "gen"}, {"world", opt.world}, {"seed", opt.seed}, {"test_fraction", opt.test_fraction}};
  std::vector<LabeledInstance> instances;

  if (opt.world == "gaussian") {
    const int labels = opt.labels > 0 ? opt.labels : 5;
    const UncertaintySpec spec{kind, opt.threshold};
    const auto world = sample_gaussian_world(opt.dim, opt.components, derive_seed(opt.seed, 10));
    instances = gen_gaussian_dataset(world, opt.instances, labels, spec, derive_seed(opt.seed, 11));
    const TargetThresholds t = thresholds_for(spec);
    manifest["grades"] = opt.components;
    manifest["dim"] = opt.dim;
    manifest["components"] = opt.components;
    manifest["labels_per_instance"] = labels;
    manifest["centers"] = world.centers;
    manifest["weights"] = world.weights;
    manifest["variance"] = world.variance;
    manifest["uncertainty"] = {{"kind", to_string(kind)}, {"threshold", opt.threshold}};
    manifest["thresholds"] =
        thresholds_json(t.disagree, t.variance, kind == UncertaintyKind::entropy ? opt.threshold : kEntropyThreshold);
    manifest["default_epochs"] = 100;
    if (opt.adjudicated > 0) {
      const auto adjudicated =
          gen_adjudicated_gaussian(world, opt.adjudicated, opt.adjudicated_labels, derive_seed(opt.seed, 14));
      write_adjudicated_csv(dir / "adjudicated.csv", adjudicated);
      manifest["adjudicated"] = {{"instances", opt.adjudicated}, {"labels_per_instance", opt.adjudicated_labels}};
    }
  } else if (opt.world == "blur") {
    BlurWorld world;
    if (opt.labels > 0) world.labels_per_image = opt.labels;
    instances = gen_blur_dataset(opt.instances, world, derive_seed(opt.seed, 20));
    json table = json::array();
    for (int level = 0; level <= kMaxBlurLevel; ++level) {
      const double wrong = kNoiseMassPerWrongLabel[static_cast<std::size_t>(level)];
      table.push_back({{"level", level},
                       {"true_label_mass", 1.0 - 4.0 * wrong},
                       {"wrong_label_mass", wrong},
                       {"wrong_labels", level == 0 ? 0 : 4}});
    }
    manifest["grades"] = world.class_count;
    manifest["image_size"] = {world.height, world.width};
    manifest["labels_per_instance"] = world.labels_per_image;
    manifest["texture_noise"] = world.texture_noise;
    manifest["sensor_noise"] = world.sensor_noise;
    manifest["noise_table"] = std::move(table);
    manifest["uncertainty"] = {{"kind", "disagree"}, {"threshold", 0.0}};
    manifest["thresholds"] = thresholds_json(0.0, kVarianceThreshold, kEntropyThreshold);
    manifest["default_epochs"] = 50;
  } else if (opt.world == "discrete") {
    if (opt.world_file.empty()) throw std::runtime_error("discrete world needs --world-file");
    const DiscreteWorld world = load_discrete_world(opt.world_file);
    const int labels = opt.labels > 0 ? opt.labels : 5;
    const GradeScale scale = GradeScale::ordinal(world.grades());
    const UncertaintySpec spec{kind, opt.threshold};
    spec.validate(scale);
    std::vector<double> p_obs(world.observations());
    for (std::size_t o = 0; o < p_obs.size(); ++o) p_obs[o] = world.p_obs(o);
    for (int i = 0; i < opt.instances; ++i) {
      Rng rng(derive_seed(derive_seed(opt.seed, 11), static_cast<std::uint64_t>(i)));
      const std::size_t o = rng.categorical(p_obs);
      auto drawn = draw_labels(world.posterior(o), labels, rng);
      instances.push_back(make_instance({static_cast<double>(world.obscure_map()[o])}, "d" + std::to_string(i),
                                        std::move(drawn), scale, thresholds_for(spec)));
    }
    const TargetThresholds t = thresholds_for(spec);
    manifest["grades"] = world.grades();
    manifest["labels_per_instance"] = labels;
    manifest["world_file"] = opt.world_file;
    manifest["uncertainty"] = {{"kind", to_string(kind)}, {"threshold", opt.threshold}};
    manifest["thresholds"] =
        thresholds_json(t.disagree, t.variance, kind == UncertaintyKind::entropy ? opt.threshold : kEntropyThreshold);
    manifest["default_epochs"] = 100;
  } else {
    throw std::invalid_argument("unknown world: " + opt.world);
  }

  DataSplit split = split_train_test(std::move(instances), opt.test_fraction, derive_seed(opt.seed, 12));
  write_dataset_csv(dir / "train.csv", split.train);
  write_dataset_csv(dir / "test.csv", split.test);
  manifest["instances"] = opt.instances;
  manifest["train_size"] = split.train.size();
  manifest["test_size"] = split.test.size();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  out << "wrote " << split.train.size() << " train / " << split.test.size() << " test instances to " << dir.string()
      << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- train

TrainConfig make_train_config(const TrainOptions& opt, const DataDir& data) {
  TrainConfig config;
  config.mode = parse_train_mode(opt.mode);
  config.learning_rate = opt.learning_rate;
  config.momentum = opt.momentum;
  config.batch_size = opt.batch_size;
  config.epochs = opt.epochs >= 0 ? opt.epochs : data.default_epochs();
  config.seed = opt.seed;
  config.validation_fraction = opt.validation_fraction;
  config.calibrate = opt.calibrate;
  config.hidden = opt.hidden;
  config.aux_weight = opt.aux_weight;
  return config;
}

int cmd_train(const TrainOptions& opt, std::ostream& out) {
  const DataDir data = open_data_dir(opt.data);
  const auto train = read_split(opt.data, "train", data.scale);
  const TrainConfig config = make_train_config(opt, data);
  const UncertaintyKind kind = parse_uncertainty_kind(opt.uncertainty);
  const UncertaintySpec spec{kind, opt.threshold >= 0.0 ? opt.threshold : data.threshold(kind)};

  const fs::path dir(opt.out);
  ensure_dir(dir);
  const TrainResult result = train_model(train, config.mode, spec, data.scale, config);
  const std::string stem = std::string(to_string(config.mode));
  save_model(dir / ("model_" + stem + ".json"), result.model);

  json history = json::array();
  for (const auto& e : result.history)
    history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation_loss", e.validation_loss}});
  json metrics = {{"mode", stem},
                  {"uncertainty", {{"kind", to_string(kind)}, {"threshold", spec.threshold}}},
                  {"train_size", result.train_size},
                  {"validation_size", result.validation.size()},
                  {"final_train_loss", result.final_train_loss},
                  {"best_validation_loss", result.best_validation_loss},
                  {"best_epoch", result.best_epoch},
                  {"temperature", config.calibrate ? json(result.model.temperature()) : json(nullptr)},
                  {"config", config_to_json(config)},
                  {"history", std::move(history)}};
  write_text(dir / ("metrics_" + stem + ".json"), metrics.dump(2) + "\n");
  out << stem << ": best epoch " << result.best_epoch << ", validation loss " << format_double(result.best_validation_loss)
      << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const EvalOptions& opt, std::ostream& out) {
  if (opt.models.empty()) throw std::invalid_argument("eval needs at least one --model");
  const DataDir data = open_data_dir(opt.data);
  const auto test = read_split(opt.data, "test", data.scale);
  const fs::path dir(opt.out);
  ensure_dir(dir);

  std::ostringstream table;
  table << "model,mode,uncertainty,threshold,auc,n\n";
  // (kind, mode) -> AUCs over models.
  std::map<std::pair<std::string, std::string>, std::vector<double>> by_mode;
  json report = json::array();
  for (const auto& model_path : opt.models) {
    const MlpModel model = load_model(model_path);
    if (!test.empty() && static_cast<int>(test.front().features.size()) != model.input_dim())
      throw std::invalid_argument("model " + model_path + " expects " + std::to_string(model.input_dim()) +
                                  " features, test set has " + std::to_string(test.front().features.size()));
    const std::string stem = fs::path(model_path).stem().string();
    for (const auto& kind_name : opt.uncertainty) {
      const UncertaintyKind kind = parse_uncertainty_kind(kind_name);
      const UncertaintySpec spec{kind, data.threshold(kind)};
      const auto scores = model_scores(model, test, spec, data.scale);
      const auto targets = binary_targets(test, spec, data.scale);
      const double auc = roc_auc(scores, targets);
      std::ostringstream roc;
      roc << "fpr,tpr,threshold\n";
      for (const auto& p : roc_curve(scores, targets))
        roc << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(p.threshold) << '\n';
      write_text(dir / ("roc_" + stem + "_" + std::string(to_string(kind)) + ".csv"), roc.str());
      table << stem << ',' << to_string(model.mode()) << ',' << to_string(kind) << ',' << format_double(spec.threshold)
            << ',' << format_double(auc) << ',' << test.size() << '\n';
      by_mode[{std::string(to_string(kind)), std::string(to_string(model.mode()))}].push_back(auc);
      report.push_back({{"model", model_path}, {"mode", to_string(model.mode())}, {"uncertainty", to_string(kind)},
                        {"threshold", spec.threshold}, {"auc", auc}});
    }
  }
  write_text(dir / "eval.csv", table.str());
  write_text(dir / "eval.json", report.dump(2) + "\n");

  std::ostringstream comparison;
  comparison << "uncertainty,mode,models,mean_auc_pct,std_auc_pct\n";
  for (const auto& kind_name : opt.uncertainty) {
    const std::string kind(to_string(parse_uncertainty_kind(kind_name)));
    for (const std::string mode : {"dup", "uvc"}) {
      const auto it = by_mode.find({kind, mode});
      if (it == by_mode.end()) continue;
      comparison << kind << ',' << mode << ',' << it->second.size() << ',' << percent(mean(it->second)) << ','
                 << percent(stddev(it->second)) << '\n';
      out << kind << " " << mode << ": " << percent(mean(it->second)) << "% AUC (" << it->second.size() << " models)\n";
    }
  }
  write_text(dir / "comparison.csv", comparison.str());
  return kSuccess;
}

// ---------------------------------------------------------------- bias-check

json bias_json(const DiscreteWorld& world, UncertaintyKind kind, bool& ok) {
  const GradeScale scale = GradeScale::ordinal(world.grades());
  if (kind == UncertaintyKind::entropy) {
    // No closed form; only the sign and the tower rule are checked.
    json per_x = json::array();
    double mean_dup = 0.0;
    double mean_true = 0.0;
    double bias = 0.0;
    bool sign_ok = true;
    for (int x : world.x_values()) {
      const double px = world.p_x(x);
      const double dup = exact_h_dup(world, x, kind, scale);
      const double uvc = exact_h_uvc(world, x, kind, scale);
      if (uvc < dup - 1e-12) sign_ok = false;
      mean_dup += px * dup;
      bias += px * (uvc - dup);
      per_x.push_back({{"x", x}, {"p_x", px}, {"h_dup", dup}, {"h_uvc", uvc}});
    }
    for (std::size_t o = 0; o < world.observations(); ++o) mean_true += world.p_obs(o) * u_entropy(world.posterior(o));
    const bool tower_ok = std::abs(mean_dup - mean_true) <= 1e-12;
    ok = ok && sign_ok && tower_ok;
    return {{"kind", "entropy"},   {"empirical_bias", bias},  {"formula_bias", nullptr},
            {"per_x", per_x},      {"tower_ok", tower_ok},    {"sign_ok", sign_ok},
            {"corollary_ok", nullptr}};
  }
  const BiasReport report = bias_report(world, kind, scale);
  const InvariantCheck check = check_invariants(report);
  ok = ok && check.ok();
  json per_x = json::array();
  for (const auto& e : report.per_x) per_x.push_back({{"x", e.x}, {"p_x", e.p_x}, {"h_dup", e.h_dup}, {"h_uvc", e.h_uvc}});
  return {{"kind", to_string(kind)},
          {"empirical_bias", report.empirical_bias},
          {"formula_bias", report.formula_bias},
          {"per_x", per_x},
          {"tower_ok", check.tower_ok},
          {"sign_ok", check.sign_ok},
          {"corollary_ok", check.corollary_ok}};
}

int cmd_bias_check(const BiasOptions& opt, std::ostream& out) {
  std::vector<UncertaintyKind> kinds;
  for (const auto& name : opt.uncertainty) kinds.push_back(parse_uncertainty_kind(name));
  bool ok = true;
  json result;
  if (!opt.world_file.empty()) {
    const DiscreteWorld world = load_discrete_world(opt.world_file);
    json reports = json::array();
    for (UncertaintyKind kind : kinds) reports.push_back(bias_json(world, kind, ok));
    result = {{"world", opt.world_file}, {"reports", reports}, {"ok", ok}};
    for (const auto& r : reports) {
      out << r.at("kind").get<std::string>() << ": empirical_bias " << format_double(r.at("empirical_bias").get<double>());
      if (!r.at("formula_bias").is_null()) out << ", formula_bias " << format_double(r.at("formula_bias").get<double>());
      out << "\n";
    }
  } else if (opt.random > 0) {
    Rng rng(opt.seed);
    int failures = 0;
    json worlds = json::array();
    for (int i = 0; i < opt.random; ++i) {
      const DiscreteWorld world = random_discrete_world(rng);
      bool world_ok = true;
      json reports = json::array();
      for (UncertaintyKind kind : kinds) reports.push_back(bias_json(world, kind, world_ok));
      if (!world_ok) ++failures;
      ok = ok && world_ok;
      worlds.push_back({{"index", i}, {"ok", world_ok}, {"reports", reports}});
    }
    result = {{"random_worlds", opt.random}, {"seed", opt.seed}, {"failures", failures}, {"ok", ok}, {"worlds", worlds}};
    out << opt.random << " random worlds checked, " << failures << " failed\n";
  } else {
    throw std::invalid_argument("bias-check needs --world or --random N");
  }
  if (!opt.out.empty()) {
    const fs::path path(opt.out);
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    write_text(path, result.dump(2) + "\n");
  } else {
    out << result.dump(2) << "\n";
  }
  if (!ok) throw InvariantFailure("bias-check invariant violated");
  return kSuccess;
}

// ---------------------------------------------------------------- rank

int cmd_rank(const RankOptions& opt, std::ostream& out) {
  const DataDir data = open_data_dir(opt.data);
  const fs::path adjudicated_path = opt.adjudicated.empty() ? fs::path(opt.data) / "adjudicated.csv" : fs::path(opt.adjudicated);
  if (!fs::exists(adjudicated_path)) throw std::runtime_error("missing adjudicated set " + adjudicated_path.string());
  const auto instances = read_adjudicated_csv(adjudicated_path);
  if (instances.empty()) throw std::runtime_error("adjudicated set is empty");

  std::vector<GroundMetric> metrics;
  for (const auto& name : opt.metrics) metrics.push_back(parse_ground_metric(name));
  std::vector<int> doctors = opt.doctors;
  if (doctors.empty()) {
    std::size_t fewest = instances.front().labels.size();
    for (const auto& instance : instances) fewest = std::min(fewest, instance.labels.size());
    doctors.resize(fewest);
    std::iota(doctors.begin(), doctors.end(), 1);
  }
  const int most = *std::max_element(doctors.begin(), doctors.end());
  for (const auto& instance : instances)
    if (instance.labels.size() < static_cast<std::size_t>(most))
      throw std::invalid_argument("instance " + instance.group_id + " has fewer than " + std::to_string(most) + " labels");

  std::vector<std::pair<std::string, MlpModel>> models;
  for (const auto& path : opt.models) models.emplace_back(fs::path(path).stem().string(), load_model(path));

  const fs::path dir(opt.out);
  ensure_dir(dir);
  std::ostringstream rank_csv;
  rank_csv << "model,mode,metric,spearman\n";
  for (const auto& row : rank_models(models, instances, metrics, data.scale)) {
    rank_csv << row.model << ',' << to_string(row.mode) << ',' << to_string(row.metric) << ','
             << format_double(row.spearman) << '\n';
    out << row.model << " " << to_string(row.metric) << ": spearman " << format_double(row.spearman) << "\n";
  }
  write_text(dir / "rank.csv", rank_csv.str());

  std::ostringstream sub_csv;
  sub_csv << "n_doctors,metric,mean_spearman\n";
  for (const auto& row : doctor_subsampling_curve(instances, doctors, metrics, data.scale, opt.seed, opt.repeats))
    sub_csv << row.n_doctors << ',' << to_string(row.metric) << ',' << format_double(row.mean_spearman) << '\n';
  write_text(dir / "subsample.csv", sub_csv.str());
  return kSuccess;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  const DataDir data = open_data_dir(opt.data);
  const auto train = read_split(opt.data, "train", data.scale);
  const auto test = read_split(opt.data, "test", data.scale);
  const UncertaintyKind kind = parse_uncertainty_kind(opt.uncertainty);
  const UncertaintySpec spec{kind, opt.threshold >= 0.0 ? opt.threshold : data.threshold(kind)};
  TrainConfig config;
  config.epochs = opt.epochs >= 0 ? opt.epochs : data.default_epochs();
  config.seed = opt.seed;

  const fs::path dir(opt.out);
  ensure_dir(dir);
  std::ostringstream csv;
  csv << "fraction,mode,mean_auc,std_auc\n";
  for (const auto& row : train_size_sweep(train, test, opt.fractions, config, opt.repeats, spec, data.scale)) {
    csv << format_double(row.fraction) << ',' << to_string(row.mode) << ',' << format_double(row.mean_auc) << ','
        << format_double(row.std_auc) << '\n';
    out << "fraction " << row.fraction << " " << to_string(row.mode) << ": " << percent(row.mean_auc) << " +- "
        << percent(row.std_auc) << "\n";
  }
  write_text(dir / "sweep.csv", csv.str());
  return kSuccess;
}

// Replaces `--config PATH` after the subcommand with the file's options.
// Options given on the command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 3) return args;
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> result(args.begin(), args.begin() + 2);
  if (!path.empty()) {
    if (!fs::exists(path)) throw std::invalid_argument("config file not found: " + path);
    std::set<std::string> given;
    for (const auto& a : rest)
      if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
      if (item.name == "++" || item.name == "--" || given.count(item.name)) continue;
      if (!item.parents.empty() && item.parents.front() != "default" && item.parents.front() != args[1]) continue;
      if (item.inputs.size() == 1 && (item.inputs.front() == "true" || item.inputs.front() == "false")) {
        if (item.inputs.front() == "true") result.push_back("--" + item.name);
        continue;
      }
      result.push_back("--" + item.name);
      result.insert(result.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  result.insert(result.end(), rest.begin(), rest.end());
  return result;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Direct uncertainty prediction vs. uncertainty via classification experiments", "dupkit"};
  app.require_subcommand(1);
  std::string config_path;

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset with a group-disjoint 80/20 split");
  gen_cmd->add_option("--config", config_path, "Read options from a key = value file");
  gen_cmd->add_option("--world", gen.world, "gaussian | blur | discrete")->check(CLI::IsMember({"gaussian", "blur", "discrete"}));
  gen_cmd->add_option("--dim", gen.dim, "Gaussian world dimension");
  gen_cmd->add_option("--components", gen.components, "Gaussian mixture components (grades)");
  gen_cmd->add_option("--instances", gen.instances, "Number of instances");
  gen_cmd->add_option("--labels", gen.labels, "Labels per instance (default 5, blur 3)");
  gen_cmd->add_option("--uncertainty", gen.uncertainty, "Target uncertainty kind")
      ->check(CLI::IsMember({"disagree", "variance", "entropy"}));
  gen_cmd->add_option("--threshold", gen.threshold, "Binarization threshold");
  gen_cmd->add_option("--test-fraction", gen.test_fraction, "Fraction of groups held out");
  gen_cmd->add_option("--adjudicated", gen.adjudicated, "Adjudicated instances to generate (Gaussian world)");
  gen_cmd->add_option("--adjudicated-labels", gen.adjudicated_labels, "Labels per adjudicated instance");
  gen_cmd->add_option("--world-file", gen.world_file, "Discrete world JSON");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--out", gen.out, "Output directory");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a DUP or UVC model");
  train_cmd->add_option("--config", config_path, "Read options from a key = value file");
  train_cmd->add_option("--data", train.data, "Dataset directory");
  train_cmd->add_option("--mode", train.mode, "dup | uvc")->required()->check(CLI::IsMember({"dup", "uvc"}));
  train_cmd->add_option("--uncertainty", train.uncertainty, "Target kind for DUP")
      ->check(CLI::IsMember({"disagree", "variance", "entropy"}));
  train_cmd->add_option("--threshold", train.threshold, "Override the manifest threshold");
  train_cmd->add_option("--epochs", train.epochs, "Epochs (default from manifest)");
  train_cmd->add_option("--learning-rate", train.learning_rate);
  train_cmd->add_option("--momentum", train.momentum);
  train_cmd->add_option("--batch-size", train.batch_size);
  train_cmd->add_option("--validation-fraction", train.validation_fraction);
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer widths");
  train_cmd->add_option("--aux-weight", train.aux_weight, "Auxiliary raw-uncertainty regression weight (experimental)");
  train_cmd->add_flag("--calibrate", train.calibrate, "Fit a temperature on the validation split");
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--out", train.out, "Output directory");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score models on the test split");
  eval_cmd->add_option("--config", config_path, "Read options from a key = value file");
  eval_cmd->add_option("--data", eval.data, "Dataset directory");
  eval_cmd->add_option("--model", eval.models, "Model JSON (repeatable)")->required();
  eval_cmd->add_option("--uncertainty", eval.uncertainty, "Uncertainty kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"disagree", "variance", "entropy"}));
  eval_cmd->add_option("--out", eval.out, "Output directory");

  BiasOptions bias;
  auto* bias_cmd = app.add_subcommand("bias-check", "Exact DUP/UVC bias on discrete worlds");
  bias_cmd->add_option("--config", config_path, "Read options from a key = value file");
  bias_cmd->add_option("--world", bias.world_file, "Discrete world JSON");
  bias_cmd->add_option("--random", bias.random, "Check N random worlds instead");
  bias_cmd->add_option("--uncertainty", bias.uncertainty, "Uncertainty kinds")
      ->delimiter(',')
      ->check(CLI::IsMember({"disagree", "variance", "entropy"}));
  bias_cmd->add_option("--seed", bias.seed);
  bias_cmd->add_option("--out", bias.out, "Report path (default stdout)");

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank models against adjudicated Wasserstein disagreement");
  rank_cmd->add_option("--config", config_path, "Read options from a key = value file");
  rank_cmd->add_option("--data", rank.data, "Dataset directory");
  rank_cmd->add_option("--adjudicated", rank.adjudicated, "Adjudicated CSV (default DATA/adjudicated.csv)");
  rank_cmd->add_option("--model", rank.models, "Model JSON (repeatable)");
  rank_cmd->add_option("--metrics", rank.metrics, "Ground metrics")
      ->delimiter(',')
      ->check(CLI::IsMember({"abs", "squared_w2", "binary"}));
  rank_cmd->add_option("--doctors", rank.doctors, "Doctor counts for subsampling")->delimiter(',');
  rank_cmd->add_option("--repeats", rank.repeats);
  rank_cmd->add_option("--seed", rank.seed);
  rank_cmd->add_option("--out", rank.out, "Output directory");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train-size sweep of DUP vs UVC");
  sweep_cmd->add_option("--config", config_path, "Read options from a key = value file");
  sweep_cmd->add_option("--data", sweep.data, "Dataset directory");
  sweep_cmd->add_option("--fractions", sweep.fractions, "Train fractions")->delimiter(',');
  sweep_cmd->add_option("--repeats", sweep.repeats);
  sweep_cmd->add_option("--uncertainty", sweep.uncertainty)->check(CLI::IsMember({"disagree", "variance"}));
  sweep_cmd->add_option("--threshold", sweep.threshold);
  sweep_cmd->add_option("--epochs", sweep.epochs);
  sweep_cmd->add_option("--seed", sweep.seed);
  sweep_cmd->add_option("--out", sweep.out, "Output directory");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  std::vector<const char*> argv;
  for (const auto& a : expanded) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (bias_cmd->parsed()) return cmd_bias_check(bias, out);
    if (rank_cmd->parsed()) return cmd_rank(rank, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
  } catch (const InvariantFailure& e) {
    err << "error: " << e.what() << "\n";
    return kInvariantViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace dupkit::cli
