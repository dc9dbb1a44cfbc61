#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dupkit/experiment.hpp"
#include "dupkit/learner.hpp"
#include "dupkit/model_io.hpp"
#include "dupkit/oracle.hpp"

using namespace dupkit;

namespace {

MlpModel zero_model(std::vector<int> dims, TrainMode mode) {
  MlpModel model = MlpModel::initialize(std::move(dims), mode, 1);
  std::vector<double> zeros(model.parameter_count(), 0.0);
  model.set_parameters(zeros);
  return model;
}

std::vector<TrainExample> random_examples(Rng& rng, int n, int dim, TrainMode mode, int k) {
  std::vector<TrainExample> out;
  for (int i = 0; i < n; ++i) {
    TrainExample ex;
    for (int j = 0; j < dim; ++j) ex.features.push_back(rng.normal());
    ex.group_id = "g" + std::to_string(i);
    if (mode == TrainMode::dup) {
      const bool pos = rng.uniform() < 0.4;
      ex.target = {pos ? 0.0 : 1.0, pos ? 1.0 : 0.0};
    } else {
      std::vector<double> w(static_cast<std::size_t>(k));
      double total = 0.0;
      for (auto& v : w) total += (v = rng.uniform());
      for (auto& v : w) v /= total;
      ex.target = w;
    }
    ex.aux_target = rng.uniform();
    out.push_back(std::move(ex));
  }
  return out;
}

// Linearly separable: positive iff x0 > x1.
std::vector<TrainExample> separable(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainExample> out;
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    const bool pos = a > b;
    out.push_back({{a, b}, "s" + std::to_string(i), {pos ? 0.0 : 1.0, pos ? 1.0 : 0.0}, 0.0});
  }
  return out;
}

}  // namespace

TEST_CASE("forward pass") {
  const std::vector<double> x{0.3, -1.2, 2.0};
  SUBCASE("zero weights give uniform output") {
    for (double p : forward(zero_model({3, 8, 8, 4}, TrainMode::uvc), x)) CHECK(p == doctest::Approx(0.25));
  }
  SUBCASE("huge temperature flattens output") {
    MlpModel model = MlpModel::initialize({3, 8, 8, 4}, TrainMode::uvc, 5);
    model.set_temperature(1e6);
    for (double p : forward(model, x)) CHECK(std::abs(p - 0.25) < 1e-4);
  }
  SUBCASE("shifting all logits changes nothing") {
    MlpModel model = MlpModel::initialize({3, 8, 4}, TrainMode::uvc, 6);
    const auto before = forward(model, x);
    model.biases().back().array() += 17.0;
    const auto after = forward(model, x);
    for (std::size_t i = 0; i < 4; ++i) CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-12));
  }
  SUBCASE("outputs are distributions") {
    Rng rng(3);
    const MlpModel model = MlpModel::initialize({3, 8, 8, 5}, TrainMode::uvc, 7);
    for (int i = 0; i < 100; ++i) {
      const std::vector<double> f{rng.normal(0, 10), rng.normal(0, 10), rng.normal(0, 10)};
      double sum = 0.0;
      for (double p : forward(model, f)) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS(forward(zero_model({3, 4, 2}, TrainMode::dup), std::vector<double>{0.0, std::nan(""), 1.0}));
  CHECK_THROWS(forward(zero_model({3, 4, 2}, TrainMode::dup), std::vector<double>{0.0}));
  CHECK_THROWS(MlpModel::initialize({3, 4, 3}, TrainMode::dup, 0));
}

TEST_CASE("loss values") {
  const std::vector<TrainExample> uniform_rows{{{1.0, 2.0}, "a", {1, 0, 0, 0, 0}, 0}, {{0.0, 1.0}, "b", {0, 0, 1, 0, 0}, 0}};
  CHECK(loss(zero_model({2, 4, 5}, TrainMode::uvc), make_batch(uniform_rows), TrainMode::uvc) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-14));

  const std::vector<TrainExample> soft{{{1.0}, "a", {0.5, 0.5}, 0}};
  CHECK(loss(zero_model({1, 3, 2}, TrainMode::uvc), make_batch(soft), TrainMode::uvc) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  MlpModel confident = zero_model({1, 2}, TrainMode::dup);
  confident.biases()[0] << 40.0, -40.0;
  const std::vector<TrainExample> negatives{{{1.0}, "a", {1, 0}, 0}, {{-2.0}, "b", {1, 0}, 0}};
  CHECK(loss(confident, make_batch(negatives), TrainMode::dup) <= 1e-6);

  CHECK_THROWS(loss(confident, make_batch(negatives), TrainMode::uvc));
  const std::vector<TrainExample> soft_dup{{{1.0}, "a", {0.5, 0.5}, 0}};
  CHECK_THROWS(loss(confident, make_batch(soft_dup), TrainMode::dup));
}

TEST_CASE("gradient check") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto dup_rows = random_examples(rng, 6, 4, TrainMode::dup, 2);
    const auto dup_model = MlpModel::initialize({4, 8, 6, 2}, TrainMode::dup, 100 + trial);
    CHECK(gradient_check(dup_model, make_batch(dup_rows), TrainMode::dup).max_relative_error < 1e-6);

    const auto uvc_rows = random_examples(rng, 6, 3, TrainMode::uvc, 5);
    const auto uvc_model = MlpModel::initialize({3, 7, 8, 5}, TrainMode::uvc, 200 + trial);
    CHECK(gradient_check(uvc_model, make_batch(uvc_rows), TrainMode::uvc).max_relative_error < 1e-6);

    auto tempered = uvc_model;
    tempered.set_temperature(1.7);
    CHECK(gradient_check(tempered, make_batch(uvc_rows), TrainMode::uvc).max_relative_error < 1e-6);

    const auto aux_model = MlpModel::initialize({3, 6, 5}, TrainMode::uvc, 300 + trial, true);
    CHECK(gradient_check(aux_model, make_batch(uvc_rows), TrainMode::uvc, 0.1).max_relative_error < 1e-6);
  }
}

TEST_CASE("gradient vanishes at the minimum") {
  const std::vector<TrainExample> rows{{{0.4, -1.0}, "a", {0.25, 0.25, 0.25, 0.25}, 0},
                                       {{2.0, 0.5}, "b", {0.25, 0.25, 0.25, 0.25}, 0}};
  const auto model = zero_model({2, 5, 4}, TrainMode::uvc);
  const auto [value, grad] = loss_and_gradient(model, make_batch(rows), TrainMode::uvc);
  for (double g : grad) CHECK(std::abs(g) <= 1e-15);
  CHECK(gradient_check(model, make_batch(rows), TrainMode::uvc).max_absolute_error < 1e-8);
}

TEST_CASE("training") {
  TrainConfig config;
  config.hidden = {16, 16};
  config.epochs = 50;
  config.seed = 4;
  const auto data = separable(400, 1);

  SUBCASE("separable toy set") {
    const MlpModel model = train(data, config);
    int correct = 0;
    for (const auto& ex : data) correct += (dup_score(model, ex.features) > 0.5) == (ex.target[1] == 1.0);
    CHECK(correct / 400.0 > 0.95);
  }
  SUBCASE("deterministic") {
    config.epochs = 5;
    const auto a = train_with_report(data, config);
    const auto b = train_with_report(data, config);
    CHECK(a.model == b.model);
    CHECK(a.model.parameters() == b.model.parameters());
    CHECK(a.history.size() == 6);
    for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].train_loss == b.history[i].train_loss);
  }
  SUBCASE("zero learning rate keeps initial parameters") {
    config.learning_rate = 0.0;
    config.epochs = 3;
    const auto result = train_with_report(data, config);
    const auto init = MlpModel::initialize({2, 16, 16, 2}, TrainMode::dup, derive_seed(config.seed, 0));
    CHECK(result.model.parameters() == init.parameters());
  }
  SUBCASE("validation split is group-disjoint") {
    auto grouped = data;
    for (std::size_t i = 0; i < grouped.size(); ++i) grouped[i].group_id = "p" + std::to_string(i / 4);
    const auto [train_part, validation_part] = split_by_group(grouped, 0.1, 3);
    std::set<std::string> seen;
    for (const auto& ex : train_part) seen.insert(ex.group_id);
    for (const auto& ex : validation_part) CHECK(seen.count(ex.group_id) == 0);
    CHECK(train_part.size() + validation_part.size() == grouped.size());
    CHECK(validation_part.size() >= 36);
    CHECK(validation_part.size() <= 44);
  }
  SUBCASE("single-class DUP data still trains") {
    auto one_class = data;
    for (auto& ex : one_class) ex.target = {1.0, 0.0};
    config.epochs = 2;
    CHECK_NOTHROW(train(one_class, config));
  }
  SUBCASE("config validation") {
    config.validation_fraction = 0.5;
    CHECK_THROWS(train(data, config));
    config.validation_fraction = 0.1;
    config.learning_rate = -1;
    CHECK_THROWS(train(data, config));
  }
  CHECK_THROWS(train({}, config));
}

TEST_CASE("temperature calibration") {
  Rng rng(17);
  const MlpModel base = MlpModel::initialize({3, 8, 4}, TrainMode::uvc, 9);
  // Soft targets equal to the base predictions: T = 1 is optimal.
  std::vector<TrainExample> validation;
  for (int i = 0; i < 200; ++i) {
    TrainExample ex;
    ex.features = {rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 2)};
    ex.group_id = "v" + std::to_string(i);
    ex.target = forward(base, ex.features);
    validation.push_back(ex);
  }
  const Batch batch = make_batch(validation);

  const MlpModel same = calibrate_temperature(base, validation);
  CHECK(same.temperature() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(loss(same, batch, TrainMode::uvc) <= loss(base, batch, TrainMode::uvc) + 1e-9);
  CHECK(same.parameters() == base.parameters());

  MlpModel doubled = base;
  doubled.weights().back() *= 2.0;
  doubled.biases().back() *= 2.0;
  const MlpModel fixed = calibrate_temperature(doubled, validation);
  CHECK(std::abs(fixed.temperature() - 2.0) < 0.05);
  CHECK(loss(fixed, batch, TrainMode::uvc) == doctest::Approx(loss(base, batch, TrainMode::uvc)).epsilon(1e-6));

  for (int trial = 0; trial < 10; ++trial) {
    const MlpModel random = MlpModel::initialize({3, 8, 4}, TrainMode::uvc, 50 + trial);
    const MlpModel calibrated = calibrate_temperature(random, validation);
    CHECK(loss(calibrated, batch, TrainMode::uvc) <= loss(random, batch, TrainMode::uvc) + 1e-9);
    for (const auto& ex : validation) {
      const auto a = forward(random, ex.features);
      const auto b = forward(calibrated, ex.features);
      CHECK(std::max_element(a.begin(), a.end()) - a.begin() == std::max_element(b.begin(), b.end()) - b.begin());
    }
  }
  CHECK_THROWS(calibrate_temperature(base, {}));
}

TEST_CASE("scores") {
  const auto scale = GradeScale::ordinal(5);
  const std::vector<double> x{0.1, 0.2};
  const MlpModel uniform = zero_model({2, 4, 5}, TrainMode::uvc);
  CHECK(uvc_score(uniform, x, UncertaintyKind::disagree, scale) == doctest::Approx(0.8));
  CHECK(uvc_score(uniform, x, UncertaintyKind::variance, scale) == doctest::Approx(2.0));
  CHECK(uvc_score(uniform, x, UncertaintyKind::entropy, scale) == doctest::Approx(std::log(5.0)));

  MlpModel peaked = zero_model({2, 4, 5}, TrainMode::uvc);
  peaked.biases().back() << 0, 0, 800, 0, 0;
  for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance, UncertaintyKind::entropy})
    CHECK(uvc_score(peaked, x, kind, scale) == doctest::Approx(0.0));

  const MlpModel dup = zero_model({2, 4, 2}, TrainMode::dup);
  CHECK(dup_score(dup, x) == 0.5);
  Rng rng(2);
  const MlpModel random_dup = MlpModel::initialize({2, 8, 2}, TrainMode::dup, 3);
  for (int i = 0; i < 50; ++i) {
    const double s = dup_score(random_dup, std::vector<double>{rng.normal(0, 5), rng.normal(0, 5)});
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK_THROWS(dup_score(uniform, x));
  CHECK_THROWS(uvc_score(dup, x, UncertaintyKind::disagree, scale));

  const auto batched = score_all(uniform, {x, {3.0, -1.0}}, UncertaintyKind::variance, scale);
  CHECK(batched[0] == doctest::Approx(2.0));
}

TEST_CASE("DUP learns the hidden two-observation world") {
  // x = 0 hides two observations with certain, opposite grades; x = 1 is a coin flip.
  const auto world = build_discrete_world({{0.25, 0.0}, {0.0, 0.25}, {0.25, 0.25}}, {0, 0, 1});
  const auto scale = GradeScale::ordinal(2);
  REQUIRE(exact_h_dup(world, 0, UncertaintyKind::disagree, scale) == 0.0);
  std::vector<LabeledInstance> instances;
  Rng rng(12);
  const std::vector<double> p_obs{world.p_obs(0), world.p_obs(1), world.p_obs(2)};
  for (int i = 0; i < 1500; ++i) {
    const std::size_t o = rng.categorical(p_obs);
    instances.push_back(make_instance({static_cast<double>(world.obscure_map()[o])}, "w" + std::to_string(i),
                                      draw_labels(world.posterior(o), 5, rng), scale, {0.3, kVarianceThreshold}));
  }
  TrainConfig config;
  config.hidden = {16, 16};
  config.epochs = 30;
  const MlpModel model = train_model(instances, TrainMode::dup, {UncertaintyKind::disagree, 0.3}, scale, config).model;
  CHECK(dup_score(model, std::vector<double>{0.0}) < 0.1);
  CHECK(dup_score(model, std::vector<double>{1.0}) > 0.8);
}

TEST_CASE("model JSON round-trip") {
  TrainConfig config;
  config.mode = TrainMode::uvc;
  config.calibrate = true;
  config.hidden = {6, 5};
  config.seed = 77;
  MlpModel model = MlpModel::initialize({3, 6, 5, 4}, TrainMode::uvc, 77, true);
  model.set_temperature(1.2345678901234567);
  model.set_config(config);
  const auto path = std::filesystem::temp_directory_path() / "dupkit_model_roundtrip.json";
  save_model(path, model);
  const MlpModel loaded = load_model(path);
  CHECK(loaded == model);
  CHECK(loaded.parameters() == model.parameters());
  CHECK(loaded.config().hidden == config.hidden);
  CHECK(loaded.temperature() == model.temperature());
  std::filesystem::remove(path);

  auto j = model_to_json(model);
  j["version"] = 99;
  CHECK_THROWS(model_from_json(j));
  CHECK_THROWS(load_model("/nonexistent/model.json"));
}
