#include <doctest.h>

#include <cmath>
#include <vector>

#include "dupkit/oracle.hpp"
#include "dupkit/transport.hpp"

using namespace dupkit;

namespace {

// Two observations hidden behind one x, with opposite certain grades.
DiscreteWorld w2() { return build_discrete_world({{0.5, 0.0}, {0.0, 0.5}}, {0, 0}); }

GradeHistogram random_histogram(Rng& rng, std::size_t k, double zero_rate = 0.3) {
  std::vector<double> w(k, 0.0);
  double total = 0.0;
  for (auto& v : w) {
    if (rng.uniform() < zero_rate) continue;
    v = rng.uniform(0.01, 1.0);
    total += v;
  }
  if (total == 0.0) {
    w[rng.index(k)] = 1.0;
    total = 1.0;
  }
  for (auto& v : w) v /= total;
  return GradeHistogram(w);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// 0.01 grid over [-6, 6] of two unit Gaussians at +-1, hidden by |o|.
DiscreteWorld gridded_two_gaussians() {
  std::vector<std::vector<double>> joint;
  std::vector<int> map;
  for (int i = -600; i <= 600; ++i) {
    const double o = i * 0.01;
    joint.push_back({std::exp(-0.5 * (o + 1) * (o + 1)), std::exp(-0.5 * (o - 1) * (o - 1))});
    map.push_back(std::abs(i));
  }
  return build_discrete_world(joint, map);
}

}  // namespace

TEST_CASE("injective obscuring map has no bias") {
  const auto world = build_discrete_world({{0.3, 0.1}, {0.2, 0.4}}, {0, 1});
  const auto scale = GradeScale::ordinal(2);
  for (int x : world.x_values()) {
    const auto& post = world.posterior(static_cast<std::size_t>(x));
    CHECK(exact_h_dup(world, x, UncertaintyKind::disagree, scale) == doctest::Approx(u_disagree(post)));
    CHECK(exact_h_uvc(world, x, UncertaintyKind::disagree, scale) ==
          doctest::Approx(exact_h_dup(world, x, UncertaintyKind::disagree, scale)));
  }
  for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance}) {
    const auto report = bias_report(world, kind);
    CHECK(std::abs(report.empirical_bias) <= 1e-15);
    CHECK(std::abs(report.formula_bias) <= 1e-15);
  }
}

TEST_CASE("hidden world W2") {
  const auto world = w2();
  const auto scale = GradeScale::ordinal(2);
  CHECK(exact_h_dup(world, 0, UncertaintyKind::disagree, scale) == 0.0);
  CHECK(exact_h_uvc(world, 0, UncertaintyKind::disagree, scale) == doctest::Approx(0.5).epsilon(1e-15));
  const auto report = bias_report(world, UncertaintyKind::disagree);
  CHECK(report.empirical_bias == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(report.formula_bias == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(check_invariants(report).ok());
  CHECK_THROWS(exact_h_dup(world, 7, UncertaintyKind::disagree, scale));
  CHECK_THROWS_WITH(bias_report(world, UncertaintyKind::entropy), doctest::Contains("no closed-form bias"));
}

TEST_CASE("property: tower rule, sign and corollary on random worlds") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto world = random_discrete_world(rng);
    const auto scale = GradeScale::ordinal(world.grades());
    for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance}) {
      const auto report = bias_report(world, kind);
      CHECK(std::abs(report.mean_h_dup - report.mean_true_uncertainty) <= 1e-12);
      CHECK(report.empirical_bias >= -1e-12);
      CHECK(std::abs(report.empirical_bias - report.formula_bias) <= 1e-10);
      CHECK(check_invariants(report).ok());
    }
    for (int x : world.x_values())
      CHECK(exact_h_uvc(world, x, UncertaintyKind::entropy, scale) >=
            exact_h_dup(world, x, UncertaintyKind::entropy, scale) - 1e-12);
  }
}

TEST_CASE("strict gap on nondegenerate worlds") {
  const auto world = build_discrete_world({{0.2, 0.1, 0.0}, {0.0, 0.3, 0.1}, {0.3, 0.0, 0.0}}, {0, 0, 1});
  REQUIRE(has_nondegenerate_x(world));
  const auto scale = GradeScale::ordinal(3);
  for (auto kind : {UncertaintyKind::disagree, UncertaintyKind::variance, UncertaintyKind::entropy})
    CHECK(exact_h_uvc(world, 0, kind, scale) > exact_h_dup(world, 0, kind, scale) + 1e-6);
  CHECK_FALSE(has_nondegenerate_x(build_discrete_world({{0.2, 0.1}, {0.4, 0.2}}, {0, 0})));
}

TEST_CASE("gridded two-Gaussian world") {
  const auto world = gridded_two_gaussians();
  const auto scale = GradeScale::ordinal(2);
  double worst_uvc = 0.0, worst_dup = 0.0;
  for (int x : world.x_values()) {
    const double o = x * 0.01;
    const double p = logistic(2 * o);
    worst_uvc = std::max(worst_uvc, std::abs(exact_h_uvc(world, x, UncertaintyKind::disagree, scale) - 0.5));
    worst_dup = std::max(worst_dup, std::abs(exact_h_dup(world, x, UncertaintyKind::disagree, scale) -
                                             u_disagree(GradeHistogram({p, 1 - p}))));
  }
  CHECK(worst_uvc <= 1e-6);
  CHECK(worst_dup <= 1e-4);
}

TEST_CASE("wasserstein to a point mass") {
  const auto scale = GradeScale::ordinal(5);
  const GradeHistogram h({0.5, 0, 0.5, 0, 0});
  CHECK(wasserstein_point_mass(h, 0, GroundMetric::abs, scale) == doctest::Approx(1.0));
  CHECK(wasserstein_point_mass(h, 0, GroundMetric::squared_w2, scale) == doctest::Approx(std::sqrt(2.0)));
  CHECK(wasserstein_point_mass(h, 0, GroundMetric::binary, scale) == doctest::Approx(0.5));
  for (auto metric : {GroundMetric::abs, GroundMetric::squared_w2, GroundMetric::binary})
    CHECK(wasserstein_point_mass(GradeHistogram::point_mass(5, 3), 3, metric, scale) == 0.0);
  CHECK_THROWS(wasserstein_point_mass(h, 5, GroundMetric::abs, scale));
  CHECK_THROWS(parse_ground_metric("chebyshev"));
}

TEST_CASE("property: point-mass closed form equals min-cost transport") {
  Rng rng(99);
  const auto scale = GradeScale::ordinal(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = random_histogram(rng, 7);
    const std::size_t anchor = rng.index(7);
    for (auto metric : {GroundMetric::abs, GroundMetric::squared_w2, GroundMetric::binary}) {
      const auto [value, plan] = brute_force_wasserstein(h, GradeHistogram::point_mass(7, anchor), metric, scale);
      CHECK(std::abs(value - wasserstein_point_mass(h, anchor, metric, scale)) <= 1e-9);
      for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t t = 0; t < 7; ++t) CHECK(plan.plan[r][t] == (t == anchor ? h[r] : 0.0));
    }
  }
}

TEST_CASE("property: transport between general histograms") {
  Rng rng(5);
  const auto scale = GradeScale::ordinal(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_histogram(rng, 6);
    const auto b = random_histogram(rng, 6);
    for (auto metric : {GroundMetric::abs, GroundMetric::squared_w2, GroundMetric::binary}) {
      const auto [ab, plan] = brute_force_wasserstein(a, b, metric, scale);
      CHECK(std::abs(ab - brute_force_wasserstein(b, a, metric, scale).first) <= 1e-9);
      for (std::size_t r = 0; r < 6; ++r) {
        double row = 0.0;
        for (std::size_t t = 0; t < 6; ++t) {
          CHECK(plan.plan[r][t] >= 0.0);
          row += plan.plan[r][t];
        }
        CHECK(std::abs(row - a[r]) <= 1e-12);
      }
      for (std::size_t t = 0; t < 6; ++t) {
        double col = 0.0;
        for (std::size_t r = 0; r < 6; ++r) col += plan.plan[r][t];
        CHECK(std::abs(col - b[t]) <= 1e-12);
      }
    }
    const auto [self, diag] = brute_force_wasserstein(a, a, GroundMetric::abs, scale);
    CHECK(std::abs(self) <= 1e-12);
    for (std::size_t r = 0; r < 6; ++r) CHECK(diag.plan[r][r] == doctest::Approx(a[r]));
  }
}

TEST_CASE("abs-metric transport matches the CDF formula") {
  Rng rng(8);
  const auto scale = GradeScale::ordinal(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_histogram(rng, 5);
    const auto b = random_histogram(rng, 5);
    double cdf_gap = 0.0, ca = 0.0, cb = 0.0;
    for (std::size_t l = 0; l + 1 < 5; ++l) {
      ca += a[l];
      cb += b[l];
      cdf_gap += std::abs(ca - cb);
    }
    CHECK(brute_force_wasserstein(a, b, GroundMetric::abs, scale).first == doctest::Approx(cdf_gap).epsilon(1e-9));
  }
}

TEST_CASE("transport rejects oversize support") {
  const auto scale = GradeScale::ordinal(13);
  CHECK_THROWS(brute_force_wasserstein(GradeHistogram::uniform(13), GradeHistogram::uniform(13), GroundMetric::abs,
                                       scale));
}
