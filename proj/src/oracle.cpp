#include "dupkit/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dupkit {

namespace {

std::vector<std::size_t> require_preimage(const DiscreteWorld& world, int x) {
  auto pre = world.preimage(x);
  if (pre.empty()) throw std::invalid_argument("x = " + std::to_string(x) + " has an empty preimage");
  return pre;
}

void require_scale(const DiscreteWorld& world, const GradeScale& scale) {
  if (scale.size() != world.grades()) throw std::invalid_argument("grade scale does not match world");
}

}  // namespace

GradeHistogram conditional_posterior(const DiscreteWorld& world, int x) {
  const auto pre = require_preimage(world, x);
  const double px = world.p_x(x);
  std::vector<double> mean(world.grades(), 0.0);
  for (std::size_t o : pre) {
    const double w = world.p_obs(o) / px;
    for (std::size_t y = 0; y < mean.size(); ++y) mean[y] += w * world.posterior(o)[y];
  }
  return GradeHistogram(std::move(mean));
}

double exact_h_dup(const DiscreteWorld& world, int x, UncertaintyKind kind, const GradeScale& scale) {
  require_scale(world, scale);
  const auto pre = require_preimage(world, x);
  const double px = world.p_x(x);
  double value = 0.0;
  for (std::size_t o : pre) value += world.p_obs(o) / px * uncertainty(kind, world.posterior(o), scale);
  return value;
}

double exact_h_uvc(const DiscreteWorld& world, int x, UncertaintyKind kind, const GradeScale& scale) {
  require_scale(world, scale);
  return uncertainty(kind, conditional_posterior(world, x), scale);
}

BiasReport bias_report(const DiscreteWorld& world, UncertaintyKind kind) {
  return bias_report(world, kind, GradeScale::ordinal(world.grades()));
}

BiasReport bias_report(const DiscreteWorld& world, UncertaintyKind kind, const GradeScale& scale) {
  if (kind == UncertaintyKind::entropy) throw std::invalid_argument("no closed-form bias implemented for entropy");
  require_scale(world, scale);
  BiasReport report;
  report.kind = kind;

  for (int x : world.x_values()) {
    BiasEntry entry;
    entry.x = x;
    entry.p_x = world.p_x(x);
    entry.h_dup = exact_h_dup(world, x, kind, scale);
    entry.h_uvc = exact_h_uvc(world, x, kind, scale);
    report.empirical_bias += entry.p_x * (entry.h_uvc - entry.h_dup);
    report.mean_h_dup += entry.p_x * entry.h_dup;

    // Conditional variance of the posterior given g(O) = x, two-pass.
    const auto pre = world.preimage(x);
    const GradeHistogram mean = conditional_posterior(world, x);
    double spread = 0.0;
    if (kind == UncertaintyKind::disagree) {
      for (std::size_t l = 0; l < world.grades(); ++l)
        for (std::size_t o : pre) {
          const double dev = world.posterior(o)[l] - mean[l];
          spread += world.p_obs(o) / entry.p_x * dev * dev;
        }
    } else {
      double mean_grade = 0.0;
      for (std::size_t l = 0; l < world.grades(); ++l) mean_grade += scale.grade(l) * mean[l];
      for (std::size_t o : pre) {
        double grade = 0.0;
        for (std::size_t l = 0; l < world.grades(); ++l) grade += scale.grade(l) * world.posterior(o)[l];
        const double dev = grade - mean_grade;
        spread += world.p_obs(o) / entry.p_x * dev * dev;
      }
    }
    report.formula_bias += entry.p_x * spread;
    report.per_x.push_back(entry);
  }
  for (std::size_t o = 0; o < world.observations(); ++o)
    report.mean_true_uncertainty += world.p_obs(o) * uncertainty(kind, world.posterior(o), scale);
  return report;
}

InvariantCheck check_invariants(const BiasReport& report) {
  InvariantCheck check;
  check.tower_ok = std::abs(report.mean_h_dup - report.mean_true_uncertainty) <= 1e-12;
  for (const auto& entry : report.per_x)
    if (entry.h_uvc < entry.h_dup - 1e-12) check.sign_ok = false;
  check.sign_ok = check.sign_ok && report.empirical_bias >= -1e-12;
  check.corollary_ok = std::abs(report.empirical_bias - report.formula_bias) <= 1e-10;
  return check;
}

bool has_nondegenerate_x(const DiscreteWorld& world) {
  for (int x : world.x_values()) {
    const auto pre = world.preimage(x);
    for (std::size_t i = 1; i < pre.size(); ++i)
      if (world.posterior(pre[i]) != world.posterior(pre[0])) return true;
  }
  return false;
}

double wasserstein_point_mass(const GradeHistogram& h, std::size_t anchor, GroundMetric metric, const GradeScale& scale) {
  if (h.size() != scale.size()) throw std::invalid_argument("histogram length does not match grade scale");
  if (anchor >= scale.size()) throw std::out_of_range("unknown grade");
  double expected = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) expected += h[l] * ground_cost(metric, l, anchor, scale);
  return metric == GroundMetric::squared_w2 ? std::sqrt(expected) : expected;
}

}  // namespace dupkit
