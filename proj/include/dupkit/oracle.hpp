// Exact enumeration of h_dup, h_uvc and the UVC bias on discrete worlds,
// plus Wasserstein distances to a point mass.
#pragma once

#include <map>
#include <string_view>
#include <vector>

#include "dupkit/transport.hpp"
#include "dupkit/uncertainty.hpp"
#include "dupkit/worlds.hpp"

namespace dupkit {

/// E[U(E[Y|O]) | g(O) = x].
double exact_h_dup(const DiscreteWorld& world, int x, UncertaintyKind kind, const GradeScale& scale);

/// U(E[Y | g(O) = x]).
double exact_h_uvc(const DiscreteWorld& world, int x, UncertaintyKind kind, const GradeScale& scale);

/// E[Y | g(O) = x] as a histogram.
GradeHistogram conditional_posterior(const DiscreteWorld& world, int x);

struct BiasEntry {
  int x = 0;
  double p_x = 0.0;
  double h_dup = 0.0;
  double h_uvc = 0.0;
};

struct BiasReport {
  UncertaintyKind kind = UncertaintyKind::disagree;
  std::vector<BiasEntry> per_x;
  double empirical_bias = 0.0;
  double formula_bias = 0.0;
  /// E_x[h_dup] and E_o[U(posterior)]; equal by the tower rule.
  double mean_h_dup = 0.0;
  double mean_true_uncertainty = 0.0;
};

/// Grades of the ordinal scale 1..k are used when `scale` is omitted.
BiasReport bias_report(const DiscreteWorld& world, UncertaintyKind kind);
BiasReport bias_report(const DiscreteWorld& world, UncertaintyKind kind, const GradeScale& scale);

struct InvariantCheck {
  bool tower_ok = true;
  bool sign_ok = true;
  bool corollary_ok = true;
  bool ok() const { return tower_ok && sign_ok && corollary_ok; }
};

/// Tower rule (1e-12), h_uvc >= h_dup (1e-12) and corollary equality (1e-10).
InvariantCheck check_invariants(const BiasReport& report);

/// True when some x has a preimage whose posteriors are not all identical.
bool has_nondegenerate_x(const DiscreteWorld& world);

/// Expected grade distance from a draw of h to grade index `anchor`.
double wasserstein_point_mass(const GradeHistogram& h, std::size_t anchor, GroundMetric metric, const GradeScale& scale);

}  // namespace dupkit
