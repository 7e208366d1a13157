#pragma once

#include <array>
#include <optional>

#include "tanglesim/metrics.hpp"

namespace tanglesim {

/// Least-squares polynomial of degree up to four, coeff[k] * p^k.
struct Poly4 {
  std::array<double, 5> coeff{};
  double operator()(double p) const;
};

/// Fits with the degree clamped to the sample count minus one.
Poly4 fit_poly4(std::span<const double> x, std::span<const double> y);

struct ReplicaCost {
  std::uint64_t seed = 0;
  RunCostStats stats;
};

struct CostCurves {
  std::vector<double> p_grid;
  std::vector<CostSummary> points;
  std::vector<std::vector<ReplicaCost>> replicas;  // per grid point
  Poly4 fit_s0, fit_s1;
  bool fit_s0_valid = false, fit_s1_valid = false;
  std::vector<std::string> failures;  // nonempty when runs aborted
};

/// Runs replicas at every grid point (seeds derived from the base seed per
/// point and replica) and fits both cost curves. The greedy curve is fitted
/// on the points that produced greedy records.
CostCurves sweep(const SimConfig& base, std::span<const double> p_grid,
                 int replicas);

struct CrossingInfo {
  std::optional<double> p_bar;  // smallest root in (0, 1)
  std::vector<double> roots;    // every sign change found, ascending
};

/// Roots of fitted greedy-minus-default inside (0, 1), located by a sign
/// scan plus bisection to 1e-6.
CrossingInfo find_crossing(const CostCurves& curves);

struct StabilityInfo {
  bool stable = false;
  bool degenerate = false;  // curves indistinguishable at the deviation step
  bool clamped = false;     // deviation points clipped to [0, 1]
  double p_minus = 0.0, p_plus = 0.0;
  double s0_at_p_bar = 0.0, s1_at_p_bar = 0.0;
  double s0_at_minus = 0.0, s1_at_minus = 0.0;
  double s0_at_plus = 0.0, s1_at_plus = 0.0;
};

/// Probes the fitted curves one deviation step (gamma/n_nodes) either side
/// of the crossing. Stable when the greedy-minus-default difference is
/// increasing through it: negative at p_minus, positive at p_plus. The raw
/// curve values at both probe points are kept so a one-switcher payoff
/// comparison can be read off the same report.
StabilityInfo classify_stability(const CostCurves& curves, double p_bar,
                                 double gamma, int n_nodes);

/// Equilibrium mixture weight for deviating issuers: min{p_bar / gamma, 1}.
double theta0(double p_bar, double gamma);

enum class Regime : std::uint8_t { kInterior, kAllGreedy, kAllDefault };

struct EquilibriumReport {
  CrossingInfo crossing;
  Regime regime = Regime::kAllDefault;
  std::optional<StabilityInfo> stability;  // interior crossings only
  std::vector<std::pair<double, double>> theta0_by_gamma;
};

EquilibriumReport analyze(const CostCurves& curves,
                          std::span<const double> gammas, int n_nodes);

/// Ten equispaced points in [0.02, 0.5] plus the p = 0 baseline.
std::vector<double> default_p_grid();

}  // namespace tanglesim
