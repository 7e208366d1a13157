#include "tanglesim/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tanglesim/parallel.hpp"

namespace tanglesim {

double Poly4::operator()(double p) const {
  double acc = 0.0;
  for (int k = 4; k >= 0; --k) acc = acc * p + coeff[static_cast<std::size_t>(k)];
  return acc;
}

Poly4 fit_poly4(std::span<const double> x, std::span<const double> y) {
  sim_check(x.size() == y.size(), "poly fit: mismatched sample sizes");
  sim_check(!x.empty(), "poly fit: no samples");
  const auto rows = static_cast<Eigen::Index>(x.size());
  const Eigen::Index degree =
      std::min<Eigen::Index>(4, rows - 1);  // never more unknowns than samples
  Eigen::MatrixXd a(rows, degree + 1);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double pw = 1.0;
    for (Eigen::Index k = 0; k <= degree; ++k) {
      a(i, k) = pw;
      pw *= x[static_cast<std::size_t>(i)];
    }
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  Poly4 poly;
  for (Eigen::Index k = 0; k <= degree; ++k) {
    poly.coeff[static_cast<std::size_t>(k)] = c[k];
  }
  return poly;
}

CostCurves sweep(const SimConfig& base, std::span<const double> p_grid,
                 int replicas) {
  sim_check(!p_grid.empty(), "sweep: empty grid");
  sim_check(replicas >= 1, "sweep: need at least one replica");
  for (const double p : p_grid) {
    sim_check(p >= 0.0 && p <= 1.0, "sweep: grid point outside [0, 1]");
  }

  CostCurves curves;
  curves.p_grid.assign(p_grid.begin(), p_grid.end());
  const std::size_t points = p_grid.size();
  const auto reps = static_cast<std::size_t>(replicas);
  const std::size_t tasks = points * reps;

  std::vector<std::optional<ReplicaCost>> results(tasks);
  std::vector<std::string> errors(tasks);
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t pt = task / reps;
    const std::size_t rep = task % reps;
    SimConfig cfg = base;
    cfg.p_greedy = p_grid[pt];
    cfg.gamma = 1.0;
    cfg.theta = p_grid[pt];
    cfg.seed = derive_seed(base.seed, pt, rep);
    try {
      const SimOutput output = run(cfg);
      results[task] = ReplicaCost{cfg.seed, cost_stats(output)};
    } catch (const std::exception& e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "p=%g replica=%zu: ", p_grid[pt], rep);
      errors[task] = buf + std::string(e.what());
    }
  });

  curves.replicas.resize(points);
  curves.points.resize(points);
  for (std::size_t pt = 0; pt < points; ++pt) {
    std::vector<RunCostStats> stats;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::size_t task = pt * reps + rep;
      if (!errors[task].empty()) curves.failures.push_back(errors[task]);
      if (results[task]) {
        curves.replicas[pt].push_back(*results[task]);
        stats.push_back(results[task]->stats);
      }
    }
    curves.points[pt] = summarize_cost_stats(stats, p_grid[pt]);
  }

  std::vector<double> xs0, ys0, xs1, ys1;
  for (std::size_t pt = 0; pt < points; ++pt) {
    const CostSummary& s = curves.points[pt];
    if (s.mean_s0) {
      xs0.push_back(p_grid[pt]);
      ys0.push_back(*s.mean_s0);
    }
    if (s.mean_s1) {
      xs1.push_back(p_grid[pt]);
      ys1.push_back(*s.mean_s1);
    }
  }
  if (!xs0.empty()) {
    curves.fit_s0 = fit_poly4(xs0, ys0);
    curves.fit_s0_valid = true;
  }
  if (!xs1.empty()) {
    curves.fit_s1 = fit_poly4(xs1, ys1);
    curves.fit_s1_valid = true;
  }
  return curves;
}

CrossingInfo find_crossing(const CostCurves& curves) {
  CrossingInfo info;
  if (!curves.fit_s0_valid || !curves.fit_s1_valid) return info;

  const auto diff = [&](double p) { return curves.fit_s1(p) - curves.fit_s0(p); };

  constexpr double kScanStep = 1e-3;
  constexpr double kRootWidth = 1e-6;
  double prev_p = kScanStep;
  double prev_d = diff(prev_p);
  if (prev_d == 0.0) info.roots.push_back(prev_p);
  for (int k = 2; prev_p < 1.0 - kScanStep / 2.0; ++k) {
    const double p = static_cast<double>(k) * kScanStep;
    const double d = diff(p);
    if (d == 0.0) {
      // An exact hit on a scan point; the interval before it holds no
      // further sign change, so this is the only root to report here.
      info.roots.push_back(p);
    } else if (prev_d != 0.0 && (prev_d < 0.0) != (d < 0.0)) {
      double lo = prev_p;
      double hi = p;
      double d_lo = prev_d;
      while (hi - lo > kRootWidth) {
        const double mid = 0.5 * (lo + hi);
        const double d_mid = diff(mid);
        if ((d_lo < 0.0) != (d_mid < 0.0)) {
          hi = mid;
        } else {
          lo = mid;
          d_lo = d_mid;
        }
      }
      info.roots.push_back(0.5 * (lo + hi));
    }
    prev_p = p;
    prev_d = d;
  }
  if (!info.roots.empty()) info.p_bar = info.roots.front();
  return info;
}

StabilityInfo classify_stability(const CostCurves& curves, double p_bar,
                                 double gamma, int n_nodes) {
  sim_check(curves.fit_s0_valid && curves.fit_s1_valid,
            "stability: both cost fits required");
  sim_check(gamma > 0.0 && gamma <= 1.0, "stability: gamma outside (0, 1]");
  sim_check(n_nodes >= 1, "stability: need at least one node");

  StabilityInfo info;
  const double step = gamma / static_cast<double>(n_nodes);
  info.p_minus = p_bar - step;
  info.p_plus = p_bar + step;
  if (info.p_minus < 0.0) {
    info.p_minus = 0.0;
    info.clamped = true;
  }
  if (info.p_plus > 1.0) {
    info.p_plus = 1.0;
    info.clamped = true;
  }
  info.s0_at_p_bar = curves.fit_s0(p_bar);
  info.s1_at_p_bar = curves.fit_s1(p_bar);
  info.s0_at_minus = curves.fit_s0(info.p_minus);
  info.s1_at_minus = curves.fit_s1(info.p_minus);
  info.s0_at_plus = curves.fit_s0(info.p_plus);
  info.s1_at_plus = curves.fit_s1(info.p_plus);

  // greedy-minus-default on either side of the crossing
  const double diff_minus = info.s1_at_minus - info.s0_at_minus;
  const double diff_plus = info.s1_at_plus - info.s0_at_plus;
  info.degenerate = std::abs(diff_minus) < 1e-12 && std::abs(diff_plus) < 1e-12;
  info.stable = diff_minus < 0.0 && diff_plus > 0.0;
  return info;
}

double theta0(double p_bar, double gamma) {
  sim_check(gamma > 0.0 && gamma <= 1.0, "theta0: gamma outside (0, 1]");
  sim_check(p_bar >= 0.0, "theta0: negative crossing");
  return std::min(p_bar / gamma, 1.0);
}

EquilibriumReport analyze(const CostCurves& curves,
                          std::span<const double> gammas, int n_nodes) {
  EquilibriumReport report;
  report.crossing = find_crossing(curves);

  if (report.crossing.p_bar) {
    report.regime = Regime::kInterior;
    report.stability = classify_stability(curves, *report.crossing.p_bar, 1.0,
                                          n_nodes);
    for (const double g : gammas) {
      report.theta0_by_gamma.emplace_back(g, theta0(*report.crossing.p_bar, g));
    }
    return report;
  }

  bool greedy_never_worse = curves.fit_s0_valid && curves.fit_s1_valid;
  if (greedy_never_worse) {
    for (const double p : curves.p_grid) {
      if (curves.fit_s1(p) - curves.fit_s0(p) > 0.0) {
        greedy_never_worse = false;
        break;
      }
    }
  }
  report.regime = greedy_never_worse ? Regime::kAllGreedy : Regime::kAllDefault;
  const double flat = report.regime == Regime::kAllGreedy ? 1.0 : 0.0;
  for (const double g : gammas) report.theta0_by_gamma.emplace_back(g, flat);
  return report;
}

std::vector<double> default_p_grid() {
  std::vector<double> grid{0.0};
  for (int k = 0; k < 10; ++k) {
    grid.push_back(0.02 + 0.48 * static_cast<double>(k) / 9.0);
  }
  return grid;
}

}  // namespace tanglesim
