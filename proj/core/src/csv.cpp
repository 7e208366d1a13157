#include "tanglesim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

namespace tanglesim {

namespace {

std::string num6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string opt6(const std::optional<double>& v) {
  return v ? num6(*v) : std::string();
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec && !fs::is_directory(path.parent_path())) {
      throw IoError("cannot create directory " + path.parent_path().string() +
                    ": " + ec.message());
    }
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      os.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place: " +
                  ec.message());
  }
}

std::string transactions_csv(const SimOutput& output) {
  std::string out = "logical_id,strategy,issue_time,first_approval_time,W,reissues\n";
  for (const auto& rec : output.records) {
    out += std::to_string(rec.logical_id);
    out += rec.label == StrategyLabel::kS0 ? ",S0," : ",S1,";
    out += rec.issue_times.empty() ? std::string() : num6(rec.issue_times[0]);
    out += ',';
    out += opt6(rec.first_approval_time);
    out += ',';
    out += std::to_string(rec.probes_failed);
    out += ',';
    out += std::to_string(rec.reissue_count);
    out += '\n';
  }
  return out;
}

std::string series_csv(std::span<const SeriesSample> series,
                       const char* value_header) {
  std::string out = "time,";
  out += value_header;
  out += '\n';
  for (const auto& sample : series) {
    out += num6(sample.time);
    out += ',';
    out += std::to_string(sample.value);
    out += '\n';
  }
  return out;
}

std::string costs_csv(const CostCurves& curves) {
  std::string out = "p,mean_S0,se_S0,mean_S1,se_S1\n";
  for (std::size_t i = 0; i < curves.p_grid.size(); ++i) {
    const CostSummary& s = curves.points[i];
    out += num6(curves.p_grid[i]);
    out += ',';
    out += opt6(s.mean_s0);
    out += ',';
    out += opt6(s.se_s0);
    out += ',';
    out += opt6(s.mean_s1);
    out += ',';
    out += opt6(s.se_s1);
    out += '\n';
  }
  return out;
}

std::string point_costs_csv(const CostCurves& curves, std::size_t point) {
  sim_check(point < curves.replicas.size(), "point dump: index out of range");
  std::string out = "replica,seed,mean_S0,n_S0,mean_S1,n_S1\n";
  const auto& reps = curves.replicas[point];
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const LabelStats& s0 = reps[r].stats.s0;
    const LabelStats& s1 = reps[r].stats.s1;
    out += std::to_string(r);
    out += ',';
    out += std::to_string(reps[r].seed);
    out += ',';
    if (s0.n > 0) out += num6(s0.cost_sum / static_cast<double>(s0.n));
    out += ',';
    out += std::to_string(s0.n);
    out += ',';
    if (s1.n > 0) out += num6(s1.cost_sum / static_cast<double>(s1.n));
    out += ',';
    out += std::to_string(s1.n);
    out += '\n';
  }
  return out;
}

std::string cdf_csv(std::span<const double> grid, std::span<const double> cdf) {
  sim_check(grid.size() == cdf.size(), "cdf dump: mismatched lengths");
  std::string out = "t,cdf\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += num6(grid[i]);
    out += ',';
    out += num6(cdf[i]);
    out += '\n';
  }
  return out;
}

std::string little_csv(const LittleResult& result, double lambda, double k) {
  std::string out = "lambda,K,p_hat,observed,predicted,ratio\n";
  out += num6(lambda);
  out += ',';
  out += num6(k);
  out += ',';
  if (result.valid) {
    out += num6(result.p_hat);
    out += ',';
    out += num6(result.observed);
    out += ',';
    out += num6(result.predicted);
    out += ',';
    out += num6(result.ratio);
  } else {
    out += ",,,";
  }
  out += '\n';
  return out;
}

std::string equilibrium_csv(const CostCurves& curves,
                            const EquilibriumReport& report) {
  std::string out;
  out += "# p_bar=";
  out += report.crossing.p_bar ? num6(*report.crossing.p_bar) : "none";
  out += '\n';
  out += "# stable=";
  if (!report.stability) {
    out += "na";
  } else if (report.stability->degenerate) {
    out += "degenerate";
  } else {
    out += report.stability->stable ? "yes" : "no";
  }
  out += '\n';
  out += "# regime=";
  switch (report.regime) {
    case Regime::kInterior:
      out += "interior";
      break;
    case Regime::kAllGreedy:
      out += "all_greedy";
      break;
    case Regime::kAllDefault:
      out += "all_default";
      break;
  }
  out += '\n';
  out += "# roots=";
  if (report.crossing.roots.empty()) {
    out += "none";
  } else {
    for (std::size_t i = 0; i < report.crossing.roots.size(); ++i) {
      if (i) out += ';';
      out += num6(report.crossing.roots[i]);
    }
  }
  out += '\n';
  for (const auto& [gamma, theta] : report.theta0_by_gamma) {
    out += "# theta0[gamma=" + num6(gamma) + "]=" + num6(theta) + "\n";
  }
  out += "p,mean_S0,se_S0,mean_S1,se_S1,fit_S0,fit_S1\n";
  for (std::size_t i = 0; i < curves.p_grid.size(); ++i) {
    const double p = curves.p_grid[i];
    const CostSummary& s = curves.points[i];
    out += num6(p);
    out += ',';
    out += opt6(s.mean_s0);
    out += ',';
    out += opt6(s.se_s0);
    out += ',';
    out += opt6(s.mean_s1);
    out += ',';
    out += opt6(s.se_s1);
    out += ',';
    if (curves.fit_s0_valid) out += num6(curves.fit_s0(p));
    out += ',';
    if (curves.fit_s1_valid) out += num6(curves.fit_s1(p));
    out += '\n';
  }
  return out;
}

}  // namespace tanglesim
