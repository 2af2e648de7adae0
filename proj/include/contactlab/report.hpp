#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>

#include "contactlab/config.hpp"
#include "contactlab/orbits.hpp"

namespace contactlab {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit hash of the canonical config dump; embedded in every report.
inline std::string config_hash(const json& config) {
  const std::string s = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

/// 17-significant-digit formatting for CSV artifacts.
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV dump: time, chart_id, q..., v..., energy (blank when untracked).
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                                 const MagneticSystem* sys) {
  const int d =
      traj.samples.empty() ? 0 : static_cast<int>(traj.samples[0].state.q.coords.size());
  out << "time,chart_id";
  for (int i = 0; i < d; ++i) out << ",q" << i;
  for (int i = 0; i < d; ++i) out << ",v" << i;
  out << ",energy\n";
  for (const auto& s : traj.samples) {
    out << fmt17(s.t) << ',' << s.state.q.chart_id;
    for (int i = 0; i < d; ++i) out << ',' << fmt17(s.state.q.coords[i]);
    for (int i = 0; i < d; ++i) out << ',' << fmt17(s.state.v[i]);
    if (sys != nullptr)
      out << ',' << fmt17(kinetic_energy(*sys, s.state));
    else
      out << ',';
    out << '\n';
  }
}

inline json point_to_json(const ChartPoint& p) {
  json j;
  j["chart"] = p.chart_id;
  j["coords"] = std::vector<double>(p.coords.data(),
                                    p.coords.data() + p.coords.size());
  return j;
}

inline json state_to_json(const TangentState& s) {
  json j = point_to_json(s.q);
  j["velocity"] =
      std::vector<double>(s.v.data(), s.v.data() + s.v.size());
  return j;
}

inline json orbit_to_json(const ClosedOrbit& o) {
  json j;
  j["kind"] = o.kind;
  j["period"] = o.period;
  j["energy"] = o.energy;
  j["length"] = o.period * std::sqrt(2.0 * std::max(o.energy, 0.0));
  j["closure_residual"] = o.closure_residual;
  j["prime"] = o.prime;
  j["initial_state"] = state_to_json(o.init);
  return j;
}

inline json census_to_json(const OrbitCensus& census) {
  json j;
  j["class_count"] = census.class_count();
  j["t_max"] = census.t_max;
  if (!std::isnan(census.kappa)) j["kappa"] = census.kappa;
  json classes = json::array();
  for (std::size_t rep : census.representatives)
    classes.push_back(orbit_to_json(census.orbits[rep]));
  j["classes"] = std::move(classes);
  return j;
}

inline json growth_to_json(const GrowthReport& r) {
  json j;
  j["t_max"] = r.t_max;
  j["reeb_census"] = census_to_json(r.reeb_census);
  j["reeb_count"] = r.reeb_count;
  json table = json::array();
  for (std::size_t i = 0; i < r.kappas.size(); ++i) {
    json row;
    row["kappa"] = r.kappas[i];
    row["magnetic_count"] = r.magnetic_counts[i];
    row["census"] = census_to_json(r.magnetic_censuses[i]);
    table.push_back(std::move(row));
  }
  j["counts"] = std::move(table);
  j["inequality"] = "P_t^kappa >= R_t";
  j["verdict"] = r.inequality_holds ? "holds" : "violated";
  j["counting_note"] = r.counting_note;
  return j;
}

inline json bracket_to_json(const ManeBracket& b,
                            const std::vector<std::string>& loop_labels) {
  json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["width"] = b.upper - b.lower;
  j["midpoint"] = 0.5 * (b.lower + b.upper);
  j["lower_witness"] =
      (b.lower_witness >= 0 &&
       b.lower_witness < static_cast<int>(loop_labels.size()))
          ? loop_labels[b.lower_witness]
          : std::string("none");
  j["upper_witness_coeffs"] = std::vector<double>(
      b.upper_witness.data(), b.upper_witness.data() + b.upper_witness.size());
  j["grid_resolution"] = b.grid_resolution;
  j["disclaimer"] = b.disclaimer;
  return j;
}

/// One named pass/fail entry of the verification suite.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparator = "<";  // "<" or ">" (negative control)
  bool pass = false;
};

inline CheckResult check_below(std::string name, double value,
                               double threshold) {
  return {std::move(name), value, threshold, "<", value < threshold};
}

inline CheckResult check_above(std::string name, double value,
                               double threshold) {
  return {std::move(name), value, threshold, ">", value > threshold};
}

inline json checks_to_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    json j;
    j["name"] = c.name;
    j["value"] = c.value;
    j["threshold"] = c.threshold;
    j["comparator"] = c.comparator;
    j["pass"] = c.pass;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline json report_header(const json& config, std::uint64_t seed) {
  json j;
  j["tool"] = "contactlab";
  j["version"] = kToolVersion;
  j["config_hash"] = config_hash(config);
  j["rng"] = Rng::kName;
  j["seed"] = seed;
  return j;
}

}  // namespace contactlab
