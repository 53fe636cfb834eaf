#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aqm/config.hpp"
#include "aqm/scenario.hpp"

namespace aqm {

inline constexpr const char* kToolVersion = "0.1.0";

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string timeseries_csv(const RunRecord& run) {
  std::string out = "t,q,W,R,p,departure_rate\n";
  for (const auto& p : run.series) {
    out += format_double(p.t) + "," + format_double(p.q) + "," +
           format_double(p.w) + "," + format_double(p.r) + "," +
           format_double(p.p) + "," + format_double(p.departure_rate) + "\n";
  }
  return out;
}

inline std::string summary_csv(const std::vector<RunRecord>& runs) {
  std::string out =
      "scenario,controller,IAE,utilization,loss_rate,overshoot,settling_time\n";
  for (const auto& run : runs) {
    const RunSummary& s = run.summary;
    out += run.scenario + "," + run.controller + "," + format_double(s.iae) +
           "," + format_double(s.utilization) + "," + format_double(s.loss_rate) +
           "," + format_double(s.overshoot) + "," +
           format_double(s.settling_time) + "\n";
  }
  return out;
}

struct SweepTableRow {
  double x;
  std::string controller;
  SweepRow row;
};

inline std::string sweep_csv(const std::vector<SweepTableRow>& rows) {
  std::string out = "x,controller,utilization,loss_rate\n";
  for (const auto& r : rows) {
    out += format_double(r.x) + "," + r.controller + ",";
    if (r.row.ok)
      out += format_double(r.row.utilization) + "," + format_double(r.row.loss_rate);
    else
      out += "nan,nan";
    out += "\n";
  }
  return out;
}

inline std::string convergence_csv(const std::vector<double>& trace) {
  std::string out = "iteration,best_cost\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out += std::to_string(i) + "," + format_double(trace[i]) + "\n";
  return out;
}

// Resolved experiment snapshot; replaying a manifest reproduces the run
// byte for byte.
inline ConfigDocument make_manifest(ConfigDocument resolved,
                                    const std::string& command,
                                    const std::string& scenario,
                                    const std::string& controller) {
  resolved.set("manifest", "tool_version", kToolVersion);
  resolved.set("manifest", "command", command);
  if (!scenario.empty()) resolved.set("manifest", "scenario", scenario);
  if (!controller.empty()) resolved.set("manifest", "controller", controller);
  resolved.set("manifest", "timeseries_path", "timeseries.csv");
  resolved.set("manifest", "summary_path", "summary.csv");
  return resolved;
}

} // namespace aqm
