#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridsim/analysis.hpp"
#include "hybridsim/circuit.hpp"

namespace hybridsim {

inline constexpr const char* kPointsHeader =
    "model,boundary,L,p,q,t_noise,depth,n_traj,I_mean,I_stderr,EN_mean,EN_stderr,SA_mean,SAB_mean,purity_exp_mean";

/// 17 significant digits round-trip every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string points_row(const EnsemblePoint& p) {
  std::string s = to_string(p.model) + ',' + to_string(p.boundary) + ',' + std::to_string(p.n_qubits) + ',' +
                  format_double(p.measure_rate) + ',' + format_double(p.reset_rate) + ',' +
                  std::to_string(p.t_noise) + ',' + std::to_string(p.depth) + ',' + std::to_string(p.n_traj);
  for (double v : {p.i_mean, p.i_stderr, p.en_mean, p.en_stderr, p.sa_mean, p.sab_mean, p.purity_exp_mean})
    s += ',' + format_double(v);
  return s;
}

inline void write_points(std::ostream& out, const std::vector<EnsemblePoint>& points) {
  out << kPointsHeader << '\n';
  for (const auto& p : points) out << points_row(p) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

template <class T>
T parse_field(const std::string& s, std::size_t line, const char* column) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ConfigError("points line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<EnsemblePoint> read_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("points file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPointsHeader) throw ConfigError("points line 1: unexpected header");
  std::vector<EnsemblePoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 15)
      throw ConfigError("points line " + std::to_string(lineno) + ": expected 15 fields, got " +
                        std::to_string(f.size()));
    EnsemblePoint p;
    try {
      p.model = parse_noise_model(f[0]);
      p.boundary = parse_boundary(f[1]);
    } catch (const ConfigError& e) {
      throw ConfigError("points line " + std::to_string(lineno) + ": " + e.what());
    }
    using detail::parse_field;
    p.n_qubits = parse_field<std::size_t>(f[2], lineno, "L");
    p.measure_rate = parse_field<double>(f[3], lineno, "p");
    p.reset_rate = parse_field<double>(f[4], lineno, "q");
    p.t_noise = parse_field<std::size_t>(f[5], lineno, "t_noise");
    p.depth = parse_field<std::size_t>(f[6], lineno, "depth");
    p.n_traj = parse_field<std::size_t>(f[7], lineno, "n_traj");
    double* dst[] = {&p.i_mean, &p.i_stderr, &p.en_mean, &p.en_stderr, &p.sa_mean, &p.sab_mean, &p.purity_exp_mean};
    const char* names[] = {"I_mean", "I_stderr", "EN_mean", "EN_stderr", "SA_mean", "SAB_mean", "purity_exp_mean"};
    for (int k = 0; k < 7; ++k) *dst[k] = parse_field<double>(f[8 + k], lineno, names[k]);
    out.push_back(p);
  }
  return out;
}

inline std::vector<EnsemblePoint> load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_points(in);
}

inline constexpr const char* kTrajectoriesHeader =
    "model,boundary,L,p,q,t_noise,depth,traj,S_A,S_B,S_AB,I,EN,purity_exp,n_measurements,n_resets";

inline std::string trajectory_row(const TrajectoryRecord& r) {
  const auto& c = r.config;
  const auto& e = r.report;
  return to_string(c.model) + ',' + to_string(c.boundary) + ',' + std::to_string(c.n_qubits) + ',' +
         format_double(c.measure_rate) + ',' + format_double(c.reset_rate) + ',' + std::to_string(c.t_noise) + ',' +
         std::to_string(c.depth) + ',' + std::to_string(c.trajectory_index) + ',' + std::to_string(e.s_a) + ',' +
         std::to_string(e.s_b) + ',' + std::to_string(e.s_ab) + ',' + std::to_string(e.mutual_information) + ',' +
         format_double(e.log_negativity()) + ',' + std::to_string(e.purity_exponent) + ',' +
         std::to_string(r.n_measurements) + ',' + std::to_string(r.n_resets);
}

inline constexpr const char* kFitsHeader =
    "model,boundary,L,p,t_noise,observable,fit,a,b,exponent,rss,n_points,q_max";
inline constexpr const char* kThermoHeader =
    "model,boundary,p,q,t_noise,observable,S_inf,S_inf_stderr,c,c_stderr,n_sizes";
inline constexpr const char* kCollapseHeader = "model,boundary,p,t_noise,observable,q_c,nu,cost,n_sizes";
inline constexpr const char* kCollapseTraceHeader = "model,boundary,p,t_noise,observable,step,q_c,nu,cost";

}  // namespace hybridsim
