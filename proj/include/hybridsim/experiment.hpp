#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hybridsim/analysis.hpp"
#include "hybridsim/circuit.hpp"
#include "hybridsim/config.hpp"
#include "hybridsim/csv.hpp"
#include "hybridsim/dense_oracle.hpp"
#include "hybridsim/svg_plot.hpp"

namespace hybridsim {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool same_cell(const CircuitConfig& a, const CircuitConfig& b) {
  return a.model == b.model && a.n_qubits == b.n_qubits && a.measure_rate == b.measure_rate &&
         a.reset_rate == b.reset_rate && a.t_noise == b.t_noise && a.boundary == b.boundary && a.depth == b.depth &&
         a.boundary_resets == b.boundary_resets && a.master_seed == b.master_seed;
}

struct MeanStderr {
  double mean = 0.0, stderr = 0.0;
};

// Two-pass mean and sigma / sqrt(T), summed in the given order.
inline MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr m;
  for (double x : v) m.mean += x;
  m.mean /= double(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.stderr = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
  }
  return m;
}

}  // namespace detail

/// Sample means and standard errors of one cell's trajectories, folded in
/// trajectory-index order. A single record yields stderr 0.
inline EnsemblePoint aggregate(std::vector<TrajectoryRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");
  for (const auto& r : records)
    if (!detail::same_cell(r.config, records.front().config))
      throw std::invalid_argument("aggregate given records from different configurations");
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.config.trajectory_index < b.config.trajectory_index; });
  std::vector<double> i, en, sa, sab, pur;
  for (const auto& r : records) {
    i.push_back(r.report.mutual_information);
    en.push_back(r.report.log_negativity());
    sa.push_back(r.report.s_a);
    sab.push_back(r.report.s_ab);
    pur.push_back(r.report.purity_exponent);
  }
  const auto& c = records.front().config;
  EnsemblePoint p;
  p.model = c.model;
  p.boundary = c.boundary;
  p.n_qubits = c.n_qubits;
  p.measure_rate = c.measure_rate;
  p.reset_rate = c.reset_rate;
  p.t_noise = c.t_noise;
  p.depth = c.depth;
  p.n_traj = records.size();
  const auto mi = detail::mean_stderr(i), me = detail::mean_stderr(en);
  p.i_mean = mi.mean;
  p.i_stderr = mi.stderr;
  p.en_mean = me.mean;
  p.en_stderr = me.stderr;
  p.sa_mean = detail::mean_stderr(sa).mean;
  p.sab_mean = detail::mean_stderr(sab).mean;
  p.purity_exp_mean = detail::mean_stderr(pur).mean;
  return p;
}

/// True when the stabilizer report agrees with dense replay of the same history.
inline bool oracle_agrees(const TrajectoryRecord& rec, const EventLog& log) {
  const auto d = oracle::replay(rec.config.n_qubits, log).report(Bipartition::half_chain(rec.config.n_qubits));
  const auto& r = rec.report;
  constexpr double tol = 1e-9;
  return std::abs(r.s_a - d.s_a) < tol && std::abs(r.s_b - d.s_b) < tol && std::abs(r.s_ab - d.s_ab) < tol &&
         std::abs(r.mutual_information - d.mutual_information) < tol &&
         std::abs(r.log_negativity() - d.log_negativity) < tol && std::abs(r.purity_exponent - d.purity_log2) < tol;
}

struct EnsembleOptions {
  std::size_t trajectories = 1;
  std::size_t workers = 1;
  bool oracle_check = false;
  std::ostream* progress = nullptr;
};

struct EnsembleRun {
  std::vector<std::vector<TrajectoryRecord>> records;  // [cell][trajectory]
  std::size_t oracle_checked = 0;
  std::size_t oracle_failures = 0;
};

/// Runs every (cell, trajectory) task on a worker pool. Results land in slots
/// keyed by task index, so the output is independent of scheduling.
inline EnsembleRun run_ensemble(const std::vector<CircuitConfig>& cells, const EnsembleOptions& opts) {
  if (opts.oracle_check)
    for (const auto& c : cells)
      if (c.n_qubits > oracle::kMaxQubits)
        throw ConfigError("oracle check needs L <= " + std::to_string(oracle::kMaxQubits) + ", got " +
                          std::to_string(c.n_qubits));
  const std::size_t per = opts.trajectories, total = cells.size() * per;
  EnsembleRun run;
  run.records.assign(cells.size(), std::vector<TrajectoryRecord>(per));
  std::vector<char> agrees(total, 1);
  std::vector<std::atomic<std::size_t>> done(cells.size());
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0}, cells_done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < total;) {
      const std::size_t cell = task / per, traj = task % per;
      try {
        CircuitConfig c = cells[cell];
        c.trajectory_index = traj;
        EventLog log;
        TrajectoryOptions topt;
        if (opts.oracle_check) topt.log = &log;
        run.records[cell][traj] = run_trajectory(c, topt);
        if (opts.oracle_check) agrees[task] = oracle_agrees(run.records[cell][traj], log);
      } catch (...) {
        errors[task] = std::current_exception();
      }
      if (done[cell].fetch_add(1) + 1 == per && opts.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        const auto& c = cells[cell];
        *opts.progress << "[" << ++cells_done << "/" << cells.size() << "] " << to_string(c.model) << ' '
                       << to_string(c.boundary) << " L=" << c.n_qubits << " p=" << c.measure_rate
                       << " q=" << c.reset_rate << " t_noise=" << c.t_noise << '\n';
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(opts.workers, total));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  if (opts.oracle_check) {
    run.oracle_checked = total;
    run.oracle_failures = std::size_t(std::count(agrees.begin(), agrees.end(), 0));
  }
  return run;
}

/// Per-cell seed: cells draw independent streams keyed on their sweep position.
inline std::vector<CircuitConfig> seeded_cells(const ExperimentSpec& spec) {
  auto cells = spec.cells();
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k].master_seed = stream_id(spec.master_seed, k);
  return cells;
}

struct ExperimentOutcome {
  std::vector<EnsemblePoint> points;
  std::vector<std::string> files;
  std::size_t oracle_checked = 0;
  std::size_t oracle_failures = 0;
};

namespace detail {

inline double observable(const EnsemblePoint& p, const std::string& which, bool err = false) {
  if (which == "I") return err ? p.i_stderr : p.i_mean;
  return err ? p.en_stderr : p.en_mean;
}

inline std::string key_prefix(const EnsemblePoint& p) { return to_string(p.model) + ',' + to_string(p.boundary); }

inline void write_file(const std::filesystem::path& path, const std::string& body, ExperimentOutcome& out) {
  std::ofstream f(path, std::ios::binary);
  f << body;
  f.flush();
  if (!f) throw OutputError("cannot write " + path.string());
  out.files.push_back(path.string());
}

// Points grouped by everything except q, in first-appearance order, q ascending.
inline std::vector<std::vector<EnsemblePoint>> group_by_q(const std::vector<EnsemblePoint>& pts) {
  std::map<std::tuple<int, int, std::size_t, double, std::size_t>, std::size_t> index;
  std::vector<std::vector<EnsemblePoint>> groups;
  for (const auto& p : pts) {
    const auto key = std::make_tuple(int(p.model), int(p.boundary), p.n_qubits, p.measure_rate, p.t_noise);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(p);
  }
  for (auto& g : groups)
    std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.reset_rate < b.reset_rate; });
  return groups;
}

// Points grouped by everything except L, L ascending.
inline std::vector<std::vector<EnsemblePoint>> group_by_size(const std::vector<EnsemblePoint>& pts) {
  std::map<std::tuple<int, int, double, double, std::size_t>, std::size_t> index;
  std::vector<std::vector<EnsemblePoint>> groups;
  for (const auto& p : pts) {
    const auto key = std::make_tuple(int(p.model), int(p.boundary), p.measure_rate, p.reset_rate, p.t_noise);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(p);
  }
  for (auto& g : groups)
    std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.n_qubits < b.n_qubits; });
  return groups;
}

inline std::vector<Sample> q_samples(const std::vector<EnsemblePoint>& g, const std::string& obs) {
  std::vector<Sample> s;
  for (const auto& p : g)
    if (p.reset_rate > 0) s.push_back({p.reset_rate, observable(p, obs), observable(p, obs, true)});
  return s;
}

inline std::string fit_row(const std::string& prefix, const std::string& size, const EnsemblePoint& p,
                           const std::string& obs, const FitResult& f, double q_max) {
  return prefix + ',' + size + ',' + format_double(p.measure_rate) + ',' + std::to_string(p.t_noise) + ',' + obs +
         ',' + to_string(f.model) + ',' + format_double(f.a) + ',' + format_double(f.b) + ',' +
         (std::isnan(f.exponent) ? std::string() : format_double(f.exponent)) + ',' + format_double(f.rss) + ',' +
         std::to_string(f.q.size()) + ',' + format_double(q_max) + '\n';
}

}  // namespace detail

/// Fits of S(q) per fixed-L series, and of the 1/L-extrapolated series when
/// several sizes are present. Series with too few points in the window are skipped.
inline std::string fits_table(const std::vector<EnsemblePoint>& points, const std::vector<FitModel>& models,
                              double q_max) {
  std::string out = std::string(kFitsHeader) + '\n';
  for (const auto& g : detail::group_by_q(points))
    for (const char* obs : {"I", "EN"})
      for (auto m : models) {
        try {
          const auto f = fit_scaling(detail::q_samples(g, obs), m, q_max);
          out += detail::fit_row(detail::key_prefix(g[0]), std::to_string(g[0].n_qubits), g[0], obs, f, q_max);
        } catch (const AnalysisError&) {
        }
      }
  // Extrapolated series: one S_inf per q over all sizes.
  std::map<std::tuple<int, int, double, std::size_t>, std::vector<std::pair<EnsemblePoint, ThermoFit>>> inf;
  for (const char* obs : {"I", "EN"}) {
    inf.clear();
    for (const auto& g : detail::group_by_size(points)) {
      std::vector<Sample> s;
      for (const auto& p : g) s.push_back({double(p.n_qubits), detail::observable(p, obs), detail::observable(p, obs, true)});
      try {
        inf[{int(g[0].model), int(g[0].boundary), g[0].measure_rate, g[0].t_noise}].push_back({g[0], extrapolate_thermo(s)});
      } catch (const AnalysisError&) {
      }
    }
    for (const auto& [key, series] : inf) {
      std::vector<Sample> s;
      for (const auto& [p, t] : series)
        if (p.reset_rate > 0) s.push_back({p.reset_rate, t.s_inf, t.s_inf_stderr});
      for (auto m : models) {
        try {
          out += detail::fit_row(detail::key_prefix(series[0].first), "inf", series[0].first, obs,
                                 fit_scaling(s, m, q_max), q_max);
        } catch (const AnalysisError&) {
        }
      }
    }
  }
  return out;
}

inline std::string thermo_table(const std::vector<EnsemblePoint>& points) {
  std::string out = std::string(kThermoHeader) + '\n';
  for (const auto& g : detail::group_by_size(points))
    for (const char* obs : {"I", "EN"}) {
      std::vector<Sample> s;
      for (const auto& p : g) s.push_back({double(p.n_qubits), detail::observable(p, obs), detail::observable(p, obs, true)});
      try {
        const auto t = extrapolate_thermo(s);
        const auto& p = g[0];
        out += detail::key_prefix(p) + ',' + format_double(p.measure_rate) + ',' + format_double(p.reset_rate) + ',' +
               std::to_string(p.t_noise) + ',' + obs + ',' + format_double(t.s_inf) + ',' +
               format_double(t.s_inf_stderr) + ',' + format_double(t.c) + ',' + format_double(t.c_stderr) + ',' +
               std::to_string(g.size()) + '\n';
      } catch (const AnalysisError&) {
      }
    }
  return out;
}

struct CollapseTables {
  std::string summary, trace;
};

/// Collapse per (model, boundary, p, t_noise) family over its sizes.
inline CollapseTables collapse_tables(const std::vector<EnsemblePoint>& points, const std::string& obs,
                                      const CollapseOptions& opts) {
  std::map<std::tuple<int, int, double, std::size_t>, std::vector<EnsemblePoint>> fam;
  for (const auto& p : points) fam[{int(p.model), int(p.boundary), p.measure_rate, p.t_noise}].push_back(p);
  CollapseTables t{std::string(kCollapseHeader) + '\n', std::string(kCollapseTraceHeader) + '\n'};
  for (const auto& [key, pts] : fam) {
    std::vector<CollapseSample> data;
    std::set<std::size_t> sizes;
    for (const auto& p : pts) {
      data.push_back({double(p.n_qubits), p.reset_rate, detail::observable(p, obs)});
      sizes.insert(p.n_qubits);
    }
    const auto r = data_collapse(data, opts);
    const std::string prefix = detail::key_prefix(pts[0]) + ',' + format_double(pts[0].measure_rate) + ',' +
                               std::to_string(pts[0].t_noise) + ',' + obs;
    t.summary += prefix + ',' + format_double(r.q_c) + ',' + format_double(r.nu) + ',' + format_double(r.cost) + ',' +
                 std::to_string(sizes.size()) + '\n';
    for (std::size_t k = 0; k < r.trace.size(); ++k)
      t.trace += prefix + ',' + std::to_string(k) + ',' + format_double(r.trace[k].q_c) + ',' +
                 format_double(r.trace[k].nu) + ',' + format_double(r.trace[k].cost) + '\n';
  }
  return t;
}

/// S vs q on log-log axes with a q^{-1/3} guide, one series per fixed-L family.
inline Plot scaling_plot(const std::vector<EnsemblePoint>& points, const std::string& obs) {
  Plot plot;
  plot.title = obs + " vs reset rate";
  plot.xlabel = "q";
  plot.ylabel = obs == "I" ? "I(A:B)" : "E_N";
  plot.log_x = plot.log_y = true;
  double q_lo = 0, q_hi = 0, anchor = 0;
  for (const auto& g : detail::group_by_q(points)) {
    PlotSeries s;
    s.label = to_string(g[0].boundary) + " L=" + std::to_string(g[0].n_qubits) + " p=" + detail::svg_num(g[0].measure_rate);
    if (g[0].model == NoiseModel::kBoundaryPlusLateBulk) s.label += " tn=" + std::to_string(g[0].t_noise);
    for (const auto& p : g) {
      if (!(p.reset_rate > 0)) continue;
      s.x.push_back(p.reset_rate);
      s.y.push_back(detail::observable(p, obs));
      s.err.push_back(detail::observable(p, obs, true));
    }
    if (s.x.size() < 2) continue;
    if (plot.series.empty()) q_lo = s.x.front(), q_hi = s.x.back(), anchor = s.y.front();
    plot.series.push_back(std::move(s));
  }
  if (!plot.series.empty() && anchor > 0) {
    PlotSeries guide;
    guide.label = "q^-1/3";
    guide.guide = true;
    for (double q : {q_lo, q_hi}) {
      guide.x.push_back(q);
      guide.y.push_back(anchor * std::cbrt(q_lo / q));
    }
    plot.series.push_back(std::move(guide));
  }
  return plot;
}

/// S vs L on linear axes, one series per fixed-q family.
inline Plot size_plot(const std::vector<EnsemblePoint>& points, const std::string& obs) {
  Plot plot;
  plot.title = obs + " vs system size";
  plot.xlabel = "L";
  plot.ylabel = obs == "I" ? "I(A:B)" : "E_N";
  for (const auto& g : detail::group_by_size(points)) {
    if (g.size() < 2) continue;
    PlotSeries s;
    s.label = to_string(g[0].boundary) + " p=" + detail::svg_num(g[0].measure_rate) + " q=" + detail::svg_num(g[0].reset_rate);
    for (const auto& p : g) {
      s.x.push_back(double(p.n_qubits));
      s.y.push_back(detail::observable(p, obs));
      s.err.push_back(detail::observable(p, obs, true));
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

/// Runs the sweep and writes points.csv plus the enabled tables and plots.
inline ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::ostream* progress = nullptr) {
  spec.validate();
  namespace fs = std::filesystem;
  const fs::path dir(spec.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + spec.out_dir);

  EnsembleOptions eo;
  eo.trajectories = spec.trajectories;
  eo.workers = spec.resolved_workers();
  eo.oracle_check = spec.oracle_check;
  eo.progress = progress;
  const auto run = run_ensemble(seeded_cells(spec), eo);

  ExperimentOutcome out;
  out.oracle_checked = run.oracle_checked;
  out.oracle_failures = run.oracle_failures;
  for (const auto& recs : run.records) out.points.push_back(aggregate(recs));

  std::ostringstream pts;
  write_points(pts, out.points);
  detail::write_file(dir / "points.csv", pts.str(), out);

  if (spec.write_trajectories) {
    std::string body = std::string(kTrajectoriesHeader) + '\n';
    for (const auto& recs : run.records)
      for (const auto& r : recs) body += trajectory_row(r) + '\n';
    detail::write_file(dir / "trajectories.csv", body, out);
  }
  if (!spec.fits.empty()) {
    detail::write_file(dir / "fits.csv", fits_table(out.points, spec.fits, spec.q_max), out);
    detail::write_file(dir / "thermo.csv", thermo_table(out.points), out);
  }
  if (spec.collapse) {
    const auto t = collapse_tables(out.points, spec.collapse_observable, spec.collapse_options);
    detail::write_file(dir / "collapse.csv", t.summary, out);
    detail::write_file(dir / "collapse_trace.csv", t.trace, out);
  }
  if (spec.plots) {
    for (const char* obs : {"I", "EN"}) {
      const auto sq = scaling_plot(out.points, obs);
      if (!sq.series.empty()) detail::write_file(dir / (std::string(obs) + "_vs_q.svg"), render_svg(sq), out);
      const auto sl = size_plot(out.points, obs);
      if (!sl.series.empty()) detail::write_file(dir / (std::string(obs) + "_vs_L.svg"), render_svg(sl), out);
    }
  }
  return out;
}

}  // namespace hybridsim
