// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Scratch output goes under argv[1] (default: cwd).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hybridsim/experiment.hpp"

namespace {

using namespace hybridsim;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path g_scratch;

// Shared between criteria 1 and 3.
std::vector<TrajectoryRecord> g_small_records;

Verdict oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto bp = Bipartition::half_chain(6);
  std::size_t bad = 0;
  double worst = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    CircuitConfig c;
    c.n_qubits = 6;
    c.depth = 20;
    c.measure_rate = 0.2;
    c.reset_rate = 0.1;
    c.boundary = i % 2 ? Boundary::kOpen : Boundary::kPeriodic;
    c.master_seed = 1;
    c.trajectory_index = i;
    EventLog log;
    const auto rec = run_trajectory(c, {true, &log});
    g_small_records.push_back(rec);
    const auto d = oracle::replay(6, log).report(bp);
    const auto& r = rec.report;
    for (double diff : {r.s_a - d.s_a, r.s_b - d.s_b, r.s_ab - d.s_ab, r.mutual_information - d.mutual_information,
                        r.log_negativity() - d.log_negativity})
      worst = std::max(worst, std::abs(diff));
    const bool ok = oracle_agrees(rec, log) && double(r.purity_exponent) == std::round(d.purity_log2) &&
                    std::abs(d.purity_log2 - std::round(d.purity_log2)) < 1e-9;
    bad += !ok;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 30.0, "200 trajectories, mismatches=" + std::to_string(bad) +
                                       ", max |diff|=" + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
}

Verdict trivial_fixed_points() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t nonzero = 0, impure_steps = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    CircuitConfig c;
    c.n_qubits = 16;
    c.depth = default_depth(16);
    c.measure_rate = 0.1;
    c.reset_rate = 1.0;
    c.boundary = i % 2 ? Boundary::kOpen : Boundary::kPeriodic;
    c.trajectory_index = i;
    const auto r = run_trajectory(c).report;
    nonzero += r.mutual_information != 0 || r.log_negativity_x2 != 0;
  }
  for (std::uint64_t i = 0; i < 50; ++i) {
    CircuitConfig c;
    c.n_qubits = 16;
    c.depth = default_depth(16);
    c.boundary = i % 2 ? Boundary::kOpen : Boundary::kPeriodic;
    Tableau t = Tableau::product_state(16);
    Rng rng(stream_id(3, i));
    for (std::size_t time = 0; time < c.depth; ++time) {
      step(t, c, time, rng);
      impure_steps += t.purity_exponent() != 0;
    }
  }
  const double secs = seconds_since(t0);
  return {nonzero == 0 && impure_steps == 0 && secs < 5.0,
          "q=1 nonzero I/E_N: " + std::to_string(nonzero) + "/100; p=q=0 impure steps: " +
              std::to_string(impure_steps) + "; " + fmt("%.2f", secs) + " s"};
}

Verdict stabilizer_bound() {
  std::size_t violations = 0;
  for (const auto& r : g_small_records)
    violations += r.report.log_negativity() > 0.5 * r.report.mutual_information;
  return {!g_small_records.empty() && violations == 0,
          std::to_string(violations) + " violations over " + std::to_string(g_small_records.size()) + " trajectories"};
}

ExperimentOutcome run_spec(const std::string& text, const std::string& dir, std::size_t workers) {
  std::istringstream in(text);
  ExperimentSpec s = parse_experiment(in);
  s.out_dir = (g_scratch / dir).string();
  s.workers = workers;
  fs::remove_all(s.out_dir);
  return run_experiment(s);
}

std::size_t hw_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Verdict phase_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto vol = run_spec("[sweep]\nL = [16, 32, 64]\np = [0.1]\nq = [0.0]\n[run]\ntrajectories = 200\n"
                            "master_seed = 41\nplots = false\n",
                            "phase_volume", hw_workers());
  const auto area = run_spec("[sweep]\nL = [16, 32, 64]\np = [0.6]\nq = [0.0]\n[run]\ntrajectories = 200\n"
                             "master_seed = 42\nplots = false\n",
                             "phase_area", hw_workers());
  const auto& v = vol.points;
  const auto& a = area.points;
  const double ratio = v[2].i_mean / v[0].i_mean;
  const double gap = std::abs(a[2].i_mean - a[1].i_mean);
  const double comb = std::hypot(a[2].i_stderr, a[1].i_stderr);
  return {ratio >= 3.0 && gap <= 3.0 * comb,
          "p=0.1: I(16)=" + fmt("%.3f", v[0].i_mean) + " I(64)=" + fmt("%.3f", v[2].i_mean) +
              " ratio=" + fmt("%.2f", ratio) + "; p=0.6: |I(64)-I(32)|=" + fmt("%.3f", gap) +
              " vs 3*stderr=" + fmt("%.3f", 3 * comb) + "; " + fmt("%.0f", seconds_since(t0)) + " s"};
}

constexpr const char* kScalingSpec =
    "[sweep]\nmodel = [\"bulk\"]\nboundary = [\"pbc\"]\nL = [128]\np = [0.1]\n"
    "q = [0.015625, 0.020833333333333332, 0.03125, 0.041666666666666664, 0.0625, 0.125]\n"
    "[run]\ntrajectories = 300\nmaster_seed = 2024\n"
    "[analysis]\nq_max = 0.125\nfits = [\"pow13\", \"powfree\", \"log\"]\n";

Verdict scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = run_spec(kScalingSpec, "scaling_w1", 1);
  std::vector<Sample> en;
  std::string table;
  for (const auto& p : out.points) {
    en.push_back({p.reset_rate, p.en_mean, p.en_stderr});
    table += " " + fmt("%.4g", p.reset_rate) + ":" + fmt("%.3f", p.en_mean) + "+-" + fmt("%.3f", p.en_stderr);
  }
  const auto free = fit_scaling(en, FitModel::kPowerFree);
  const auto third = fit_scaling(en, FitModel::kPowerFixedThird);
  const auto log = fit_scaling(en, FitModel::kLogLinear);
  const bool pass = free.exponent >= -0.41 && free.exponent <= -0.25 && third.rss < log.rss;
  std::cout << "    E_N(q):" << table << "\n";
  return {pass, "free exponent=" + fmt("%.4f", free.exponent) + " (target [-0.41,-0.25]); RSS pow13=" +
                    fmt("%.4g", third.rss) + " log=" + fmt("%.4g", log.rss) + "; " +
                    fmt("%.0f", seconds_since(t0)) + " s"};
}

Verdict boundary_ratio() {
  const auto out = run_spec(
      "[sweep]\nboundary = [\"pbc\", \"obc\"]\nL = [128]\np = [0.1]\nq = [0.0625]\n[run]\ntrajectories = 300\n"
      "master_seed = 2024\nplots = false\n",
      "boundary_ratio", hw_workers());
  const double ratio = out.points[0].i_mean / out.points[1].i_mean;
  return {ratio >= 1.5 && ratio <= 2.5, "I_pbc=" + fmt("%.3f", out.points[0].i_mean) + " I_obc=" +
                                            fmt("%.3f", out.points[1].i_mean) + " ratio=" + fmt("%.3f", ratio)};
}

Verdict fitter_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const auto th = extrapolate_thermo({{32, 3 + 5.0 / 32}, {64, 3 + 5.0 / 64}, {128, 3 + 5.0 / 128}});
  track(th.s_inf, 3);
  track(th.c, 5);
  const auto flat = extrapolate_thermo({{32, 2}, {64, 2}, {128, 2}});
  track(flat.s_inf, 2);
  track(flat.c, 0);
  std::vector<Sample> pw, lg;
  for (double q : {1.0 / 64, 1.0 / 48, 1.0 / 32, 1.0 / 24, 1.0 / 16, 1.0 / 8}) {
    pw.push_back({q, 2 * std::pow(q, -1.0 / 3)});
    lg.push_back({q, -1.5 * std::log(q) + 0.25});
  }
  const auto f3 = fit_scaling(pw, FitModel::kPowerFixedThird);
  track(f3.a, 2);
  track(f3.b, 0);
  track(f3.rss, 0);
  const auto ff = fit_scaling(pw, FitModel::kPowerFree);
  track(ff.exponent, -1.0 / 3);
  const auto fl = fit_scaling(lg, FitModel::kLogLinear);
  track(fl.a, -1.5);
  track(fl.b, 0.25);
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 1.0, "max parameter error=" + fmt("%.2e", worst) + ", " + fmt("%.3f", secs) + " s"};
}

Verdict collapse_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CollapseSample> d;
  for (double L : {32.0, 64.0, 128.0, 256.0})
    for (int k = 0; k <= 14; ++k) {
      const double q = 0.01 + 0.005 * k;
      d.push_back({L, q, std::tanh((q - 0.035) * std::pow(L, 1 / 0.94))});
    }
  const auto r = data_collapse(d, {0.02, 0.05, 0.6, 1.4});
  const double secs = seconds_since(t0);
  return {std::abs(r.q_c - 0.035) <= 0.005 && std::abs(r.nu - 0.94) <= 0.05 && secs < 60,
          "q_c=" + fmt("%.5f", r.q_c) + " nu=" + fmt("%.4f", r.nu) + ", " + fmt("%.2f", secs) + " s"};
}

Verdict determinism() {
  const std::size_t w = std::max<std::size_t>(4, hw_workers());
  run_spec(kScalingSpec, "scaling_wn", w);
  const std::string a = slurp(g_scratch / "scaling_w1" / "points.csv");
  const std::string b = slurp(g_scratch / "scaling_wn" / "points.csv");
  return {!a.empty() && a == b, "points.csv with 1 vs " + std::to_string(w) + " workers: " +
                                    (a == b ? "identical" : "differ") + " (" + std::to_string(a.size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  g_scratch = fs::path(argc > 1 ? argv[1] : ".") / "acceptance_out";
  fs::create_directories(g_scratch);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"trivial fixed points", trivial_fixed_points},
      {"negativity bound", stabilizer_bound},
      {"volume and area law", phase_check},
      {"q^-1/3 scaling of E_N", scaling},
      {"PBC/OBC ratio", boundary_ratio},
      {"fitter exactness", fitter_exactness},
      {"collapse recovery", collapse_recovery},
      {"worker-count determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << k + 1 << " " << criteria[k].first << ": " << v.detail
              << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
