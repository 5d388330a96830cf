#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "hybridsim/clifford.hpp"
#include "hybridsim/entanglement.hpp"
#include "hybridsim/event_log.hpp"
#include "hybridsim/tableau.hpp"

namespace hybridsim {

using Rng = std::mt19937_64;

enum class NoiseModel {
  kBulkNoise,             // rate-q resets everywhere, every step
  kBoundaryPlusLateBulk,  // resets on sites 0 and L-1 every step, rate-q bulk resets in the last t_noise steps
};

enum class Boundary { kPeriodic, kOpen };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::size_t default_depth(std::size_t n_qubits) { return 8 * n_qubits; }

struct CircuitConfig {
  NoiseModel model = NoiseModel::kBulkNoise;
  std::size_t n_qubits = 8;
  double measure_rate = 0.0;
  double reset_rate = 0.0;
  std::size_t t_noise = 0;
  Boundary boundary = Boundary::kPeriodic;
  std::size_t depth = 64;
  /// Deterministic boundary resets of the BoundaryPlusLateBulk model.
  bool boundary_resets = true;
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory_index = 0;

  void validate() const {
    if (n_qubits < 2 || n_qubits % 2 != 0) throw ConfigError("L must be even and at least 2");
    if (!(measure_rate >= 0.0 && measure_rate <= 1.0)) throw ConfigError("p must lie in [0, 1]");
    if (!(reset_rate >= 0.0 && reset_rate <= 1.0)) throw ConfigError("q must lie in [0, 1]");
    if (depth < 1) throw ConfigError("depth must be at least 1");
    if (model == NoiseModel::kBoundaryPlusLateBulk && t_noise > depth)
      throw ConfigError("t_noise exceeds depth");
  }
};

inline std::string to_string(NoiseModel m) {
  return m == NoiseModel::kBulkNoise ? "bulk" : "boundary_late_bulk";
}
inline std::string to_string(Boundary b) { return b == Boundary::kPeriodic ? "pbc" : "obc"; }

inline NoiseModel parse_noise_model(const std::string& s) {
  if (s == "bulk") return NoiseModel::kBulkNoise;
  if (s == "boundary_late_bulk") return NoiseModel::kBoundaryPlusLateBulk;
  throw ConfigError("unknown model '" + s + "' (expected bulk or boundary_late_bulk)");
}
inline Boundary parse_boundary(const std::string& s) {
  if (s == "pbc") return Boundary::kPeriodic;
  if (s == "obc") return Boundary::kOpen;
  throw ConfigError("unknown boundary '" + s + "' (expected pbc or obc)");
}

enum class ResetSlot { kNone, kRandom, kForced };

/// Reset treatment of (site, time) under the configured geometry.
inline ResetSlot noise_schedule(const CircuitConfig& cfg, std::size_t site, std::size_t time) {
  if (cfg.model == NoiseModel::kBulkNoise) return ResetSlot::kRandom;
  if (cfg.boundary_resets && (site == 0 || site + 1 == cfg.n_qubits)) return ResetSlot::kForced;
  return time + cfg.t_noise >= cfg.depth ? ResetSlot::kRandom : ResetSlot::kNone;
}

/// Per-trajectory random stream: a keyed mix of (master_seed, index).
inline std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(master_seed ^ mix(index ^ 0x5851f42d4c957f2dULL));
}

/// Observers of a running trajectory; every member is optional.
struct StepTrace {
  EventLog* log = nullptr;
  bool validate = false;
  std::size_t n_gates = 0;
  std::size_t n_measurements = 0;
  std::size_t n_resets = 0;
};

/// One time step: even-bond gates, odd-bond gates (plus the wrap bond under PBC),
/// the reset layer, then the measurement layer. Random draws are consumed in this
/// order; reset and measurement layers draw one uniform per site in site order.
inline void step(Tableau& t, const CircuitConfig& cfg, std::size_t time, Rng& rng, StepTrace* trace = nullptr) {
  const std::size_t n = cfg.n_qubits;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto after_channel = [&] {
    if (trace && trace->validate) t.validate();
  };
  auto gate = [&](std::size_t i, std::size_t j) {
    const CliffordGate& g = CliffordGate::element(
        std::uniform_int_distribution<std::size_t>(0, CliffordGate::kNumElements - 1)(rng));
    t.apply_gate(g, i, j);
    if (trace) {
      ++trace->n_gates;
      if (trace->log) trace->log->gate(i, j, g);
    }
    after_channel();
  };
  for (std::size_t i = 0; i + 1 < n; i += 2) gate(i, i + 1);
  for (std::size_t i = 1; i + 1 < n; i += 2) gate(i, i + 1);
  if (cfg.boundary == Boundary::kPeriodic) gate(n - 1, 0);

  for (std::size_t k = 0; k < n; ++k) {
    const double u = unit(rng);
    const ResetSlot slot = noise_schedule(cfg, k, time);
    if (slot == ResetSlot::kForced || (slot == ResetSlot::kRandom && u < cfg.reset_rate)) {
      t.reset(k);
      if (trace) {
        ++trace->n_resets;
        if (trace->log) trace->log->reset(k);
      }
      after_channel();
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (unit(rng) < cfg.measure_rate) {
      const auto res = t.measure_z(k, rng);
      if (trace) {
        ++trace->n_measurements;
        if (trace->log) trace->log->measure(k, res.outcome);
      }
      after_channel();
    }
  }
}

struct TrajectoryRecord {
  CircuitConfig config;
  EntanglementReport report;
  double wall_seconds = 0.0;
  std::uint64_t stream = 0;
  std::size_t n_measurements = 0;
  std::size_t n_resets = 0;
};

struct TrajectoryOptions {
  /// Check tableau invariants after every channel and the report at readout.
  bool validate = false;
  /// Receives every channel applied, for oracle replay.
  EventLog* log = nullptr;
};

/// Runs |0..0> through `depth` steps and reads out the half-chain report.
/// Deterministic in (master_seed, trajectory_index).
inline TrajectoryRecord run_trajectory(const CircuitConfig& cfg, const TrajectoryOptions& opts = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.stream = stream_id(cfg.master_seed, cfg.trajectory_index);
  Rng rng(rec.stream);
  Tableau t = Tableau::product_state(cfg.n_qubits);
  StepTrace trace;
  trace.log = opts.log;
  trace.validate = opts.validate;
  for (std::size_t time = 0; time < cfg.depth; ++time) step(t, cfg, time, rng, &trace);
  rec.report = entanglement_report(t, Bipartition::half_chain(cfg.n_qubits));
  if (opts.validate) check_report(rec.report);
  rec.n_measurements = trace.n_measurements;
  rec.n_resets = trace.n_resets;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace hybridsim
