// hybridsim: run noisy hybrid-circuit sweeps and analyse their ensemble tables.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "hybridsim/experiment.hpp"

namespace {

using namespace hybridsim;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::pair<double, double> parse_range(const std::string& s, const char* what) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError(std::string(what) + " must look like A:B");
  try {
    std::size_t used = 0;
    const double a = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(s);
    const std::string rest = s.substr(colon + 1);
    const double b = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(what) + " must look like A:B, got '" + s + "'");
  }
}

int cmd_run(const std::string& spec_path, const std::string& out, std::size_t workers, bool oracle,
            std::optional<std::uint64_t> seed) {
  ExperimentSpec spec = load_experiment(spec_path);
  if (!out.empty()) spec.out_dir = out;
  if (workers) spec.workers = workers;
  if (oracle) spec.oracle_check = true;
  if (seed) spec.master_seed = *seed;
  spec.validate();
  std::cerr << "running " << spec.cells().size() << " cells x " << spec.trajectories << " trajectories on "
            << spec.resolved_workers() << " workers\n";
  const auto res = run_experiment(spec, &std::cerr);
  for (const auto& f : res.files) std::cout << f << '\n';
  if (spec.oracle_check) {
    std::cerr << "oracle check: " << res.oracle_checked - res.oracle_failures << "/" << res.oracle_checked
              << " trajectories agree\n";
    if (res.oracle_failures) return kRuntimeError;
  }
  return kOk;
}

int cmd_fit(const std::string& path, const std::string& model, double q_max) {
  const FitModel m = parse_fit_model(model);
  const auto points = load_points(path);
  const std::string table = fits_table(points, {m}, q_max);
  if (std::count(table.begin(), table.end(), '\n') < 2)
    throw AnalysisError("no series in " + path + " has enough points with q <= " + format_double(q_max));
  std::cout << table;
  return kOk;
}

int cmd_collapse(const std::string& path, const std::string& qc, const std::string& nu, const std::string& obs,
                 const std::string& trace_path) {
  CollapseOptions o;
  std::tie(o.qc_lo, o.qc_hi) = parse_range(qc, "--qc-range");
  std::tie(o.nu_lo, o.nu_hi) = parse_range(nu, "--nu-range");
  if (obs != "I" && obs != "EN") throw ConfigError("--observable must be I or EN");
  const auto t = collapse_tables(load_points(path), obs, o);
  std::cout << t.summary;
  if (!trace_path.empty()) {
    std::ofstream f(trace_path);
    f << t.trace;
    if (!f) throw OutputError("cannot write " + trace_path);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-state stabilizer simulation of noisy hybrid Clifford circuits"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  bool oracle = false;
  auto* run = app.add_subcommand("run", "Run an experiment sweep and write its tables and plots");
  run->add_option("spec", spec_path, "Experiment recipe (TOML)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the recipe)");
  run->add_option("--workers", workers, "Worker threads (default: $" + std::string(kWorkersEnv) + " or all cores)");
  run->add_flag("--oracle-check", oracle, "Replay every trajectory on the dense simulator (L <= 8)");
  run->add_option("--seed", seed, "Master seed (overrides the recipe)");

  std::string points_path, model, qc_range, nu_range, observable = "I", trace_path;
  double q_max = kDefaultQMax;
  auto* fit = app.add_subcommand("fit", "Fit S(q) for every series in a points table");
  fit->add_option("points", points_path, "points.csv")->required();
  fit->add_option("--model", model, "pow13, powfree or log")->required();
  fit->add_option("--qmax", q_max, "Largest q inside the fit window");

  auto* col = app.add_subcommand("collapse", "Finite-size collapse of g(q, L)");
  col->add_option("points", points_path, "points.csv")->required();
  col->add_option("--qc-range", qc_range, "Search range for q_c, A:B")->required();
  col->add_option("--nu-range", nu_range, "Search range for nu, A:B")->required();
  col->add_option("--observable", observable, "I or EN");
  col->add_option("--trace", trace_path, "Write the search trace here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(spec_path, out_dir, workers, oracle, seed);
    if (*fit) return cmd_fit(points_path, model, q_max);
    return cmd_collapse(points_path, qc_range, nu_range, observable, trace_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const AnalysisError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
