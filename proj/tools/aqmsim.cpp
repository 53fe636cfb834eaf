// aqmsim: fluid-model TCP/AQM simulator with RBF controller optimization.
//
// Subcommands:
//   run       one scenario with one controller, CSV + manifest output
//   sweep     connection-count or delay sweeps over a controller list
//   optimize  PSO weight tuning or the nested GA-PSO structure search
//   replay    re-execute a saved manifest

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aqm/config.hpp"
#include "aqm/io.hpp"
#include "aqm/optimize.hpp"
#include "aqm/scenario.hpp"

namespace fs = std::filesystem;
using namespace aqm;

namespace {

constexpr int kExitSimFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ConfigDocument load_config(const std::string& path) {
  if (path.empty()) return ConfigDocument{};
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  return ConfigDocument::parse(read_file(path));
}

fs::path resolve_out_dir(std::string out) {
  if (const char* env = std::getenv("AQMSIM_OUT"); env && *env) out = env;
  if (out.empty()) out = ".";
  fs::create_directories(out);
  return out;
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Snapshot of every effective setting, for the manifest.
ConfigDocument resolved_config(const ConfigDocument& doc, std::uint64_t seed) {
  ConfigDocument r = doc;
  NetworkParams net = network_params_from(doc);
  SimOptions opts = sim_options_from(doc);
  r.set("run", "seed", std::to_string(seed));
  r.set("network", "capacity", format_double(net.capacity));
  r.set("network", "prop_delay", format_double(net.prop_delay));
  r.set("network", "buffer", format_double(net.buffer));
  r.set("network", "packet_size", format_double(net.packet_size));
  r.set("network", "dt", format_double(net.dt));
  r.set("network", "horizon", format_double(net.horizon));
  r.set("network", "w0", format_double(opts.w0));
  r.set("network", "q0", format_double(opts.q0));
  r.set("network", "delayed_drop_probability",
        opts.delayed_drop_probability ? "true" : "false");
  r.set("output", "sample_period",
        format_double(doc.get_double("output", "sample_period", 0.01)));
  return r;
}

bool sustained_oscillation(const RunRecord& run) {
  if (run.series.size() < 4) return false;
  std::size_t tail = run.series.size() * 7 / 10;
  double lo = run.series[tail].q, hi = lo;
  for (std::size_t i = tail; i < run.series.size(); ++i) {
    lo = std::min(lo, run.series[i].q);
    hi = std::max(hi, run.series[i].q);
  }
  return hi - lo > 50.0;
}

// Drop Tail has no early marking: its only congestion signal is an overflow
// drop, which sources notice one RTT later. Default it to the delayed-loss
// plant variant unless the config pins the flag.
ConfigDocument with_controller_defaults(ConfigDocument doc,
                                        const std::string& controller_name) {
  if (controller_name == "droptail" &&
      !doc.has("network", "delayed_drop_probability"))
    doc.set("network", "delayed_drop_probability", "true");
  return doc;
}

int do_run(const ConfigDocument& base_doc, const std::string& scenario_name,
           const std::string& controller_name, const fs::path& out_dir,
           std::uint64_t seed) {
  auto scenario = find_scenario(scenario_name);
  if (!scenario) throw UsageError("unknown scenario: " + scenario_name);

  ConfigDocument doc = with_controller_defaults(base_doc, controller_name);
  NetworkParams net = network_params_from(doc);
  SimOptions opts = sim_options_from(doc);
  if (doc.has("network", "horizon")) scenario->horizon = net.horizon;
  double sample_period = doc.get_double("output", "sample_period", 0.01);

  auto controller = controller_from(doc, controller_name, net, scenario->target_queue);
  RunRecord run = run_scenario(*scenario, *controller, net, opts, sample_period);

  write_file(out_dir / "timeseries.csv", timeseries_csv(run));
  write_file(out_dir / "summary.csv", summary_csv({run}));
  ConfigDocument manifest = make_manifest(resolved_config(doc, seed), "run",
                                          scenario_name, controller_name);
  write_file(out_dir / "manifest.cfg", manifest.serialize());

  const RunSummary& s = run.summary;
  std::cout << "run scenario=" << scenario_name << " controller=" << controller_name
            << " IAE=" << format_double(s.iae)
            << " utilization=" << format_double(s.utilization)
            << " loss_rate=" << format_double(s.loss_rate)
            << " q_final=" << format_double(run.series.back().q)
            << " settling_time=" << format_double(s.settling_time)
            << " oscillating=" << (sustained_oscillation(run) ? "true" : "false")
            << "\n";
  return 0;
}

int do_sweep(const ConfigDocument& doc, const std::string& kind_name,
             const std::vector<std::string>& controllers,
             const fs::path& out_dir, std::uint64_t seed) {
  if (controllers.empty()) throw UsageError("sweep: empty controller list");
  SweepKind kind;
  if (kind_name == "connections")
    kind = SweepKind::Connections;
  else if (kind_name == "delay")
    kind = SweepKind::Delay;
  else
    throw UsageError("unknown sweep kind: " + kind_name);

  auto grid = default_sweep_grid(kind);

  std::vector<SweepTableRow> table;
  for (const auto& name : controllers) {
    ConfigDocument cdoc = with_controller_defaults(doc, name);
    NetworkParams net = network_params_from(cdoc);
    SimOptions opts = sim_options_from(cdoc);
    auto rows = sweep(
        kind, [&] { return controller_from(cdoc, name, net, 150.0); }, grid, net, opts);
    for (const auto& row : rows) {
      if (!row.ok)
        std::cerr << "sweep point x=" << row.x << " controller=" << name
                  << " failed: " << row.error << "\n";
      table.push_back({row.x, name, row});
    }
  }
  write_file(out_dir / "sweep.csv", sweep_csv(table));
  ConfigDocument manifest = make_manifest(resolved_config(doc, seed), "sweep",
                                          kind_name, "");
  manifest.set("manifest", "sweep_path", "sweep.csv");
  write_file(out_dir / "manifest.cfg", manifest.serialize());
  std::cout << "sweep kind=" << kind_name << " controllers=" << controllers.size()
            << " rows=" << table.size() << "\n";
  return 0;
}

TuningSetup make_setup(const ConfigDocument& doc, double horizon,
                       bool tune_integral) {
  TuningSetup setup;
  setup.scenario = *find_scenario("s1");
  setup.scenario.horizon = horizon;
  setup.params = network_params_from(doc);
  setup.opts = sim_options_from(doc);
  setup.tune_integral_gain = tune_integral;
  setup.control_period = doc.get_double("controller", "control_period", 1.0 / 160.0);
  setup.weight_bounds = {doc.get_double("pso", "weight_min", -1.0),
                         doc.get_double("pso", "weight_max", 1.0)};
  setup.integral_gain_bounds = {doc.get_double("pso", "integral_gain_min", 0.0),
                                doc.get_double("pso", "integral_gain_max", 0.01)};
  return setup;
}

void write_spec_document(const ConfigDocument& base, const RbfSpec& spec,
                         const std::string& type, const fs::path& path) {
  ConfigDocument out = base;
  write_rbf_spec(out, spec, type);
  write_file(path, out.serialize());
}

int do_optimize(const ConfigDocument& doc, const std::string& mode,
                int neurons, const std::string& controller_type,
                bool surrogate, const fs::path& out_dir, std::uint64_t seed) {
  if (controller_type != "rbf" && controller_type != "irbf")
    throw UsageError("optimize: controller must be rbf or irbf");
  bool tune_integral = controller_type == "irbf";

  if (mode == "pso") {
    PsoConfig pso = pso_config_from(doc);
    pso.seed = detail::splitmix64(seed ^ 0x70736fULL);
    TuningSetup setup = make_setup(doc, doc.get_double("pso", "horizon", 50.0),
                                   tune_integral);
    TunedController tuned = tune_weights(RbfSpec::evenly_spaced(neurons), pso, setup);
    write_file(out_dir / "convergence.csv", convergence_csv(tuned.trace));
    write_spec_document(resolved_config(doc, seed), tuned.spec, controller_type,
                        out_dir / "spec.cfg");
    std::cout << "optimize mode=pso neurons=" << neurons
              << " best_iae=" << format_double(tuned.iae) << "\n";
    return 0;
  }

  if (mode == "ga-pso") {
    GaConfig ga = ga_config_from(doc);
    ga.seed = detail::splitmix64(seed ^ 0x6761ULL);

    if (surrogate) {
      auto result = evolve([](int n) { return -double(n - 5) * double(n - 5); }, ga);
      std::string csv = "generation,best_n,best_F\n";
      for (std::size_t g = 0; g < result.trace.size(); ++g)
        csv += std::to_string(g) + "," + std::to_string(result.trace[g].best_n) +
               "," + format_double(result.trace[g].best_fitness) + "\n";
      write_file(out_dir / "ga_trace.csv", csv);
      std::cout << "optimize mode=ga-pso surrogate=true best_n=" << result.best_n
                << "\n";
      return 0;
    }

    PsoConfig inner;
    inner.swarm_size = static_cast<int>(doc.get_int("ga", "inner_swarm", 10));
    inner.max_iterations =
        static_cast<int>(doc.get_int("ga", "inner_iterations", 50));
    TuningSetup inner_setup =
        make_setup(doc, doc.get_double("ga", "inner_horizon", 20.0), tune_integral);

    auto search = structure_search(ga, inner, inner_setup);
    std::string csv = "generation,best_n,best_F\n";
    for (std::size_t g = 0; g < search.ga.trace.size(); ++g)
      csv += std::to_string(g) + "," + std::to_string(search.ga.trace[g].best_n) +
             "," + format_double(search.ga.trace[g].best_fitness) + "\n";
    write_file(out_dir / "ga_trace.csv", csv);

    // full-budget PSO on the winning geometry
    PsoConfig pso = pso_config_from(doc);
    pso.seed = detail::splitmix64(seed ^ 0x70736fULL);
    TuningSetup setup = make_setup(doc, doc.get_double("pso", "horizon", 50.0),
                                   tune_integral);
    TunedController tuned =
        tune_weights(RbfSpec::evenly_spaced(search.ga.best_n), pso, setup);
    write_file(out_dir / "convergence.csv", convergence_csv(tuned.trace));
    write_spec_document(resolved_config(doc, seed), tuned.spec, controller_type,
                        out_dir / "spec.cfg");
    std::cout << "optimize mode=ga-pso best_n=" << search.ga.best_n
              << " best_iae=" << format_double(tuned.iae) << "\n";
    return 0;
  }

  throw UsageError("unknown optimize mode: " + mode);
}

int do_replay(const std::string& manifest_path, const fs::path& out_dir) {
  if (!fs::exists(manifest_path))
    throw UsageError("manifest not found: " + manifest_path);
  ConfigDocument doc = ConfigDocument::parse(read_file(manifest_path));
  std::string command = doc.get("manifest", "command", "");
  std::uint64_t seed = static_cast<std::uint64_t>(doc.get_int("run", "seed", 0));
  if (command == "run")
    return do_run(doc, doc.get("manifest", "scenario", "s1"),
                  doc.get("manifest", "controller", "droptail"), out_dir, seed);
  if (command == "sweep")
    throw UsageError("replay: sweep manifests record only the kind; rerun sweep");
  throw UsageError("replay: unsupported manifest command: " + command);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-model TCP/AQM simulator with GA-PSO controller tuning"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, weights_path, out = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out, "output directory (env AQMSIM_OUT overrides)");
  app.add_option("--seed", seed, "master RNG seed");

  auto* cmd_run = app.add_subcommand("run", "simulate one scenario");
  std::string scenario = "s1", controller = "droptail";
  cmd_run->add_option("--scenario", scenario, "s1|s2|s3-short|s3-long");
  cmd_run->add_option("--controller", controller,
                      "droptail|pi|rem|ared|rbf|irbf");
  cmd_run->add_option("--weights", weights_path,
                      "controller spec document (overrides [controller])");

  auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
  std::string kind = "connections", controllers_csv;
  cmd_sweep->add_option("--kind", kind, "connections|delay");
  cmd_sweep->add_option("--controllers", controllers_csv,
                        "comma-separated controller list")->required();

  auto* cmd_opt = app.add_subcommand("optimize", "tune RBF controllers");
  std::string mode = "pso", opt_controller = "irbf";
  int neurons = 5;
  bool surrogate = false;
  cmd_opt->add_option("--mode", mode, "pso|ga-pso");
  cmd_opt->add_option("--neurons", neurons, "hidden-layer size for --mode pso");
  cmd_opt->add_option("--controller", opt_controller, "rbf|irbf");
  cmd_opt->add_flag("--surrogate", surrogate,
                    "ga-pso on the synthetic structure objective (no simulation)");

  auto* cmd_replay = app.add_subcommand("replay", "re-execute a manifest");
  std::string manifest_path;
  cmd_replay->add_option("manifest", manifest_path, "manifest file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    ConfigDocument doc = load_config(config_path);
    if (!weights_path.empty()) {
      if (!fs::exists(weights_path))
        throw UsageError("weights file not found: " + weights_path);
      doc.merge(ConfigDocument::parse(read_file(weights_path)));
    }
    if (!doc.has("run", "seed") || seed != 0)
      doc.set("run", "seed", std::to_string(seed));
    seed = static_cast<std::uint64_t>(doc.get_int("run", "seed", 0));
    fs::path out_dir = resolve_out_dir(out);

    if (cmd_run->parsed()) return do_run(doc, scenario, controller, out_dir, seed);
    if (cmd_sweep->parsed())
      return do_sweep(doc, kind, split_list(controllers_csv), out_dir, seed);
    if (cmd_opt->parsed())
      return do_optimize(doc, mode, neurons, opt_controller, surrogate, out_dir, seed);
    if (cmd_replay->parsed()) return do_replay(manifest_path, out_dir);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SimulationError& e) {
    std::cerr << "simulation failed: " << e.what() << "\n";
    return kExitSimFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSimFailure;
  }
}
