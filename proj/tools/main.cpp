#include "dmd/analysis.hpp"
#include "dmd/experiment.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace {

int simulate(const std::string& preset_name, const std::string& config_path,
             const std::optional<std::string>& out,
             const std::optional<std::uint64_t>& seed,
             const std::optional<double>& dt,
             const std::optional<double>& horizon) {
  dmd::ExperimentConfig config = config_path.empty()
                                     ? dmd::preset(preset_name)
                                     : dmd::load_experiment_config(config_path);
  if (out) config.out = *out;
  if (seed) config.seed = *seed;
  if (dt) {
    config.dt = *dt;
    for (auto& r : config.runs) r.dt.reset();
  }
  if (horizon) {
    config.horizon = *horizon;
    for (auto& r : config.runs) r.horizon.reset();
  }

  const dmd::ExperimentResult result = dmd::run_experiment(config);
  for (const auto& r : result.runs) {
    std::cout << std::left << std::setw(28) << r.label << std::setw(13)
              << dmd::to_string(r.verdict.status) << " limit = ("
              << r.verdict.limit_estimate.transpose().format(
                     Eigen::IOFormat(6, Eigen::DontAlignCols, ", ", ", "))
              << ")";
    if (r.discrete && r.discrete->hit_iteration)
      std::cout << "  hit at k = " << *r.discrete->hit_iteration;
    std::cout << '\n';
  }
  std::cout << "wrote " << result.summary_path.string() << '\n';
  return result.exit_code();
}

void catalog() {
  for (const auto& d : dmd::preset_catalog()) {
    const auto& c = d.config;
    std::cout << d.name << "  (figure " << d.figure << ")\n  " << d.description
              << "\n  eps = " << c.epsilon << ", gamma = " << c.gamma;
    bool flows = false;
    for (const auto& r : c.runs)
      flows = flows || r.kind == dmd::RunKind::dmd || r.kind == dmd::RunKind::md ||
              r.kind == dmd::RunKind::psgd;
    if (flows) std::cout << ", T = " << c.horizon << ", dt = " << c.dt;
    else
      std::cout << ", iterations = " << c.max_iter << ", pdmd step = "
                << c.pdmd_step << ", itr exponents = (" << c.itr.step_exponent
                << ", " << c.itr.regularization_exponent << ")";
    std::cout << "\n  runs:";
    for (const auto& r : c.runs) {
      std::cout << ' ' << dmd::to_string(r.kind);
      if (r.regularizer) std::cout << '/' << dmd::to_string(*r.regularizer);
    }
    std::cout << "\n\n";
  }
}

int verify_maps(const std::string& kind, double epsilon, int samples,
                std::uint64_t seed, int dim) {
  const auto reg =
      dmd::default_regularizer(dmd::parse_regularizer_kind(kind), epsilon, dim);
  const auto report = dmd::verify_mirror_map_properties(reg, samples, seed);
  std::cout << dmd::to_json(report) << '\n';
  return report.passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discounted mirror descent dynamics for concave games"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a preset or a config file");
  std::string preset_name, config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, horizon;
  auto* preset_opt = sim->add_option("--preset", preset_name, "Preset name (see catalog)");
  auto* config_opt = sim->add_option("--config", config_path, "JSON experiment file")
                         ->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  sim->add_option("--out", out, "Output directory");
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--dt", dt, "Integration step for every flow")
      ->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "Time horizon for every flow")
      ->check(CLI::PositiveNumber);

  app.add_subcommand("catalog", "List the built-in presets");

  auto* vm = app.add_subcommand("verify-maps",
                                "Check the mirror-map properties of a regularizer");
  std::string kind;
  double epsilon = 1.0;
  int samples = 1000, dim = 3;
  std::uint64_t vm_seed = 0;
  vm->add_option("--kind", kind,
                 "euclidean, simplex_entropy, boltzmann_shannon, fermi_dirac "
                 "or hellinger")
      ->required();
  vm->add_option("--epsilon", epsilon, "Regularization weight")
      ->check(CLI::PositiveNumber);
  vm->add_option("--samples", samples, "Number of sampled points")
      ->check(CLI::Range(2, 100'000'000));
  vm->add_option("--seed", vm_seed, "Random seed");
  vm->add_option("--dim", dim, "Dimension")->check(CLI::Range(1, 10'000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      if (preset_name.empty() && config_path.empty()) {
        std::cerr << "simulate: give --preset or --config\n";
        return 1;
      }
      return simulate(preset_name, config_path, out, seed, dt, horizon);
    }
    if (app.got_subcommand("catalog")) {
      catalog();
      return 0;
    }
    return verify_maps(kind, epsilon, samples, vm_seed, dim);
  } catch (const dmd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
