#ifndef DMD_EXPERIMENT_HPP
#define DMD_EXPERIMENT_HPP

#include "dmd/analysis.hpp"
#include "dmd/discrete.hpp"
#include "dmd/equilibrium.hpp"
#include "dmd/flows.hpp"
#include "dmd/game.hpp"
#include "dmd/regularizer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dmd {

// ---------------------------------------------------------------------------
// Polynomial regression as a two-player zero-sum game.

struct RegressionData {
  std::vector<double> a;
  std::vector<double> b;
};

struct PolynomialRegressionGame {
  /// Player 1 holds the M+1 coefficients w, player 2 the N dual residuals.
  /// U(x) = R x - (0; b) with R = [[0, -A'], [A, -I]]; both sets are whole
  /// spaces.
  GameSpec game;
  /// Vandermonde matrix, N x (M+1).
  Matrix design;
  Vector targets;
  /// argmin_w |A w - b|, the first player's block of every Nash equilibrium.
  Vector least_squares;
};

/// Throws ConfigError when N < M+1, the sizes disagree, or A is rank
/// deficient.
PolynomialRegressionGame build_polynomial_regression_game(
    const RegressionData& data, int degree);

/// a_i = i / 10 for i = 1..points, b_i = 2 - 3 a + 1.5 a^2 - 0.4 a^3 plus
/// N(0, 0.05^2) noise drawn from a generator seeded with `seed`.
RegressionData synthetic_regression_data(std::uint64_t seed, int points = 20);

// ---------------------------------------------------------------------------
// Experiment configuration.

enum class RunKind { dmd, md, psgd, discrete_pdmd, itr };

std::string to_string(RunKind kind);
RunKind parse_run_kind(std::string_view name);

struct RunConfig {
  /// File stem of the run's CSV; derived from kind and regularizer if empty.
  std::string label;
  RunKind kind = RunKind::dmd;
  /// Required for dmd and md, ignored otherwise.
  std::optional<RegularizerKind> regularizer;
  /// Boltzmann-Shannon shift c (domain [-c, inf)).
  std::optional<double> shift;
  /// z(0) for dmd, md and discrete_pdmd; x(0) for psgd and itr. Defaults
  /// to zero (projected onto Omega for the primal schemes).
  std::optional<Vector> initial;
  std::optional<double> dt;
  std::optional<double> horizon;
};

struct RegressionConfig {
  int degree = 3;
  int points = 20;
  /// Explicit data; synthetic_regression_data(seed, points) when unset.
  std::optional<RegressionData> data;
  /// Every coordinate is confined to [-box_radius, box_radius].
  double box_radius = 50.0;
};

using GameConfig = std::variant<QuadraticGame, RegressionConfig>;

struct ExperimentConfig {
  std::string name = "custom";
  std::string description;
  /// Figure label shown by the catalog; empty for custom runs.
  std::string figure;

  GameConfig game;
  std::vector<RunConfig> runs;

  double epsilon = 0.1;
  double gamma = 1.0;
  double horizon = 50.0;
  double dt = 1e-3;
  int record_every = 100;

  long max_iter = 1'000'000;
  int discrete_record_every = 100;
  double pdmd_step = 1e-3;
  ItrSchedule itr;
  double hit_radius = 1.0;

  double tail_fraction = 0.25;
  double tolerance = 1e-3;
  /// Reference for target distances and discrete hit counts.
  std::optional<EquilibriumSet> target;
  /// Point near the rest point of interest; seeds the rest-point solver.
  std::optional<Vector> reference_point;
  /// A converged run "reached the rest point" when its limit lies this
  /// close to the perturbed equilibrium.
  double rest_point_tolerance = 0.05;

  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
};

/// Checks every field; throws ConfigError.
void validate(const ExperimentConfig& config);

struct PresetDescriptor {
  std::string name;
  std::string figure;
  std::string description;
  ExperimentConfig config;
};

/// quadratic-monotone, quadratic-hypo, pdmd-vs-itr, mean-learning,
/// poly-regression.
std::vector<PresetDescriptor> preset_catalog();

/// Throws ConfigError for an unknown name.
ExperimentConfig preset(std::string_view name);

/// Parses a JSON experiment file. A "preset" key starts from that preset and
/// the remaining keys override it. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Execution.

struct RunResult {
  std::string label;
  RunKind kind = RunKind::dmd;
  std::optional<RegularizerKind> regularizer;
  std::filesystem::path file;

  std::optional<Trajectory> trajectory;
  std::optional<DiscreteRun> discrete;

  ConvergenceVerdict verdict;
  std::optional<PerturbedEquilibrium> rest_point;
  std::string rest_point_error;
  std::optional<double> rest_point_distance;
  bool converged_to_rest_point = false;
  std::optional<LyapunovAudit> lyapunov;
  /// Regression game: distance of the first player's block to the
  /// least-squares coefficients.
  std::optional<double> least_squares_distance;
  double seconds = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunResult> runs;
  /// Least-squares coefficients, regression games only.
  std::optional<Vector> least_squares;
  std::filesystem::path summary_path;
  std::filesystem::path timing_path;

  bool any_diverged() const;
  bool all_converged() const;
  /// 2 when a run diverged, 0 otherwise.
  int exit_code() const;
};

/// Runs every configured dynamics concurrently, writes one CSV per run,
/// then summary.json and timing.json into config.out. The CSV and summary
/// files depend only on the configuration; timing.json holds wall-clock
/// figures.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// The game a configuration describes, with its action sets.
GameSpec build_game(const ExperimentConfig& config,
                    std::optional<Vector>* least_squares = nullptr);

/// Per-player regularizers of a dmd or md run over the game's action sets.
/// Euclidean keeps each set; Boltzmann-Shannon replaces it with the shifted
/// orthant; Fermi-Dirac needs a box; Hellinger needs a ball or a cube,
/// which it replaces with the inscribed ball.
RegularizerProfile build_regularizers(const GameSpec& game,
                                      RegularizerKind kind, double epsilon,
                                      double shift = 0.0);

}  // namespace dmd

#endif  // DMD_EXPERIMENT_HPP
