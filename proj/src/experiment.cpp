#include "dmd/experiment.hpp"

#include "dmd/io.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>

namespace dmd {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Regression game

PolynomialRegressionGame build_polynomial_regression_game(
    const RegressionData& data, int degree) {
  if (degree < 0) throw ConfigError("polynomial degree must be >= 0");
  if (data.a.size() != data.b.size())
    throw ConfigError("regression data: a and b differ in length");
  const Index N = static_cast<Index>(data.a.size());
  const Index m = degree + 1;
  if (N < m)
    throw ConfigError("regression data: need at least degree + 1 points");

  Matrix A(N, m);
  for (Index i = 0; i < N; ++i) {
    double p = 1.0;
    for (Index j = 0; j < m; ++j) {
      A(i, j) = p;
      p *= data.a[i];
    }
  }
  Vector b = Eigen::Map<const Vector>(data.b.data(), N);

  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < m)
    throw ConfigError("regression data: Vandermonde matrix is rank deficient");

  const Index n = m + N;
  Matrix R = Matrix::Zero(n, n);
  R.block(0, m, m, N) = -A.transpose();
  R.block(m, 0, N, m) = A;
  R.block(m, m, N, N) = -Matrix::Identity(N, N);
  Vector offset = Vector::Zero(n);
  offset.tail(N) = -b;

  std::vector<ActionSet> sets{ActionSet::whole_space(m),
                              ActionSet::whole_space(N)};
  return PolynomialRegressionGame{
      GameSpec::affine(std::move(R), std::move(offset), std::move(sets)), A, b,
      qr.solve(b)};
}

RegressionData synthetic_regression_data(std::uint64_t seed, int points) {
  if (points < 1) throw ConfigError("synthetic data needs at least one point");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  RegressionData d;
  for (int i = 1; i <= points; ++i) {
    const double a = i / 10.0;
    d.a.push_back(a);
    d.b.push_back(2.0 - 3.0 * a + 1.5 * a * a - 0.4 * a * a * a + noise(rng));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(RunKind kind) {
  switch (kind) {
    case RunKind::dmd: return "dmd";
    case RunKind::md: return "md";
    case RunKind::psgd: return "psgd";
    case RunKind::discrete_pdmd: return "discrete_pdmd";
    case RunKind::itr: return "itr";
  }
  return "dmd";
}

RunKind parse_run_kind(std::string_view name) {
  for (RunKind k : {RunKind::dmd, RunKind::md, RunKind::psgd,
                    RunKind::discrete_pdmd, RunKind::itr}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown dynamics '" + std::string(name) +
                    "' (expected dmd, md, psgd, discrete_pdmd or itr)");
}

namespace {

bool is_flow(RunKind k) {
  return k == RunKind::dmd || k == RunKind::md || k == RunKind::psgd;
}

bool needs_regularizer(RunKind k) {
  return k == RunKind::dmd || k == RunKind::md;
}

std::string default_label(const RunConfig& run) {
  std::string label = to_string(run.kind);
  if (needs_regularizer(run.kind) && run.regularizer)
    label += "_" + to_string(*run.regularizer);
  return label;
}

std::string resolved_label(const RunConfig& run) {
  return run.label.empty() ? default_label(run) : run.label;
}

Index game_dim(const GameConfig& game) {
  if (const auto* q = std::get_if<QuadraticGame>(&game)) {
    Index n = 0;
    for (const auto& s : q->sets) n += s.dim();
    return n;
  }
  const auto& r = std::get<RegressionConfig>(game);
  const Index N = r.data ? static_cast<Index>(r.data->a.size()) : r.points;
  return r.degree + 1 + N;
}

}  // namespace

// ---------------------------------------------------------------------------
// Validation

void validate(const ExperimentConfig& c) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(what) + " must be a positive number");
  };
  positive(c.epsilon, "epsilon");
  positive(c.gamma, "gamma");
  positive(c.horizon, "horizon");
  positive(c.dt, "dt");
  positive(c.tolerance, "tolerance");
  positive(c.hit_radius, "hit_radius");
  positive(c.rest_point_tolerance, "rest_point_tolerance");
  if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0))
    throw ConfigError("tail_fraction must lie in (0, 1]");
  if (c.record_every < 1 || c.discrete_record_every < 1)
    throw ConfigError("record_every must be >= 1");
  if (c.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(c.pdmd_step > 0.0 && c.pdmd_step < 1.0))
    throw ConfigError("pdmd_step must lie in (0, 1)");
  if (c.runs.empty()) throw ConfigError("an experiment needs at least one run");

  if (const auto* q = std::get_if<QuadraticGame>(&c.game)) {
    (void)q->spec();  // dimension checks
  } else {
    const auto& r = std::get<RegressionConfig>(c.game);
    positive(r.box_radius, "box_radius");
    if (!r.data && r.points < r.degree + 1)
      throw ConfigError("regression: need at least degree + 1 points");
  }

  const Index n = game_dim(c.game);
  std::set<std::string> labels;
  for (const auto& run : c.runs) {
    if (needs_regularizer(run.kind) && !run.regularizer)
      throw ConfigError(to_string(run.kind) + " run needs a regularizer");
    if (run.initial && run.initial->size() != n)
      throw ConfigError("run '" + resolved_label(run) + "': initial point has " +
                        std::to_string(run.initial->size()) +
                        " entries, the game has " + std::to_string(n));
    if (run.dt) positive(*run.dt, "run dt");
    if (run.horizon) positive(*run.horizon, "run horizon");
    if (run.kind == RunKind::dmd || run.kind == RunKind::md ||
        run.kind == RunKind::psgd) {
      const double dt = run.dt.value_or(c.dt);
      const double horizon = run.horizon.value_or(c.horizon);
      if (dt > horizon)
        throw ConfigError("run '" + resolved_label(run) + "': dt exceeds the horizon");
      if (c.gamma * dt >= 1.0)
        throw ConfigError("run '" + resolved_label(run) + "': gamma * dt must be < 1");
    }
    if (run.shift && !(*run.shift >= 0.0))
      throw ConfigError("shift must be >= 0");
    const std::string label = resolved_label(run);
    if (label.empty() ||
        label.find_first_of("/\\ ") != std::string::npos || label[0] == '.')
      throw ConfigError("invalid run label '" + label + "'");
    if (!labels.insert(label).second)
      throw ConfigError("duplicate run label '" + label +
                        "'; give the runs explicit labels");
  }
  if (c.reference_point && c.reference_point->size() != n)
    throw ConfigError("reference_point has the wrong dimension");
  if (c.target) {
    const Index tn = std::visit(
        [](const auto& t) -> Index {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>,
                                       EquilibriumPoint>)
            return t.x.size();
          else
            return t.normal.size();
        },
        *c.target);
    if (tn != n) throw ConfigError("target has the wrong dimension");
  }
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<ActionSet> two_intervals(double lo, double hi) {
  return {ActionSet::box(1, lo, hi), ActionSet::box(1, lo, hi)};
}

RunConfig flow_run(RunKind kind, RegularizerKind reg,
                   std::optional<Vector> z0 = std::nullopt) {
  RunConfig r;
  r.kind = kind;
  r.regularizer = reg;
  r.initial = std::move(z0);
  return r;
}

constexpr RegularizerKind kFourKinds[] = {
    RegularizerKind::euclidean, RegularizerKind::boltzmann_shannon,
    RegularizerKind::fermi_dirac, RegularizerKind::hellinger};

// Distinct small z(0) per dynamics so the trajectories can be told apart.
std::vector<RunConfig> four_dmd_runs() {
  std::vector<RunConfig> runs;
  double offset = 0.0;
  for (RegularizerKind k : kFourKinds) {
    runs.push_back(flow_run(RunKind::dmd, k, Vector::Constant(2, offset)));
    offset += 0.1;
  }
  return runs;
}

ExperimentConfig monotone_preset() {
  ExperimentConfig c;
  c.name = "quadratic-monotone";
  c.figure = "1";
  c.description =
      "Monotone quadratic game (equilibria on the line x1 - x2 = 50), DMD "
      "under four regularizers, eps = 0.5";
  c.game = QuadraticGame{mat2(-10, 10, 10, -10), vec2(500, -500), {0.0, 0.0},
                         two_intervals(-100, 100)};
  c.runs = four_dmd_runs();
  c.epsilon = 0.5;
  c.horizon = 50.0;
  c.dt = 1e-4;
  c.record_every = 1000;
  c.target = EquilibriumHyperplane{vec2(1, -1), 50.0};
  return c;
}

ExperimentConfig hypo_preset() {
  ExperimentConfig c;
  c.name = "quadratic-hypo";
  c.figure = "2";
  c.description =
      "Hypo-monotone quadratic game (mu = 5, equilibrium (20, -20)), DMD "
      "under four regularizers, eps = 5.1";
  c.game = QuadraticGame{mat2(-10, 15, 15, -10), vec2(500, -500), {0.0, 0.0},
                         two_intervals(-100, 100)};
  c.runs = four_dmd_runs();
  c.epsilon = 5.1;
  c.horizon = 50.0;
  c.dt = 1e-4;
  c.record_every = 1000;
  c.target = EquilibriumPoint{vec2(20, -20)};
  c.reference_point = vec2(20, -20);
  return c;
}

ExperimentConfig pdmd_itr_preset() {
  ExperimentConfig c;
  c.name = "pdmd-vs-itr";
  c.figure = "3";
  c.description =
      "Discrete PDMD (t = 0.001, eps = 0.1) against iterative Tikhonov "
      "regularization (t_k = k^-0.48, eps_k = k^-0.51) on the monotone game";
  c.game = QuadraticGame{mat2(-10, 10, 10, -10), vec2(500, -500), {0.0, 0.0},
                         two_intervals(-100, 100)};
  RunConfig pdmd;
  pdmd.kind = RunKind::discrete_pdmd;
  RunConfig itr;
  itr.kind = RunKind::itr;
  c.runs = {pdmd, itr};
  c.epsilon = 0.1;
  c.pdmd_step = 1e-3;
  c.itr = ItrSchedule{0.48, 0.51};
  c.max_iter = 1'000'000;
  c.discrete_record_every = 100;
  c.target = EquilibriumHyperplane{vec2(1, -1), 50.0};
  return c;
}

ExperimentConfig mean_learning_preset() {
  ExperimentConfig c;
  c.name = "mean-learning";
  c.figure = "4";
  c.description =
      "Learning the mean v = 50 as a zero-sum game; discounted DMD against "
      "undiscounted MD under four regularizers, eps = 0.1";
  c.game = QuadraticGame{mat2(0, 1, -1, 0), vec2(0, 50), {0.0, 0.0},
                         two_intervals(-100, 100)};
  for (RunKind kind : {RunKind::dmd, RunKind::md}) {
    for (RegularizerKind k : kFourKinds) {
      RunConfig r = flow_run(kind, k);
      // With c = 0 the equilibrium (50, 0) sits on the orthant's boundary
      // and undiscounted MD escapes instead of orbiting it.
      if (k == RegularizerKind::boltzmann_shannon) r.shift = 1.0;
      c.runs.push_back(r);
    }
  }
  c.epsilon = 0.1;
  c.horizon = 100.0;
  c.dt = 1e-4;
  c.record_every = 1000;
  c.target = EquilibriumPoint{vec2(50, 0)};
  c.reference_point = vec2(50, 0);
  return c;
}

ExperimentConfig regression_preset() {
  ExperimentConfig c;
  c.name = "poly-regression";
  c.figure = "5, 6";
  c.description =
      "Cubic least-squares fit of 20 seeded synthetic points as a zero-sum "
      "game; DMD under three regularizers and PSGD, eps = 0.1";
  c.game = RegressionConfig{};
  for (RegularizerKind k : {RegularizerKind::euclidean,
                            RegularizerKind::fermi_dirac,
                            RegularizerKind::hellinger})
    c.runs.push_back(flow_run(RunKind::dmd, k));
  // The plain gradient flow is not stiff but creeps along the poorly
  // conditioned directions of the design matrix.
  RunConfig psgd;
  psgd.kind = RunKind::psgd;
  psgd.dt = 1e-3;
  psgd.horizon = 400.0;
  c.runs.push_back(psgd);
  c.epsilon = 0.1;
  c.horizon = 100.0;
  c.dt = 1e-4;
  c.record_every = 100;
  return c;
}

}  // namespace

std::vector<PresetDescriptor> preset_catalog() {
  std::vector<PresetDescriptor> out;
  for (auto c : {monotone_preset(), hypo_preset(), pdmd_itr_preset(),
                 mean_learning_preset(), regression_preset()}) {
    out.push_back(PresetDescriptor{c.name, c.figure, c.description, c});
  }
  return out;
}

ExperimentConfig preset(std::string_view name) {
  std::string known;
  for (auto& d : preset_catalog()) {
    if (d.name == name) return d.config;
    known += (known.empty() ? "" : ", ") + d.name;
  }
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (available: " + known + ")");
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(what + " must hold numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(what + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], what + " row");
    if (static_cast<std::size_t>(row.size()) != cols)
      throw ConfigError(what + ": ragged rows");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  return j.get<long>();
}

std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError(what + " must be a string");
  return j.get<std::string>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known)
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key))
    throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return obj.at(key);
}

ActionSet parse_set(const json& j) {
  if (!j.is_object()) throw ConfigError("a player set must be an object");
  const std::string type = text(require(j, "set", "player set"), "set");
  if (type == "box") {
    reject_unknown(j, {"set", "lower", "upper", "dim"}, "box");
    const json& lo = require(j, "lower", "box");
    const json& hi = require(j, "upper", "box");
    if (lo.is_number() && hi.is_number()) {
      const long dim = j.contains("dim") ? integer(j["dim"], "dim") : 1;
      return ActionSet::box(dim, lo.get<double>(), hi.get<double>());
    }
    return ActionSet::box(to_vector(lo, "lower"), to_vector(hi, "upper"));
  }
  if (type == "simplex") {
    reject_unknown(j, {"set", "dim"}, "simplex");
    return ActionSet::simplex(integer(require(j, "dim", "simplex"), "dim"));
  }
  if (type == "orthant") {
    reject_unknown(j, {"set", "dim", "shift"}, "orthant");
    return ActionSet::shifted_orthant(
        j.contains("shift") ? number(j["shift"], "shift") : 0.0,
        integer(require(j, "dim", "orthant"), "dim"));
  }
  if (type == "ball") {
    reject_unknown(j, {"set", "center", "radius"}, "ball");
    return ActionSet::ball(to_vector(require(j, "center", "ball"), "center"),
                           number(require(j, "radius", "ball"), "radius"));
  }
  if (type == "whole_space") {
    reject_unknown(j, {"set", "dim"}, "whole_space");
    return ActionSet::whole_space(
        integer(require(j, "dim", "whole_space"), "dim"));
  }
  throw ConfigError("unknown set type '" + type +
                    "' (expected box, simplex, orthant, ball or whole_space)");
}

GameConfig parse_game(const json& j) {
  if (!j.is_object()) throw ConfigError("game must be an object");
  const std::string type = text(require(j, "type", "game"), "game type");
  if (type == "quadratic") {
    reject_unknown(j, {"type", "R", "b", "players", "payoff_offsets"}, "game");
    QuadraticGame q;
    q.R = to_matrix(require(j, "R", "game"), "R");
    q.b = to_vector(require(j, "b", "game"), "b");
    const json& players = require(j, "players", "game");
    if (!players.is_array() || players.empty())
      throw ConfigError("players must be a non-empty array");
    for (const auto& p : players) q.sets.push_back(parse_set(p));
    if (j.contains("payoff_offsets")) {
      const Vector c = to_vector(j["payoff_offsets"], "payoff_offsets");
      q.payoff_offsets.assign(c.data(), c.data() + c.size());
    } else {
      q.payoff_offsets.assign(q.sets.size(), 0.0);
    }
    return q;
  }
  if (type == "polynomial_regression") {
    reject_unknown(j, {"type", "degree", "points", "data", "box_radius"},
                   "game");
    RegressionConfig r;
    if (j.contains("degree")) r.degree = static_cast<int>(integer(j["degree"], "degree"));
    if (j.contains("points")) r.points = static_cast<int>(integer(j["points"], "points"));
    if (j.contains("box_radius")) r.box_radius = number(j["box_radius"], "box_radius");
    if (j.contains("data")) {
      RegressionData d;
      for (const auto& pt : j["data"]) {
        const Vector p = to_vector(pt, "data point");
        if (p.size() != 2) throw ConfigError("data points are [a, b] pairs");
        d.a.push_back(p(0));
        d.b.push_back(p(1));
      }
      r.data = std::move(d);
    }
    return r;
  }
  throw ConfigError("unknown game type '" + type +
                    "' (expected quadratic or polynomial_regression)");
}

RunConfig parse_run(const json& j) {
  if (!j.is_object()) throw ConfigError("each run must be an object");
  reject_unknown(j, {"dynamics", "regularizer", "shift", "initial", "dt",
                     "horizon", "label"},
                 "run");
  RunConfig r;
  r.kind = parse_run_kind(text(require(j, "dynamics", "run"), "dynamics"));
  if (j.contains("regularizer"))
    r.regularizer = parse_regularizer_kind(text(j["regularizer"], "regularizer"));
  if (j.contains("shift")) r.shift = number(j["shift"], "shift");
  if (j.contains("initial")) r.initial = to_vector(j["initial"], "initial");
  if (j.contains("dt")) r.dt = number(j["dt"], "dt");
  if (j.contains("horizon")) r.horizon = number(j["horizon"], "horizon");
  if (j.contains("label")) r.label = text(j["label"], "label");
  return r;
}

EquilibriumSet parse_target(const json& j) {
  if (!j.is_object()) throw ConfigError("target must be an object");
  reject_unknown(j, {"point", "line"}, "target");
  if (j.contains("point") == j.contains("line"))
    throw ConfigError("target needs exactly one of 'point' or 'line'");
  if (j.contains("point"))
    return EquilibriumPoint{to_vector(j["point"], "target point")};
  const json& line = j["line"];
  reject_unknown(line, {"normal", "offset"}, "target line");
  return EquilibriumHyperplane{
      to_vector(require(line, "normal", "target line"), "normal"),
      number(require(line, "offset", "target line"), "offset")};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(
      j,
      {"preset", "name", "description", "game", "runs", "epsilon", "gamma",
       "horizon", "dt", "record_every", "max_iter", "discrete_record_every",
       "pdmd_step", "itr_exponents", "hit_radius", "tail_fraction",
       "tolerance", "target", "reference_point", "rest_point_tolerance",
       "out", "seed"},
      "config");

  ExperimentConfig c;
  if (j.contains("preset")) {
    c = preset(text(j["preset"], "preset"));
  } else if (!j.contains("game") || !j.contains("runs")) {
    throw ConfigError("a config without 'preset' needs 'game' and 'runs'");
  }
  if (j.contains("name")) c.name = text(j["name"], "name");
  if (j.contains("description")) c.description = text(j["description"], "description");
  if (j.contains("game")) {
    c.game = parse_game(j["game"]);
    // A new game invalidates the preset's references.
    c.target.reset();
    c.reference_point.reset();
  }
  if (j.contains("runs")) {
    if (!j["runs"].is_array()) throw ConfigError("runs must be an array");
    c.runs.clear();
    for (const auto& r : j["runs"]) c.runs.push_back(parse_run(r));
  }
  if (j.contains("epsilon")) c.epsilon = number(j["epsilon"], "epsilon");
  if (j.contains("gamma")) c.gamma = number(j["gamma"], "gamma");
  if (j.contains("horizon")) c.horizon = number(j["horizon"], "horizon");
  if (j.contains("dt")) c.dt = number(j["dt"], "dt");
  if (j.contains("record_every"))
    c.record_every = static_cast<int>(integer(j["record_every"], "record_every"));
  if (j.contains("max_iter")) c.max_iter = integer(j["max_iter"], "max_iter");
  if (j.contains("discrete_record_every"))
    c.discrete_record_every = static_cast<int>(
        integer(j["discrete_record_every"], "discrete_record_every"));
  if (j.contains("pdmd_step")) c.pdmd_step = number(j["pdmd_step"], "pdmd_step");
  if (j.contains("itr_exponents")) {
    const Vector e = to_vector(j["itr_exponents"], "itr_exponents");
    if (e.size() != 2) throw ConfigError("itr_exponents needs two entries");
    c.itr = ItrSchedule{e(0), e(1)};
  }
  if (j.contains("hit_radius")) c.hit_radius = number(j["hit_radius"], "hit_radius");
  if (j.contains("tail_fraction"))
    c.tail_fraction = number(j["tail_fraction"], "tail_fraction");
  if (j.contains("tolerance")) c.tolerance = number(j["tolerance"], "tolerance");
  if (j.contains("target")) c.target = parse_target(j["target"]);
  if (j.contains("reference_point"))
    c.reference_point = to_vector(j["reference_point"], "reference_point");
  if (j.contains("rest_point_tolerance"))
    c.rest_point_tolerance =
        number(j["rest_point_tolerance"], "rest_point_tolerance");
  if (j.contains("out")) c.out = text(j["out"], "out");
  if (j.contains("seed")) {
    const long s = integer(j["seed"], "seed");
    if (s < 0) throw ConfigError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

// ---------------------------------------------------------------------------
// Game and regularizer assembly

GameSpec build_game(const ExperimentConfig& config,
                    std::optional<Vector>* least_squares) {
  if (const auto* q = std::get_if<QuadraticGame>(&config.game)) return q->spec();
  const auto& r = std::get<RegressionConfig>(config.game);
  const RegressionData data =
      r.data ? *r.data : synthetic_regression_data(config.seed, r.points);
  auto reg = build_polynomial_regression_game(data, r.degree);
  if (least_squares) *least_squares = reg.least_squares;
  std::vector<ActionSet> boxes;
  for (Index d : reg.game.dims())
    boxes.push_back(ActionSet::box(d, -r.box_radius, r.box_radius));
  return reg.game.with_sets(std::move(boxes));
}

RegularizerProfile build_regularizers(const GameSpec& game, RegularizerKind kind,
                                      double epsilon, double shift) {
  std::vector<Regularizer> regs;
  for (const auto& set : game.sets()) {
    const Index n = set.dim();
    switch (kind) {
      case RegularizerKind::euclidean:
        regs.push_back(Regularizer::euclidean(set, epsilon));
        break;
      case RegularizerKind::simplex_entropy:
        if (!set.is<ActionSet::Simplex>())
          throw ConfigError("simplex_entropy needs simplex action sets");
        regs.push_back(Regularizer::simplex_entropy(n, epsilon));
        break;
      case RegularizerKind::boltzmann_shannon:
        regs.push_back(Regularizer::boltzmann_shannon(n, shift, epsilon));
        break;
      case RegularizerKind::fermi_dirac:
        if (!set.is<ActionSet::Box>())
          throw ConfigError("fermi_dirac needs box action sets");
        regs.push_back(Regularizer::fermi_dirac(set.as<ActionSet::Box>().lower,
                                                set.as<ActionSet::Box>().upper,
                                                epsilon));
        break;
      case RegularizerKind::hellinger: {
        if (set.is<ActionSet::Ball>()) {
          const auto& ball = set.as<ActionSet::Ball>();
          regs.push_back(Regularizer::hellinger(ball.center, ball.radius, epsilon));
          break;
        }
        if (!set.is<ActionSet::Box>())
          throw ConfigError("hellinger needs ball or cube action sets");
        const auto& box = set.as<ActionSet::Box>();
        const Vector half = 0.5 * (box.upper - box.lower);
        if ((half.array() - half(0)).abs().maxCoeff() > 1e-12 * (1.0 + half(0)))
          throw ConfigError("hellinger needs a cube (equal side lengths)");
        regs.push_back(Regularizer::hellinger(0.5 * (box.upper + box.lower),
                                              half(0), epsilon));
        break;
      }
    }
  }
  return RegularizerProfile(std::move(regs));
}

// ---------------------------------------------------------------------------
// Execution

namespace {

ConvergenceOptions verdict_options(const ExperimentConfig& c) {
  ConvergenceOptions o;
  o.tail_fraction = c.tail_fraction;
  o.tolerance = c.tolerance;
  o.target = c.target;
  return o;
}

std::optional<PerturbedEquilibrium> solve_rest_point(
    const ExperimentConfig& c, const GameSpec& game,
    const RegularizerProfile& regs, std::string* error) {
  PerturbedEquilibriumOptions opts;
  if (c.reference_point) {
    const Vector ref = regs.project(*c.reference_point);
    if (regs.gradient_defined_at(ref)) opts.start = regs.gradient(ref);
  }
  try {
    return perturbed_equilibrium(game, regs, opts);
  } catch (const NonConvergenceError& e) {
    *error = e.what();
  }
  return std::nullopt;
}

void finish_flow(const ExperimentConfig& c, RunResult& r) {
  const Trajectory& traj = *r.trajectory;
  r.verdict = detect_convergence(traj, verdict_options(c));
  if (r.rest_point && r.verdict.limit_estimate.size() > 0 &&
      r.verdict.limit_estimate.allFinite()) {
    r.rest_point_distance = (r.verdict.limit_estimate - r.rest_point->x).norm();
    r.converged_to_rest_point =
        r.verdict.status == ConvergenceStatus::converged &&
        *r.rest_point_distance <= c.rest_point_tolerance;
  }
  if (!traj.lyapunov.empty()) r.lyapunov = audit_lyapunov_decay(traj);
}

RunResult execute(const ExperimentConfig& c, const GameSpec& base,
                  const RunConfig& run) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.label = resolved_label(run);
  r.kind = run.kind;
  r.regularizer = needs_regularizer(run.kind) ? run.regularizer : std::nullopt;
  r.file = c.out / (r.label + ".csv");
  const Index n = base.dim();

  if (is_flow(run.kind)) {
    IntegrateOptions io;
    io.horizon = run.horizon.value_or(c.horizon);
    io.dt = run.dt.value_or(c.dt);
    io.record_every = c.record_every;

    if (run.kind == RunKind::psgd) {
      const Vector x0 = base.project(run.initial.value_or(Vector::Zero(n)));
      FlowSpec flow{Dynamics::psgd, c.gamma, base,
                    build_regularizers(base, RegularizerKind::euclidean, c.epsilon),
                    x0};
      r.trajectory = integrate(flow, io);
    } else {
      const RegularizerProfile regs = build_regularizers(
          base, *run.regularizer, c.epsilon, run.shift.value_or(0.0));
      const GameSpec game = base.with_sets(regs.domains());
      if (run.kind == RunKind::dmd) {
        r.rest_point = solve_rest_point(c, game, regs, &r.rest_point_error);
        if (r.rest_point) io.lyapunov_reference = r.rest_point->z;
      }
      FlowSpec flow{run.kind == RunKind::dmd ? Dynamics::dmd : Dynamics::md,
                    c.gamma, game, regs, run.initial.value_or(Vector::Zero(n))};
      r.trajectory = integrate(flow, io);
    }
    finish_flow(c, r);
  } else {
    DiscreteOptions opts;
    opts.max_iter = c.max_iter;
    opts.record_every = c.discrete_record_every;
    opts.monitor = c.target;
    opts.hit_radius = c.hit_radius;
    if (run.kind == RunKind::discrete_pdmd) {
      const RegularizerProfile regs =
          build_regularizers(base, RegularizerKind::euclidean, c.epsilon);
      r.rest_point = solve_rest_point(c, base, regs, &r.rest_point_error);
      r.discrete = run_discrete_pdmd(base, run.initial.value_or(Vector::Zero(n)),
                                     PdmdSchedule{c.pdmd_step, c.epsilon}, opts);
    } else {
      r.discrete = run_itr(base, base.project(run.initial.value_or(Vector::Zero(n))),
                           c.itr, opts);
    }
    r.verdict = detect_convergence(*r.discrete, verdict_options(c));
    if (r.rest_point && r.verdict.limit_estimate.allFinite()) {
      r.rest_point_distance = (r.verdict.limit_estimate - r.rest_point->x).norm();
      r.converged_to_rest_point =
          r.verdict.status == ConvergenceStatus::converged &&
          *r.rest_point_distance <= c.rest_point_tolerance;
    }
  }

  if (r.trajectory)
    write_trajectory_csv(*r.trajectory, r.file);
  else
    write_discrete_csv(*r.discrete, r.file);

  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return r;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json target_json(const std::optional<EquilibriumSet>& t) {
  if (!t) return nullptr;
  if (const auto* p = std::get_if<EquilibriumPoint>(&*t))
    return json{{"point", vector_json(p->x)}};
  const auto& h = std::get<EquilibriumHyperplane>(*t);
  return json{{"line", json{{"normal", vector_json(h.normal)},
                            {"offset", h.offset}}}};
}

json run_json(const RunResult& r, const std::filesystem::path& out) {
  json j;
  j["label"] = r.label;
  j["dynamics"] = to_string(r.kind);
  j["regularizer"] = r.regularizer ? json(to_string(*r.regularizer)) : json(nullptr);
  j["file"] = r.file.lexically_relative(out).generic_string();
  j["status"] = to_string(r.verdict.status);
  if (r.trajectory) {
    j["samples"] = r.trajectory->samples();
    j["final_x"] = vector_json(r.trajectory->final_x());
    j["final_z"] = vector_json(r.trajectory->final_z());
    j["diverged"] = r.trajectory->diverged;
    j["divergence_time"] = optional_json(r.trajectory->divergence_time);
    long saturated = 0;
    for (bool s : r.trajectory->saturated) saturated += s ? 1 : 0;
    j["saturated_samples"] = saturated;
  } else {
    j["samples"] = r.discrete->samples();
    j["final_x"] = vector_json(r.discrete->final_x());
    j["iterations"] = r.discrete->iteration_count;
    j["diverged"] = r.discrete->diverged;
    j["hit_iteration"] = optional_json(r.discrete->hit_iteration);
  }
  j["limit_estimate"] = vector_json(r.verdict.limit_estimate);
  j["window_radius"] = r.verdict.window_radius;
  j["tail_sup_norm"] = r.verdict.tail_sup_norm;
  j["target_distance"] = optional_json(r.verdict.target_distance);
  if (r.rest_point) {
    j["rest_point"] = json{{"x", vector_json(r.rest_point->x)},
                           {"residual", r.rest_point->residual},
                           {"method", r.rest_point->method}};
  } else {
    j["rest_point"] = nullptr;
    if (!r.rest_point_error.empty()) j["rest_point_error"] = r.rest_point_error;
  }
  j["rest_point_distance"] = optional_json(r.rest_point_distance);
  j["converged_to_rest_point"] = r.converged_to_rest_point;
  if (r.lyapunov) {
    j["lyapunov"] = json{{"max_increase", r.lyapunov->max_increase},
                         {"max_value", r.lyapunov->max_value},
                         {"monotone_up_to_slack", r.lyapunov->monotone_up_to_slack}};
  } else {
    j["lyapunov"] = nullptr;
  }
  if (r.least_squares_distance)
    j["least_squares_distance"] = *r.least_squares_distance;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body << '\n';
}

}  // namespace

bool ExperimentResult::any_diverged() const {
  for (const auto& r : runs)
    if (r.verdict.status == ConvergenceStatus::diverged) return true;
  return false;
}

bool ExperimentResult::all_converged() const {
  for (const auto& r : runs)
    if (r.verdict.status != ConvergenceStatus::converged) return false;
  return true;
}

int ExperimentResult::exit_code() const { return any_diverged() ? 2 : 0; }

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult result;
  result.config = config;
  const GameSpec game = build_game(config, &result.least_squares);

  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec)
    throw Error("cannot create output directory " + config.out.string() +
                ": " + ec.message());

  std::vector<std::future<RunResult>> pending;
  for (const auto& run : config.runs)
    pending.push_back(std::async(std::launch::async, execute, std::cref(config),
                                 std::cref(game), std::cref(run)));
  for (auto& f : pending) result.runs.push_back(f.get());

  if (result.least_squares) {
    const Index m = result.least_squares->size();
    for (auto& r : result.runs) {
      if (r.verdict.limit_estimate.size() > 0 &&
          r.verdict.limit_estimate.allFinite())
        r.least_squares_distance =
            (r.verdict.limit_estimate.head(m) - *result.least_squares).norm();
    }
  }

  json summary;
  summary["experiment"] = config.name;
  summary["figure"] = config.figure;
  summary["description"] = config.description;
  summary["seed"] = config.seed;
  summary["epsilon"] = config.epsilon;
  summary["gamma"] = config.gamma;
  summary["horizon"] = config.horizon;
  summary["dt"] = config.dt;
  summary["tolerance"] = config.tolerance;
  summary["tail_fraction"] = config.tail_fraction;
  summary["target"] = target_json(config.target);
  if (result.least_squares)
    summary["least_squares"] = vector_json(*result.least_squares);
  json runs = json::array();
  for (const auto& r : result.runs) runs.push_back(run_json(r, config.out));
  summary["runs"] = runs;
  summary["all_converged"] = result.all_converged();
  summary["any_diverged"] = result.any_diverged();

  result.summary_path = config.out / "summary.json";
  write_text(result.summary_path, summary.dump(2));

  json timing;
  json per_run;
  for (const auto& r : result.runs) per_run[r.label] = r.seconds;
  timing["runs"] = per_run;
  timing["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  result.timing_path = config.out / "timing.json";
  write_text(result.timing_path, timing.dump(2));
  return result;
}

}  // namespace dmd
