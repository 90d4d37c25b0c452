#pragma once

// Experiment pipelines: drive -> evolve -> describe -> fit -> evaluate, plus
// the random-matrix studies, with JSON configuration and JSON/CSV reports.
//
// Seeds. Every random choice derives from the single base seed:
//   measurement set  derive_seed(seed, {1})
//   field weights    derive_seed(seed, {2})
//   data split       derive_seed(seed, {3})
//   readout init     derive_seed(seed, {4})
//   synthetic data   derive_seed(seed, {5})
//   matrix studies   derive_seed(seed, {6})

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/features.hpp"
#include "qrc/parallel.hpp"
#include "qrc/randmat.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/stats.hpp"
#include "qrc/tasks.hpp"

namespace qrc {

enum class Task { cosine, mackey_glass, interpolation, scan, spectra, measure_stats, gen_data };

inline std::string to_string(Task t) {
  switch (t) {
    case Task::cosine: return "cosine";
    case Task::mackey_glass: return "mackey_glass";
    case Task::interpolation: return "interpolation";
    case Task::scan: return "scan";
    case Task::spectra: return "spectra";
    case Task::measure_stats: return "measure_stats";
    case Task::gen_data: return "gen_data";
  }
  return "unknown";
}

inline Task task_from_string(const std::string& s) {
  for (Task t : {Task::cosine, Task::mackey_glass, Task::interpolation, Task::scan, Task::spectra,
                 Task::measure_stats, Task::gen_data})
    if (to_string(t) == s) return t;
  fail(ErrorCategory::argument, "unknown task '" + s + "'");
}

struct ReservoirSettings {
  ChainConfig chain;
  bool random_field = true;  // seeded per-site weights; false keeps chain.field_weights
  double field_lo = 0.5;
  double field_hi = 1.5;
  bool auto_substeps = true;  // raise substeps to stable_substeps(max_phase)
  double max_phase = 0.05;
};

struct FeatureSettings {
  std::size_t n_features = 100;
  int obs_spins = 2;
  double density = 1.0;
};

struct CosineSettings {
  double amplitude = 1.0;
  std::size_t samples_per_period = 50;
  std::size_t periods = 10;
};

struct MackeyGlassSettings {
  MackeyGlassParams params;  // n_steps is derived from discard + n_points * stride
  std::size_t stride = 20;
  std::size_t n_points = 1000;
};

struct InterpolationSettings {
  std::string source = "random_walk";  // random_walk | linear | csv
  std::string path;
  std::size_t n = 2000;
  double step_std = 1.0;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

struct ScanSettings {
  std::vector<double> couplings{0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0};
  bool pi_factor = true;
  std::vector<std::size_t> state_dims{1, 10, 20, 50, 100, 500};
  std::vector<double> horizon_fractions{0.05, 0.5, 1.0, 2.5, 5.0, 25.0};
};

struct SpectraSettings {
  std::vector<std::size_t> dims{2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<double> densities{0.1, 0.5, 1.0};
  std::size_t samples = 500;
};

struct MeasureStatsSettings {
  int full_spins = 9;
  std::vector<std::size_t> obs_dims{2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::size_t samples = 500;
  double state_density = 1.0;
  double observable_density = 1.0;
};

struct GenDataSettings {
  std::string kind = "cosine";  // cosine | mackey_glass | random_walk | linear
};

struct ExperimentConfig {
  Task task = Task::cosine;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  ReservoirSettings reservoir;
  FeatureSettings features;
  ReadoutSpec readout;
  SplitPlan split;
  std::size_t horizon = 1;
  std::size_t washout = 0;
  CosineSettings cosine;
  MackeyGlassSettings mackey_glass;
  InterpolationSettings interpolation;
  ScanSettings scan;
  SpectraSettings spectra;
  MeasureStatsSettings measure_stats;
  GenDataSettings gen_data;
};

/// Task defaults: cosine J = 10 pi, interpolation J = 2 pi with a shuffled
/// 20 % split, Mackey-Glass J = 0.1 pi with F = 1000.
inline ExperimentConfig default_config(Task task) {
  ExperimentConfig c;
  c.task = task;
  c.reservoir.chain.coupling = 10.0 * std::numbers::pi;
  switch (task) {
    case Task::interpolation:
      c.reservoir.chain.coupling = 2.0 * std::numbers::pi;
      c.split = {SplitKind::shuffled, 0.2, 0};
      break;
    case Task::mackey_glass:
      c.reservoir.chain.coupling = 0.1 * std::numbers::pi;
      c.features.n_features = 1000;
      break;
    default:
      break;
  }
  return c;
}

struct SeedSet {
  std::uint64_t base, measurement, field, split, readout, data, study;

  explicit SeedSet(std::uint64_t seed)
      : base(seed),
        measurement(derive_seed(seed, {1})),
        field(derive_seed(seed, {2})),
        split(derive_seed(seed, {3})),
        readout(derive_seed(seed, {4})),
        data(derive_seed(seed, {5})),
        study(derive_seed(seed, {6})) {}

  nlohmann::ordered_json to_json() const {
    return {{"base", base},       {"measurement", measurement}, {"field", field}, {"split", split},
            {"readout", readout}, {"data", data},               {"study", study}};
  }
};

// ---------------------------------------------------------------------------
// Configuration JSON

namespace detail {

using ojson = nlohmann::ordered_json;

inline void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> known) {
  require(j.is_object(), ErrorCategory::argument, "config: '" + where + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorCategory::argument, "config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCategory::argument, "config: '" + where + "." + key + "' has the wrong type");
  }
}

inline Axis axis_from_string(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  fail(ErrorCategory::argument, "config: drive_axis must be x, y or z");
}

inline std::string to_string(Axis a) { return a == Axis::x ? "x" : a == Axis::y ? "y" : "z"; }

inline std::string to_string(InitialState s) {
  return s == InitialState::all_plus_x ? "all_plus_x" : "all_up_z";
}

inline std::string to_string(SplitKind k) { return k == SplitKind::contiguous ? "contiguous" : "shuffled"; }

inline void apply_chain(const nlohmann::json& j, ReservoirSettings& r) {
  check_keys(j, "chain", {"n_spins", "coupling", "coupling_pi", "drive_axis", "initial_state", "dephasing_rate",
                          "substeps", "sample_dt", "field", "field_range", "auto_substeps", "max_phase"});
  auto& c = r.chain;
  read(j, "n_spins", c.n_spins, "chain");
  require(!(j.contains("coupling") && j.contains("coupling_pi")), ErrorCategory::argument,
          "config: give chain.coupling or chain.coupling_pi, not both");
  read(j, "coupling", c.coupling, "chain");
  if (j.contains("coupling_pi")) {
    double m = 0.0;
    read(j, "coupling_pi", m, "chain");
    c.coupling = m * std::numbers::pi;
  }
  if (j.contains("drive_axis")) {
    std::string a;
    read(j, "drive_axis", a, "chain");
    c.drive_axis = axis_from_string(a);
  }
  if (j.contains("initial_state")) {
    std::string s;
    read(j, "initial_state", s, "chain");
    require(s == "all_plus_x" || s == "all_up_z", ErrorCategory::argument,
            "config: initial_state must be all_plus_x or all_up_z");
    c.initial_state = s == "all_plus_x" ? InitialState::all_plus_x : InitialState::all_up_z;
  }
  read(j, "dephasing_rate", c.dephasing_rate, "chain");
  read(j, "substeps", c.substeps, "chain");
  read(j, "sample_dt", c.sample_dt, "chain");
  if (j.contains("field")) {
    const auto& f = j.at("field");
    if (f.is_array()) {
      r.random_field = false;
      read(j, "field", c.field_weights, "chain");
    } else {
      std::string s;
      read(j, "field", s, "chain");
      require(s == "random" || s == "uniform", ErrorCategory::argument,
              "config: chain.field must be \"random\", \"uniform\" or an array of weights");
      r.random_field = s == "random";
      c.field_weights.clear();
    }
  }
  if (j.contains("field_range")) {
    std::vector<double> range;
    read(j, "field_range", range, "chain");
    require(range.size() == 2 && range[0] <= range[1], ErrorCategory::argument,
            "config: chain.field_range must be [lo, hi] with lo <= hi");
    r.field_lo = range[0];
    r.field_hi = range[1];
  }
  read(j, "auto_substeps", r.auto_substeps, "chain");
  read(j, "max_phase", r.max_phase, "chain");
}

inline void apply_readout(const nlohmann::json& j, ReadoutSpec& r) {
  check_keys(j, "readout", {"kind", "ridge", "hidden_width", "learning_rate", "epochs", "standardize", "bias"});
  if (j.contains("kind")) {
    std::string k;
    read(j, "kind", k, "readout");
    require(k == "linear" || k == "mlp", ErrorCategory::argument, "config: readout.kind must be linear or mlp");
    r.kind = k == "linear" ? ReadoutKind::linear : ReadoutKind::mlp;
  }
  read(j, "ridge", r.ridge, "readout");
  read(j, "hidden_width", r.hidden_width, "readout");
  read(j, "learning_rate", r.learning_rate, "readout");
  read(j, "epochs", r.epochs, "readout");
  read(j, "standardize", r.standardize, "readout");
  read(j, "bias", r.bias, "readout");
}

}  // namespace detail

/// Overlays a JSON document on `cfg`. Unknown keys are rejected.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  using detail::read;
  detail::check_keys(j, "", {"task", "seed", "threads", "chain", "features", "readout", "split", "horizon", "washout",
                             "cosine", "mackey_glass", "interpolation", "scan", "spectra", "measure_stats",
                             "gen_data"});
  if (j.contains("task")) {
    std::string t;
    read(j, "task", t, "");
    require(task_from_string(t) == cfg.task, ErrorCategory::argument,
            "config: task '" + t + "' does not match the command '" + to_string(cfg.task) + "'");
  }
  read(j, "seed", cfg.seed, "");
  read(j, "threads", cfg.threads, "");
  read(j, "horizon", cfg.horizon, "");
  read(j, "washout", cfg.washout, "");
  if (j.contains("chain")) detail::apply_chain(j.at("chain"), cfg.reservoir);
  if (j.contains("features")) {
    const auto& f = j.at("features");
    detail::check_keys(f, "features", {"n_features", "obs_spins", "density"});
    read(f, "n_features", cfg.features.n_features, "features");
    read(f, "obs_spins", cfg.features.obs_spins, "features");
    read(f, "density", cfg.features.density, "features");
  }
  if (j.contains("readout")) detail::apply_readout(j.at("readout"), cfg.readout);
  if (j.contains("split")) {
    const auto& s = j.at("split");
    detail::check_keys(s, "split", {"kind", "train_fraction"});
    if (s.contains("kind")) {
      std::string k;
      read(s, "kind", k, "split");
      require(k == "contiguous" || k == "shuffled", ErrorCategory::argument,
              "config: split.kind must be contiguous or shuffled");
      cfg.split.kind = k == "contiguous" ? SplitKind::contiguous : SplitKind::shuffled;
    }
    read(s, "train_fraction", cfg.split.train_fraction, "split");
  }
  if (j.contains("cosine")) {
    const auto& s = j.at("cosine");
    detail::check_keys(s, "cosine", {"amplitude", "samples_per_period", "periods"});
    read(s, "amplitude", cfg.cosine.amplitude, "cosine");
    read(s, "samples_per_period", cfg.cosine.samples_per_period, "cosine");
    read(s, "periods", cfg.cosine.periods, "cosine");
  }
  if (j.contains("mackey_glass")) {
    const auto& s = j.at("mackey_glass");
    detail::check_keys(s, "mackey_glass",
                       {"beta", "gamma", "tau", "n_exp", "dt", "history_value", "discard", "stride", "n_points"});
    auto& p = cfg.mackey_glass.params;
    read(s, "beta", p.beta, "mackey_glass");
    read(s, "gamma", p.gamma, "mackey_glass");
    read(s, "tau", p.tau, "mackey_glass");
    read(s, "n_exp", p.n_exp, "mackey_glass");
    read(s, "dt", p.dt, "mackey_glass");
    read(s, "history_value", p.history_value, "mackey_glass");
    read(s, "discard", p.discard, "mackey_glass");
    read(s, "stride", cfg.mackey_glass.stride, "mackey_glass");
    read(s, "n_points", cfg.mackey_glass.n_points, "mackey_glass");
  }
  if (j.contains("interpolation")) {
    const auto& s = j.at("interpolation");
    detail::check_keys(s, "interpolation", {"source", "path", "n", "step_std", "fractions"});
    read(s, "source", cfg.interpolation.source, "interpolation");
    read(s, "path", cfg.interpolation.path, "interpolation");
    read(s, "n", cfg.interpolation.n, "interpolation");
    read(s, "step_std", cfg.interpolation.step_std, "interpolation");
    read(s, "fractions", cfg.interpolation.fractions, "interpolation");
  }
  if (j.contains("scan")) {
    const auto& s = j.at("scan");
    detail::check_keys(s, "scan", {"couplings", "pi_factor", "state_dims", "horizon_fractions"});
    read(s, "couplings", cfg.scan.couplings, "scan");
    read(s, "pi_factor", cfg.scan.pi_factor, "scan");
    read(s, "state_dims", cfg.scan.state_dims, "scan");
    read(s, "horizon_fractions", cfg.scan.horizon_fractions, "scan");
  }
  if (j.contains("spectra")) {
    const auto& s = j.at("spectra");
    detail::check_keys(s, "spectra", {"dims", "densities", "samples"});
    read(s, "dims", cfg.spectra.dims, "spectra");
    read(s, "densities", cfg.spectra.densities, "spectra");
    read(s, "samples", cfg.spectra.samples, "spectra");
  }
  if (j.contains("measure_stats")) {
    const auto& s = j.at("measure_stats");
    detail::check_keys(s, "measure_stats", {"full_spins", "obs_dims", "samples", "state_density", "observable_density"});
    read(s, "full_spins", cfg.measure_stats.full_spins, "measure_stats");
    read(s, "obs_dims", cfg.measure_stats.obs_dims, "measure_stats");
    read(s, "samples", cfg.measure_stats.samples, "measure_stats");
    read(s, "state_density", cfg.measure_stats.state_density, "measure_stats");
    read(s, "observable_density", cfg.measure_stats.observable_density, "measure_stats");
  }
  if (j.contains("gen_data")) {
    const auto& s = j.at("gen_data");
    detail::check_keys(s, "gen_data", {"kind"});
    read(s, "kind", cfg.gen_data.kind, "gen_data");
  }
}

inline ExperimentConfig load_config(Task task, const std::string& path) {
  ExperimentConfig cfg = default_config(task);
  if (path.empty()) return cfg;
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::data_format, "config " + path + ": " + e.what());
  }
  apply_config_json(cfg, j);
  return cfg;
}

/// Echo of the settings that determine results (threads excluded).
inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  using detail::ojson;
  const auto& ch = c.reservoir.chain;
  ojson chain = {{"n_spins", ch.n_spins},
                 {"coupling", ch.coupling},
                 {"drive_axis", detail::to_string(ch.drive_axis)},
                 {"initial_state", detail::to_string(ch.initial_state)},
                 {"dephasing_rate", ch.dephasing_rate},
                 {"substeps", ch.substeps},
                 {"sample_dt", ch.sample_dt}};
  if (c.reservoir.random_field)
    chain["field"] = "random";
  else if (ch.field_weights.empty())
    chain["field"] = "uniform";
  else
    chain["field"] = ch.field_weights;
  chain["field_range"] = {c.reservoir.field_lo, c.reservoir.field_hi};
  chain["auto_substeps"] = c.reservoir.auto_substeps;
  chain["max_phase"] = c.reservoir.max_phase;

  ojson j = {{"task", to_string(c.task)}, {"seed", c.seed}};
  const bool pipeline = c.task == Task::cosine || c.task == Task::mackey_glass ||
                        c.task == Task::interpolation || c.task == Task::scan;
  if (pipeline) {
    j["chain"] = chain;
    j["features"] = {{"n_features", c.features.n_features},
                     {"obs_spins", c.features.obs_spins},
                     {"density", c.features.density}};
    j["readout"] = {{"kind", to_string(c.readout.kind)},
                    {"ridge", c.readout.ridge},
                    {"hidden_width", c.readout.hidden_width},
                    {"learning_rate", c.readout.learning_rate},
                    {"epochs", c.readout.epochs},
                    {"standardize", c.readout.standardize},
                    {"bias", c.readout.bias}};
    j["split"] = {{"kind", detail::to_string(c.split.kind)}, {"train_fraction", c.split.train_fraction}};
    j["horizon"] = c.horizon;
    j["washout"] = c.washout;
  }
  const ojson cosine = {{"amplitude", c.cosine.amplitude},
                        {"samples_per_period", c.cosine.samples_per_period},
                        {"periods", c.cosine.periods}};
  const auto& p = c.mackey_glass.params;
  const ojson mg = {{"beta", p.beta},       {"gamma", p.gamma},
                    {"tau", p.tau},         {"n_exp", p.n_exp},
                    {"dt", p.dt},           {"history_value", p.history_value},
                    {"discard", p.discard}, {"stride", c.mackey_glass.stride},
                    {"n_points", c.mackey_glass.n_points}};
  const ojson interp = {{"source", c.interpolation.source},
                        {"path", c.interpolation.path},
                        {"n", c.interpolation.n},
                        {"step_std", c.interpolation.step_std},
                        {"fractions", c.interpolation.fractions}};
  switch (c.task) {
    case Task::cosine: j["cosine"] = cosine; break;
    case Task::mackey_glass: j["mackey_glass"] = mg; break;
    case Task::interpolation: j["interpolation"] = interp; break;
    case Task::scan:
      j["cosine"] = cosine;
      j["scan"] = {{"couplings", c.scan.couplings},
                   {"pi_factor", c.scan.pi_factor},
                   {"state_dims", c.scan.state_dims},
                   {"horizon_fractions", c.scan.horizon_fractions}};
      break;
    case Task::spectra:
      j["spectra"] = {{"dims", c.spectra.dims}, {"densities", c.spectra.densities}, {"samples", c.spectra.samples}};
      break;
    case Task::measure_stats:
      j["measure_stats"] = {{"full_spins", c.measure_stats.full_spins},
                            {"obs_dims", c.measure_stats.obs_dims},
                            {"samples", c.measure_stats.samples},
                            {"state_density", c.measure_stats.state_density},
                            {"observable_density", c.measure_stats.observable_density}};
      break;
    case Task::gen_data:
      j["gen_data"] = {{"kind", c.gen_data.kind}};
      if (c.gen_data.kind == "cosine") j["cosine"] = cosine;
      if (c.gen_data.kind == "mackey_glass") j["mackey_glass"] = mg;
      if (c.gen_data.kind == "random_walk" || c.gen_data.kind == "linear") j["interpolation"] = interp;
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Reports

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  bool empty() const noexcept { return columns.empty(); }
};

struct RunReport {
  std::string task;
  nlohmann::ordered_json config;
  nlohmann::ordered_json seeds;
  std::optional<double> pearson_train;
  std::optional<double> pearson_test;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<std::size_t> test_index;  // pair index k of each test point
  std::vector<double> targets;
  std::vector<double> predictions;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  Table table;
  std::vector<std::string> warnings;
  std::optional<double> wall_time;  // seconds; excluded unless set
};

inline nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["config"] = r.config;
  j["seeds"] = r.seeds;
  j["pearson_train"] = r.pearson_train ? nlohmann::ordered_json(*r.pearson_train) : nlohmann::ordered_json(nullptr);
  j["pearson_test"] = r.pearson_test ? nlohmann::ordered_json(*r.pearson_test) : nlohmann::ordered_json(nullptr);
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["test_index"] = r.test_index;
  j["targets"] = r.targets;
  j["predictions"] = r.predictions;
  j["summary"] = r.summary;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.table.rows) rows.push_back(row);
  j["table"] = {{"columns", r.table.columns}, {"rows", rows}};
  j["warnings"] = r.warnings;
  if (r.wall_time) j["wall_time"] = *r.wall_time;
  return j;
}

namespace detail {

inline std::string csv_cell(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  return v.dump();
}

}  // namespace detail

/// CSV view: the report table when present, otherwise one row per test point.
inline void write_csv(const RunReport& r, std::ostream& os) {
  if (!r.table.empty()) {
    for (std::size_t i = 0; i < r.table.columns.size(); ++i) os << (i ? "," : "") << r.table.columns[i];
    os << '\n';
    for (const auto& row : r.table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_cell(row[i]);
      os << '\n';
    }
    return;
  }
  os << "index,target,prediction\n";
  for (std::size_t i = 0; i < r.targets.size(); ++i)
    os << r.test_index[i] << ',' << csv::format_double(r.targets[i]) << ','
       << csv::format_double(r.predictions[i]) << '\n';
}

enum class ReportFormat { json, csv };

/// Writes the report to `path`, or to stdout when path is empty or "-".
inline void emit_report(const RunReport& r, const std::string& path, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::json)
    os << to_json(r).dump(2) << '\n';
  else
    write_csv(r, os);
  if (path.empty() || path == "-") {
    std::cout << os.str();
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCategory::io, "cannot open output file " + path);
  out << os.str();
  out.close();
  require(!out.fail(), ErrorCategory::io, "failed writing output file " + path);
}

// ---------------------------------------------------------------------------
// Pipeline pieces

/// Chain with resolved field weights and integrator steps for inputs bounded
/// by max_abs_input.
inline ChainConfig resolve_chain(const ReservoirSettings& r, const SeedSet& seeds, double max_abs_input) {
  ChainConfig c = r.chain;
  validate(c);
  if (r.random_field) c.field_weights = random_field_weights(c.n_spins, seeds.field, r.field_lo, r.field_hi);
  if (r.auto_substeps) c.substeps = std::max(c.substeps, stable_substeps(c, max_abs_input, r.max_phase));
  return c;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Prediction offset in samples: round(fraction * samples_per_period), at least 1.
inline std::size_t horizon_samples(double fraction, std::size_t samples_per_period) {
  require(fraction > 0.0 && std::isfinite(fraction), ErrorCategory::argument, "horizon fraction must be > 0");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples_per_period))));
}

struct PairFit {
  double pearson_train = 0.0;
  double pearson_test = 0.0;
  std::vector<std::size_t> train_index, test_index;
  std::vector<double> test_targets, test_predictions;
};

/// Pairs (features row k, target series[k + horizon]) for k in [washout, n_pairs),
/// split by `plan`, readout fit on train, Pearson on both sides.
inline PairFit fit_pairs(const RealMatrix& features, const std::vector<double>& series, std::size_t n_pairs,
                         std::size_t horizon, std::size_t washout, const SplitPlan& plan, const ReadoutSpec& spec) {
  require(n_pairs <= static_cast<std::size_t>(features.rows()), ErrorCategory::shape,
          "pipeline: fewer feature rows than pairs");
  require(n_pairs + horizon <= series.size(), ErrorCategory::argument,
          "pipeline: horizon " + std::to_string(horizon) + " reaches past the end of the series");
  require(washout + 2 <= n_pairs, ErrorCategory::argument, "pipeline: washout leaves fewer than two pairs");
  const std::size_t m = n_pairs - washout;
  const auto parts = split(m, plan);

  auto gather = [&](const std::vector<std::size_t>& idx, RealMatrix& x, RealMatrix& y) {
    x.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    y.resize(static_cast<Eigen::Index>(idx.size()), 1);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const std::size_t k = washout + idx[r];
      x.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(k));
      y(static_cast<Eigen::Index>(r), 0) = series[k + horizon];
    }
  };
  RealMatrix xtr, ytr, xte, yte;
  gather(parts.train, xtr, ytr);
  gather(parts.test, xte, yte);
  const auto model = fit(xtr, ytr, spec);
  const RealMatrix ptr = predict(model, xtr);
  const RealMatrix pte = predict(model, xte);

  PairFit out;
  out.pearson_train = pearson(std::span<const double>(ptr.data(), static_cast<std::size_t>(ptr.size())),
                              std::span<const double>(ytr.data(), static_cast<std::size_t>(ytr.size())));
  out.pearson_test = pearson(std::span<const double>(pte.data(), static_cast<std::size_t>(pte.size())),
                             std::span<const double>(yte.data(), static_cast<std::size_t>(yte.size())));
  for (auto i : parts.train) out.train_index.push_back(washout + i);
  for (auto i : parts.test) out.test_index.push_back(washout + i);
  out.test_targets.assign(yte.data(), yte.data() + yte.size());
  out.test_predictions.assign(pte.data(), pte.data() + pte.size());
  return out;
}

inline void fill_fit(RunReport& r, const PairFit& f) {
  r.pearson_train = f.pearson_train;
  r.pearson_test = f.pearson_test;
  r.n_train = f.train_index.size();
  r.n_test = f.test_index.size();
  r.test_index = f.test_index;
  r.targets = f.test_targets;
  r.predictions = f.test_predictions;
}

inline ReadoutSpec seeded_readout(const ExperimentConfig& cfg, const SeedSet& seeds) {
  ReadoutSpec spec = cfg.readout;
  spec.init_seed = seeds.readout;
  return spec;
}

inline SplitPlan seeded_split(const SplitPlan& plan, const SeedSet& seeds) {
  SplitPlan p = plan;
  p.seed = seeds.split;
  return p;
}

/// Features of the reservoir driven by `drive` under measurement set `set`.
inline RealMatrix reservoir_features(const ChainConfig& chain, const std::vector<double>& drive,
                                     const MeasurementSet& set, std::size_t threads) {
  const auto traj = evolve(chain, drive);
  return describe(traj, set, threads).values;
}

inline MeasurementSet config_measurements(const ExperimentConfig& cfg, const SeedSet& seeds, std::size_t n_features) {
  return build_measurement_set(n_features, cfg.reservoir.chain.n_spins, cfg.features.obs_spins, cfg.features.density,
                               seeds.measurement);
}

inline RunReport start_report(const ExperimentConfig& cfg, const SeedSet& seeds) {
  RunReport r;
  r.task = to_string(cfg.task);
  r.config = to_json(cfg);
  r.seeds = seeds.to_json();
  return r;
}

/// Cosine series: periods * samples_per_period pairs plus `horizon` trailing targets.
inline TimeSeries cosine_series(const ExperimentConfig& cfg, std::size_t horizon) {
  const auto& c = cfg.cosine;
  require(c.samples_per_period >= 2 && c.periods >= 1, ErrorCategory::argument,
          "cosine: need samples_per_period >= 2 and periods >= 1");
  const double dt = cfg.reservoir.chain.sample_dt;
  return gen_cosine(c.amplitude, static_cast<double>(c.samples_per_period) * dt,
                    c.periods * c.samples_per_period + horizon, dt);
}

inline TimeSeries mackey_glass_series(const ExperimentConfig& cfg) {
  const auto& m = cfg.mackey_glass;
  require(m.stride >= 1 && m.n_points >= 2, ErrorCategory::argument, "mackey_glass: need stride >= 1, n_points >= 2");
  MackeyGlassParams p = m.params;
  p.n_steps = p.discard + m.n_points * m.stride;
  return subsample(gen_mackey_glass(p), m.stride);
}

inline nlohmann::ordered_json chain_summary(const ChainConfig& c) {
  return {{"field_weights", c.field_weights.empty() ? std::vector<double>(static_cast<std::size_t>(c.n_spins), 1.0)
                                                    : c.field_weights},
          {"substeps", c.substeps}};
}

// ---------------------------------------------------------------------------
// Experiments

/// Single-step open-loop prediction on the cosine or Mackey-Glass series.
/// The reservoir sees only u[0 .. n_pairs), so the features for target
/// u[k + horizon] depend on true inputs up to k alone.
inline RunReport run_open_loop(const ExperimentConfig& cfg) {
  require(cfg.task == Task::cosine || cfg.task == Task::mackey_glass, ErrorCategory::argument,
          "run_open_loop: task must be cosine or mackey_glass");
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);

  std::vector<double> series;
  std::size_t n_pairs = 0;
  if (cfg.task == Task::cosine) {
    series = cosine_series(cfg, cfg.horizon).values;
    n_pairs = cfg.cosine.periods * cfg.cosine.samples_per_period;
  } else {
    const auto raw = mackey_glass_series(cfg);
    const auto scale = AffineScale::of(raw.values);
    series = rescale(raw.values, scale);
    require(cfg.horizon < series.size(), ErrorCategory::argument,
            "run_open_loop: horizon must be shorter than the series");
    n_pairs = series.size() - cfg.horizon;
    report.summary["scale"] = {{"lo", scale.lo}, {"hi", scale.hi}};
  }
  require(cfg.horizon + cfg.washout < series.size(), ErrorCategory::argument,
          "run_open_loop: horizon + washout must be shorter than the series");
  const std::vector<double> drive(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(n_pairs));
  const auto chain = resolve_chain(cfg.reservoir, seeds, max_abs(drive));
  const auto set = config_measurements(cfg, seeds, cfg.features.n_features);
  const RealMatrix features = reservoir_features(chain, drive, set, cfg.threads);
  const auto fitres = fit_pairs(features, series, n_pairs, cfg.horizon, cfg.washout, seeded_split(cfg.split, seeds),
                                seeded_readout(cfg, seeds));
  fill_fit(report, fitres);
  report.summary["n_pairs"] = n_pairs - cfg.washout;
  report.summary["chain"] = chain_summary(chain);
  return report;
}

inline RunReport run_mackey_glass(ExperimentConfig cfg) {
  cfg.task = Task::mackey_glass;
  return run_open_loop(cfg);
}

/// Grid over coupling x state dimension x horizon on the cosine task. One
/// trajectory per coupling feeds every (F, horizon) cell: measurement sets
/// are prefix-stable, so F features are the first F columns of the largest
/// set. Cells that fail record the error in their status column.
inline RunReport run_scan(const ExperimentConfig& cfg) {
  require(cfg.task == Task::scan, ErrorCategory::argument, "run_scan: task must be scan");
  const auto& g = cfg.scan;
  require(!g.couplings.empty() && !g.state_dims.empty() && !g.horizon_fractions.empty(), ErrorCategory::argument,
          "run_scan: every grid axis needs at least one value");
  for (auto f : g.state_dims) require(f >= 1, ErrorCategory::argument, "run_scan: state dimensions must be >= 1");
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);

  std::vector<std::size_t> horizons;
  for (double h : g.horizon_fractions) horizons.push_back(horizon_samples(h, cfg.cosine.samples_per_period));
  const std::size_t max_h = *std::max_element(horizons.begin(), horizons.end());
  const std::size_t max_f = *std::max_element(g.state_dims.begin(), g.state_dims.end());
  const auto series = cosine_series(cfg, max_h).values;
  const std::size_t n_pairs = cfg.cosine.periods * cfg.cosine.samples_per_period;
  const std::vector<double> drive(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(n_pairs));
  const auto set = config_measurements(cfg, seeds, max_f);
  const auto readout = seeded_readout(cfg, seeds);
  const auto plan = seeded_split(cfg.split, seeds);

  struct Cell {
    double train = 0.0, test = 0.0;
    std::string status = "ok";
  };
  const std::size_t nf = g.state_dims.size(), nh = horizons.size();
  std::vector<std::vector<Cell>> cells(g.couplings.size(), std::vector<Cell>(nf * nh));
  std::vector<int> substeps(g.couplings.size(), 0);

  parallel_for(g.couplings.size(), cfg.threads, [&](std::size_t a) {
    ReservoirSettings r = cfg.reservoir;
    r.chain.coupling = g.couplings[a] * (g.pi_factor ? std::numbers::pi : 1.0);
    RealMatrix features;
    try {
      const auto chain = resolve_chain(r, seeds, max_abs(drive));
      substeps[a] = chain.substeps;
      features = reservoir_features(chain, drive, set, 1);
    } catch (const Error& e) {
      for (auto& c : cells[a]) c.status = std::string(to_string(e.category())) + ": " + e.what();
      return;
    }
    for (std::size_t b = 0; b < nf; ++b) {
      const RealMatrix cols = features.leftCols(static_cast<Eigen::Index>(g.state_dims[b]));
      for (std::size_t c = 0; c < nh; ++c) {
        auto& cell = cells[a][b * nh + c];
        try {
          const auto f = fit_pairs(cols, series, n_pairs, horizons[c], cfg.washout, plan, readout);
          cell.train = f.pearson_train;
          cell.test = f.pearson_test;
        } catch (const Error& e) {
          cell.status = std::string(to_string(e.category())) + ": " + e.what();
        }
      }
    }
  });

  report.table.columns = {"coupling",       "coupling_value", "state_dim",     "horizon_fraction",
                          "horizon_samples", "substeps",      "pearson_train", "pearson_test", "status"};
  std::vector<std::vector<double>> by_horizon(nh);
  std::size_t failures = 0;
  nlohmann::ordered_json best = nullptr;
  for (std::size_t a = 0; a < g.couplings.size(); ++a) {
    const double value = g.couplings[a] * (g.pi_factor ? std::numbers::pi : 1.0);
    for (std::size_t b = 0; b < nf; ++b) {
      for (std::size_t c = 0; c < nh; ++c) {
        const auto& cell = cells[a][b * nh + c];
        const bool ok = cell.status == "ok";
        report.table.rows.push_back({g.couplings[a], value, g.state_dims[b], g.horizon_fractions[c], horizons[c],
                                     substeps[a], ok ? nlohmann::ordered_json(cell.train) : nlohmann::ordered_json(nullptr),
                                     ok ? nlohmann::ordered_json(cell.test) : nlohmann::ordered_json(nullptr), cell.status});
        if (!ok) {
          ++failures;
          continue;
        }
        by_horizon[c].push_back(cell.test);
        if (g.horizon_fractions[c] <= 1.0 && (best.is_null() || cell.test > best["pearson_test"].get<double>()))
          best = {{"coupling", g.couplings[a]},
                  {"state_dim", g.state_dims[b]},
                  {"horizon_fraction", g.horizon_fractions[c]},
                  {"pearson_test", cell.test}};
      }
    }
  }
  nlohmann::ordered_json medians = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < nh; ++c)
    medians.push_back({{"horizon_fraction", g.horizon_fractions[c]},
                       {"horizon_samples", horizons[c]},
                       {"median_pearson_test",
                        by_horizon[c].empty() ? nlohmann::ordered_json(nullptr)
                                              : nlohmann::ordered_json(stats::median(by_horizon[c]))}});
  report.summary["cells"] = report.table.rows.size();
  report.summary["failed_cells"] = failures;
  report.summary["median_by_horizon"] = medians;
  report.summary["best_at_or_below_one_period"] = best;
  report.summary["field_weights"] = chain_summary(resolve_chain(cfg.reservoir, seeds, 1.0))["field_weights"];
  return report;
}

inline TimeSeries interpolation_series(const ExperimentConfig& cfg, RunReport* report = nullptr) {
  const auto& s = cfg.interpolation;
  const SeedSet seeds(cfg.seed);
  if (s.source == "random_walk") return gen_random_walk(s.n, s.step_std, seeds.data);
  if (s.source == "linear") {
    require(s.n >= 2, ErrorCategory::argument, "interpolation: n must be >= 2");
    TimeSeries t;
    for (std::size_t k = 0; k < s.n; ++k) {
      t.times.push_back(static_cast<double>(k));
      t.values.push_back(-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(s.n - 1));
    }
    return t;
  }
  if (s.source == "csv") {
    require(!s.path.empty(), ErrorCategory::argument, "interpolation: source csv needs a path");
    auto data = load_price_csv(s.path);
    if (report && data.warning) report->warnings.push_back(*data.warning);
    if (report) report->summary["scale"] = {{"lo", data.scale.lo}, {"hi", data.scale.hi}};
    return data.series;
  }
  fail(ErrorCategory::argument, "interpolation: source must be random_walk, linear or csv");
}

struct BaselineComparison {
  std::size_t excluded = 0;  // test points outside the training time range
  std::optional<double> reservoir, spline, hermite;  // Pearson on in-range test points
};

/// Spline baselines from train knots (target time, target value) evaluated
/// at the in-range test target times.
inline BaselineComparison compare_baselines(const TimeSeries& series, const PairFit& f) {
  TimeSeries knots;
  for (auto k : f.train_index) {
    knots.times.push_back(series.times[k + 1]);
    knots.values.push_back(series.values[k + 1]);
  }
  BaselineComparison out;
  std::vector<double> query, truth, reservoir;
  for (std::size_t i = 0; i < f.test_index.size(); ++i) {
    const double t = series.times[f.test_index[i] + 1];
    if (knots.size() == 0 || t < knots.times.front() || t > knots.times.back()) {
      ++out.excluded;
      continue;
    }
    query.push_back(t);
    truth.push_back(f.test_targets[i]);
    reservoir.push_back(f.test_predictions[i]);
  }
  auto safe = [](auto&& fn) -> std::optional<double> {
    try {
      return fn();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  out.reservoir = safe([&] { return pearson(reservoir, truth); });
  out.spline = safe([&] { return pearson(cubic_spline_interpolate(knots, query), truth); });
  out.hermite = safe([&] { return pearson(cubic_hermite_interpolate(knots, query), truth); });
  return out;
}

/// Shuffled-split interpolation: features at k predict u[k + 1]; the readout
/// is compared with natural and monotone cubic splines through the training
/// targets, over the configured fraction and a sweep of fractions.
inline RunReport run_interpolation(const ExperimentConfig& cfg) {
  require(cfg.task == Task::interpolation, ErrorCategory::argument, "run_interpolation: task must be interpolation");
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);
  const auto series = interpolation_series(cfg, &report);
  series.validate();
  require(series.size() >= 4, ErrorCategory::argument, "interpolation: series needs at least 4 points");

  const std::size_t n_pairs = series.size() - 1;
  const std::vector<double> drive(series.values.begin(), series.values.begin() + static_cast<std::ptrdiff_t>(n_pairs));
  const auto chain = resolve_chain(cfg.reservoir, seeds, max_abs(drive));
  const auto set = config_measurements(cfg, seeds, cfg.features.n_features);
  const RealMatrix features = reservoir_features(chain, drive, set, cfg.threads);
  const auto readout = seeded_readout(cfg, seeds);

  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  const auto main_plan = seeded_split(cfg.split, seeds);
  const auto main_fit = fit_pairs(features, series.values, n_pairs, 1, cfg.washout, main_plan, readout);
  fill_fit(report, main_fit);
  const auto main_cmp = compare_baselines(series, main_fit);
  report.summary["baselines"] = {{"excluded_test_points", main_cmp.excluded},
                                 {"reservoir_in_range", opt(main_cmp.reservoir)},
                                 {"cubic_spline", opt(main_cmp.spline)},
                                 {"cubic_hermite", opt(main_cmp.hermite)}};

  report.table.columns = {"train_fraction", "n_train",        "n_test",        "pearson_train",
                          "pearson_test",   "reservoir_in_range", "cubic_spline", "cubic_hermite",
                          "excluded",       "status"};
  for (double f : cfg.interpolation.fractions) {
    SplitPlan plan = main_plan;
    plan.train_fraction = f;
    try {
      const auto fr = fit_pairs(features, series.values, n_pairs, 1, cfg.washout, plan, readout);
      const auto cmp = compare_baselines(series, fr);
      report.table.rows.push_back({f, fr.train_index.size(), fr.test_index.size(), fr.pearson_train, fr.pearson_test,
                                   opt(cmp.reservoir), opt(cmp.spline), opt(cmp.hermite), cmp.excluded, "ok"});
    } catch (const Error& e) {
      report.table.rows.push_back({f, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                                   std::string(to_string(e.category())) + ": " + e.what()});
    }
  }
  report.summary["series_length"] = series.size();
  report.summary["chain"] = chain_summary(chain);
  return report;
}

inline RunReport run_spectra(const ExperimentConfig& cfg) {
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);
  const auto& s = cfg.spectra;
  const auto table = spectrum_study(s.dims, s.densities, s.samples, seeds.study, cfg.threads);
  report.table.columns = {"dim", "density", "eigenvalue"};
  report.table.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) report.table.rows.push_back({r.dim, r.density, r.eigenvalue});
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (auto d : s.dims) {
    for (double rho : s.densities) {
      const auto ev = table.cell(d, rho);
      const auto [mn, mx] = std::minmax_element(ev.begin(), ev.end());
      cells.push_back({{"dim", d},
                       {"density", rho},
                       {"count", ev.size()},
                       {"min", *mn},
                       {"max", *mx},
                       {"spread", *mx - *mn},
                       {"std", ev.size() >= 2 ? stats::sample_stddev(ev) : 0.0}});
    }
  }
  report.summary["cells"] = cells;
  return report;
}

inline RunReport run_measure_stats(const ExperimentConfig& cfg) {
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);
  const auto& s = cfg.measure_stats;
  MeasurementStudyOptions opt;
  opt.full_spins = s.full_spins;
  opt.obs_dims = s.obs_dims;
  opt.samples = s.samples;
  opt.seed = seeds.study;
  opt.state_density = s.state_density;
  opt.observable_density = s.observable_density;
  opt.threads = cfg.threads;
  const auto table = measurement_statistics_study(opt);
  report.table.columns = {"obs_dim", "sites", "expectation"};
  for (const auto& r : table.rows) {
    std::string sites;
    for (std::size_t i = 0; i < r.sites.size(); ++i) sites += (i ? ";" : "") + std::to_string(r.sites[i]);
    report.table.rows.push_back({r.obs_dim, sites, r.expectation});
  }
  nlohmann::ordered_json dims = nlohmann::ordered_json::array();
  for (auto d : s.obs_dims) {
    const auto v = table.expectations(d);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    dims.push_back({{"obs_dim", d},
                    {"count", v.size()},
                    {"mean", stats::mean(v)},
                    {"std", v.size() >= 2 ? stats::sample_stddev(v) : 0.0},
                    {"min", *mn},
                    {"max", *mx}});
  }
  report.summary["obs_dims"] = dims;
  return report;
}

inline RunReport run_gen_data(const ExperimentConfig& cfg) {
  const SeedSet seeds(cfg.seed);
  RunReport report = start_report(cfg, seeds);
  const auto& kind = cfg.gen_data.kind;
  TimeSeries s;
  if (kind == "cosine") {
    s = cosine_series(cfg, 0);
  } else if (kind == "mackey_glass") {
    s = mackey_glass_series(cfg);
  } else if (kind == "random_walk" || kind == "linear") {
    ExperimentConfig c = cfg;
    c.interpolation.source = kind;
    s = interpolation_series(c);
  } else {
    fail(ErrorCategory::argument, "gen_data: kind must be cosine, mackey_glass, random_walk or linear");
  }
  report.table.columns = {"t", "value"};
  for (std::size_t i = 0; i < s.size(); ++i) report.table.rows.push_back({s.times[i], s.values[i]});
  report.summary["length"] = s.size();
  return report;
}

inline RunReport run_experiment(const ExperimentConfig& cfg) {
  require(cfg.threads >= 1, ErrorCategory::argument, "threads must be >= 1");
  switch (cfg.task) {
    case Task::cosine:
    case Task::mackey_glass: return run_open_loop(cfg);
    case Task::interpolation: return run_interpolation(cfg);
    case Task::scan: return run_scan(cfg);
    case Task::spectra: return run_spectra(cfg);
    case Task::measure_stats: return run_measure_stats(cfg);
    case Task::gen_data: return run_gen_data(cfg);
  }
  fail(ErrorCategory::argument, "unknown task");
}

}  // namespace qrc
