#include "pmiflow/harness/config.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "pmiflow/pmi.hpp"

namespace pmiflow::harness {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 6> kTasks{{
    {TaskKind::invert, "invert"},
    {TaskKind::roundtrip, "roundtrip"},
    {TaskKind::edit, "edit"},
    {TaskKind::instability, "instability"},
    {TaskKind::sweep, "sweep"},
    {TaskKind::oracle, "oracle"},
}};

constexpr std::array<std::pair<SweepAxis, std::string_view>, 6> kAxes{{
    {SweepAxis::lambda, "lambda"},
    {SweepAxis::epsilon, "epsilon"},
    {SweepAxis::w, "w"},
    {SweepAxis::steps, "N"},
    {SweepAxis::solver, "solver"},
    {SweepAxis::noise_scale, "noise_scale"},
}};

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("config") : path) + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(join(path, it.key()), "unknown key '" + it.key() + "'");
    }
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) fail(path, "expected a non-negative integer");
  fail(path, "expected an integer");
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class F>
auto parse_enum(const json& j, const std::string& path, F&& parse) {
  const std::string s = get_string(j, path);
  try {
    return parse(s);
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

/// Scalar values broadcast to every coordinate.
std::vector<double> get_coords(const json& j, const std::string& path, std::size_t dim) {
  if (j.is_number()) return std::vector<double>(dim, j.get<double>());
  if (!j.is_array()) fail(path, "expected a number or an array of numbers");
  if (j.size() != dim) {
    fail(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(dim);
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

StateVec to_state(std::vector<double> v, const std::string& path) {
  try {
    return StateVec(std::move(v));
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

void parse_field(const json& j, FieldSpec& f) {
  const std::string path = "field";
  check_keys(j, path, {"type", "dim", "components", "velocity", "noise_scale", "noise_seed"});
  if (j.contains("type")) {
    const std::string t = get_string(j["type"], "field.type");
    if (t == "gmm") {
      f.type = FieldType::gmm;
    } else if (t == "constant") {
      f.type = FieldType::constant;
    } else {
      fail("field.type", "unknown field type '" + t + "'");
    }
  }
  if (!j.contains("dim")) fail("field.dim", "missing required key");
  f.dim = static_cast<std::size_t>(get_uint(j["dim"], "field.dim"));
  if (f.dim == 0) fail("field.dim", "dim must be at least 1");
  if (j.contains("noise_scale")) f.noise_scale = get_number(j["noise_scale"], "field.noise_scale");
  if (j.contains("noise_seed")) f.noise_seed = get_uint(j["noise_seed"], "field.noise_seed");

  if (f.type == FieldType::constant) {
    if (j.contains("components")) fail("field.components", "not allowed for a constant field");
    f.constant_velocity = j.contains("velocity")
                              ? get_coords(j["velocity"], "field.velocity", f.dim)
                              : std::vector<double>(f.dim, 0.0);
    return;
  }
  if (j.contains("velocity")) fail("field.velocity", "only allowed for a constant field");
  if (!j.contains("components")) fail("field.components", "missing required key");
  const json& comps = j["components"];
  if (!comps.is_array() || comps.empty()) {
    fail("field.components", "expected a non-empty array");
  }
  f.components.clear();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const std::string cpath = "field.components[" + std::to_string(k) + "]";
    const json& c = comps[k];
    check_keys(c, cpath, {"weight", "mean", "var"});
    const double weight = c.contains("weight") ? get_number(c["weight"], cpath + ".weight")
                                               : 1.0 / static_cast<double>(comps.size());
    if (!c.contains("mean")) fail(cpath + ".mean", "missing required key");
    if (!c.contains("var")) fail(cpath + ".var", "missing required key");
    f.components.push_back(
        GaussComponent{weight, to_state(get_coords(c["mean"], cpath + ".mean", f.dim), cpath + ".mean"),
                       to_state(get_coords(c["var"], cpath + ".var", f.dim), cpath + ".var")});
  }
}

void parse_sweep(const json& j, SweepSpec& s) {
  check_keys(j, "sweep", {"base_task", "axes"});
  if (j.contains("base_task")) {
    s.base_task = parse_enum(j["base_task"], "sweep.base_task", parse_task_kind);
  }
  s.axes.clear();
  if (!j.contains("axes")) return;
  const json& axes = j["axes"];
  if (!axes.is_object()) fail("sweep.axes", "expected an object");
  for (auto it = axes.begin(); it != axes.end(); ++it) {
    const std::string path = "sweep.axes." + it.key();
    SweepAxisValues vals{};
    try {
      vals.axis = parse_sweep_axis(it.key());
    } catch (const InvalidArgument&) {
      fail(path, "unknown key '" + it.key() + "'");
    }
    if (!it.value().is_array() || it.value().empty()) fail(path, "expected a non-empty array");
    for (std::size_t i = 0; i < it.value().size(); ++i) {
      const std::string ipath = path + "[" + std::to_string(i) + "]";
      if (vals.axis == SweepAxis::solver) {
        vals.solvers.push_back(parse_enum(it.value()[i], ipath, parse_solver_kind));
      } else if (vals.axis == SweepAxis::steps) {
        vals.numbers.push_back(static_cast<double>(get_uint(it.value()[i], ipath)));
      } else {
        vals.numbers.push_back(get_number(it.value()[i], ipath));
      }
    }
    s.axes.push_back(std::move(vals));
  }
}

void parse_correction(const json& j, ExperimentConfig& cfg) {
  check_keys(j, "correction",
             {"pmi", "mimic_cfg", "lambda", "epsilon", "w", "norm", "averaging", "ema_alpha",
              "grad_tol", "average_source", "interp_mode", "projection_tol"});
  CorrectionConfig& c = cfg.correction;
  if (j.contains("pmi")) cfg.pmi = get_bool(j["pmi"], "correction.pmi");
  if (j.contains("mimic_cfg")) {
    cfg.mimic_cfg = get_bool(j["mimic_cfg"], "correction.mimic_cfg");
    cfg.mimic_explicit = true;
  }
  if (j.contains("lambda")) {
    c.lambda = get_number(j["lambda"], "correction.lambda");
    cfg.lambda_explicit = true;
  }
  if (j.contains("epsilon")) c.epsilon = get_number(j["epsilon"], "correction.epsilon");
  if (j.contains("w")) c.w = get_number(j["w"], "correction.w");
  if (j.contains("norm")) c.norm_choice = parse_enum(j["norm"], "correction.norm", parse_norm_choice);
  if (j.contains("averaging")) {
    c.averaging = parse_enum(j["averaging"], "correction.averaging", parse_averaging_scheme);
  }
  if (j.contains("ema_alpha")) c.ema_alpha = get_number(j["ema_alpha"], "correction.ema_alpha");
  if (j.contains("grad_tol")) c.grad_tol = get_number(j["grad_tol"], "correction.grad_tol");
  if (j.contains("average_source")) {
    c.average_source =
        parse_enum(j["average_source"], "correction.average_source", parse_average_source);
  }
  if (j.contains("interp_mode")) {
    c.interp_mode = parse_enum(j["interp_mode"], "correction.interp_mode", parse_interp_mode);
  }
  if (j.contains("projection_tol")) {
    c.projection_tol = get_number(j["projection_tol"], "correction.projection_tol");
  }
}

void parse_seeds(const json& j, ExperimentConfig& cfg) {
  cfg.seeds.clear();
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      cfg.seeds.push_back(get_uint(j[i], "seeds[" + std::to_string(i) + "]"));
    }
    return;
  }
  if (j.is_object()) {
    check_keys(j, "seeds", {"base", "count"});
    const std::uint64_t base = j.contains("base") ? get_uint(j["base"], "seeds.base") : 0;
    if (!j.contains("count")) fail("seeds.count", "missing required key");
    const std::uint64_t count = get_uint(j["count"], "seeds.count");
    for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
    return;
  }
  if (j.is_number_unsigned()) {
    cfg.seeds.push_back(j.get<std::uint64_t>());
    return;
  }
  fail("seeds", "expected an array of integers or {base, count}");
}

ExperimentConfig from_json(const json& root) {
  check_keys(root, "",
             {"run_id", "task", "field", "grid", "solver", "correction", "seeds", "batch",
              "threads", "sweep", "edit", "instability", "output"});
  ExperimentConfig cfg;
  if (!root.contains("task")) fail("task", "missing required key");
  cfg.task = parse_enum(root["task"], "task", parse_task_kind);
  if (root.contains("run_id")) cfg.run_id = get_string(root["run_id"], "run_id");
  if (cfg.task != TaskKind::oracle || root.contains("field")) {
    if (!root.contains("field")) fail("field", "missing required key");
    parse_field(root["field"], cfg.field);
  } else {
    cfg.field.dim = 1;
    cfg.field.components = {GaussComponent{1.0, StateVec{0.5}, StateVec{0.25}}};
  }
  if (root.contains("grid")) {
    const json& g = root["grid"];
    check_keys(g, "grid", {"N", "T"});
    if (g.contains("N")) cfg.grid.steps = static_cast<std::size_t>(get_uint(g["N"], "grid.N"));
    if (g.contains("T")) cfg.grid.total_time = get_number(g["T"], "grid.T");
  }
  if (root.contains("solver")) cfg.solver = parse_enum(root["solver"], "solver", parse_solver_kind);
  if (root.contains("sweep")) parse_sweep(root["sweep"], cfg.sweep);
  if (root.contains("correction")) parse_correction(root["correction"], cfg);
  if (root.contains("seeds")) parse_seeds(root["seeds"], cfg);
  if (root.contains("batch")) cfg.batch = static_cast<std::size_t>(get_uint(root["batch"], "batch"));
  if (root.contains("threads")) {
    cfg.threads = static_cast<std::size_t>(get_uint(root["threads"], "threads"));
  }
  if (root.contains("edit")) {
    const json& e = root["edit"];
    check_keys(e, "edit", {"coordinate", "shift"});
    if (e.contains("coordinate")) {
      cfg.edit.coordinate = static_cast<std::size_t>(get_uint(e["coordinate"], "edit.coordinate"));
    }
    if (e.contains("shift")) cfg.edit.shift = get_number(e["shift"], "edit.shift");
  }
  if (root.contains("instability")) {
    const json& s = root["instability"];
    check_keys(s, "instability", {"probes", "h", "direction", "basis"});
    if (s.contains("probes")) {
      cfg.instability.probes = static_cast<std::size_t>(get_uint(s["probes"], "instability.probes"));
    }
    if (s.contains("h")) cfg.instability.h = get_number(s["h"], "instability.h");
    if (s.contains("direction")) {
      const std::string d = get_string(s["direction"], "instability.direction");
      if (d == "data_to_noise") {
        cfg.instability.direction = FlowDirection::data_to_noise;
      } else if (d == "noise_to_data") {
        cfg.instability.direction = FlowDirection::noise_to_data;
      } else {
        fail("instability.direction", "unknown direction '" + d + "'");
      }
    }
    if (s.contains("basis")) {
      const std::string b = get_string(s["basis"], "instability.basis");
      if (b == "random") {
        cfg.instability.basis = ProbeBasis::random_orthonormal;
      } else if (b == "canonical") {
        cfg.instability.basis = ProbeBasis::canonical;
      } else {
        fail("instability.basis", "unknown basis '" + b + "'");
      }
    }
  }
  if (root.contains("output")) cfg.output_path = get_string(root["output"], "output");
  set_task(cfg, cfg.task);
  validate(cfg);
  return cfg;
}

std::string direction_name(FlowDirection d) {
  return d == FlowDirection::data_to_noise ? "data_to_noise" : "noise_to_data";
}

}  // namespace

std::string_view to_string(TaskKind t) {
  for (const auto& [k, name] : kTasks) {
    if (k == t) return name;
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view s) {
  for (const auto& [k, name] : kTasks) {
    if (name == s) return k;
  }
  throw InvalidArgument("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(SweepAxis a) {
  for (const auto& [k, name] : kAxes) {
    if (k == a) return name;
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view s) {
  for (const auto& [k, name] : kAxes) {
    if (name == s) return k;
  }
  throw InvalidArgument("unknown sweep axis '" + std::string(s) + "'");
}

void set_task(ExperimentConfig& cfg, TaskKind task) {
  cfg.task = task;
  // mimic-CFG is the editing-phase correction, so edits enable it by default.
  if (!cfg.mimic_explicit) cfg.mimic_cfg = cfg.effective_task() == TaskKind::edit;
  resolve_lambda_default(cfg);
}

void resolve_lambda_default(ExperimentConfig& cfg) {
  if (cfg.lambda_explicit) return;
  cfg.correction.lambda = cfg.effective_task() == TaskKind::edit ? editing_lambda(cfg.solver)
                                                                 : kReconstructionLambda;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.run_id.empty()) fail("run_id", "must not be empty");
  if (cfg.run_id.find_first_of(",\"\n\r") != std::string::npos) {
    fail("run_id", "must not contain commas, quotes or line breaks");
  }
  if (cfg.task == TaskKind::sweep && cfg.sweep.base_task == TaskKind::sweep) {
    fail("sweep.base_task", "a sweep cannot sweep over sweeps");
  }
  if (cfg.task == TaskKind::sweep && cfg.sweep.base_task == TaskKind::oracle) {
    fail("sweep.base_task", "the oracle task has no sweepable parameters");
  }
  if (cfg.task == TaskKind::sweep && cfg.sweep.axes.empty()) {
    fail("sweep.axes", "a sweep needs at least one axis");
  }
  const FieldSpec& f = cfg.field;
  if (f.dim == 0) fail("field.dim", "dim must be at least 1");
  if (!(f.noise_scale >= 0.0) || !std::isfinite(f.noise_scale)) {
    fail("field.noise_scale", "noise_scale must be non-negative");
  }
  if (f.type == FieldType::gmm) {
    try {
      (void)GmmField(f.components);
    } catch (const InvalidArgument& e) {
      fail("field.components", e.what());
    }
  } else {
    if (f.constant_velocity.size() != f.dim) fail("field.velocity", "dimension mismatch");
    if (cfg.effective_task() == TaskKind::edit) {
      fail("field.type", "the edit task needs a gmm field");
    }
  }
  if (cfg.grid.steps == 0) fail("grid.N", "N must be at least 1");
  if (!(cfg.grid.total_time > 0.0) || !std::isfinite(cfg.grid.total_time)) {
    fail("grid.T", "T must be positive");
  }
  try {
    cfg.correction.validate();
  } catch (const InvalidArgument& e) {
    fail("correction", e.what());
  }
  if (cfg.seeds.empty()) fail("seeds", "at least one seed is required");
  if (cfg.batch == 0) fail("batch", "batch must be at least 1");
  if (cfg.effective_task() == TaskKind::edit) {
    if (cfg.edit.coordinate >= f.dim) fail("edit.coordinate", "coordinate out of range");
    if (!std::isfinite(cfg.edit.shift)) fail("edit.shift", "shift must be finite");
  }
  if (cfg.instability.probes > f.dim) fail("instability.probes", "probes must not exceed dim");
  if (!(cfg.instability.h > 0.0)) fail("instability.h", "h must be positive");

  for (const auto& ax : cfg.sweep.axes) {
    const std::string path = "sweep.axes." + std::string(to_string(ax.axis));
    for (double x : ax.numbers) {
      CorrectionConfig probe = cfg.correction;
      switch (ax.axis) {
        case SweepAxis::lambda: probe.lambda = x; break;
        case SweepAxis::epsilon: probe.epsilon = x; break;
        case SweepAxis::w: probe.w = x; break;
        case SweepAxis::steps:
          if (x < 1.0) fail(path, "N must be at least 1");
          break;
        case SweepAxis::noise_scale:
          if (!(x >= 0.0)) fail(path, "noise_scale must be non-negative");
          break;
        case SweepAxis::solver: break;
      }
      try {
        probe.validate();
      } catch (const InvalidArgument& e) {
        fail(path, e.what());
      }
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["run_id"] = cfg.run_id;
  j["task"] = std::string(to_string(cfg.task));
  json field;
  field["type"] = cfg.field.type == FieldType::gmm ? "gmm" : "constant";
  field["dim"] = cfg.field.dim;
  field["noise_scale"] = cfg.field.noise_scale;
  field["noise_seed"] = cfg.field.noise_seed;
  if (cfg.field.type == FieldType::gmm) {
    json comps = json::array();
    for (const auto& c : cfg.field.components) {
      comps.push_back({{"weight", c.weight}, {"mean", c.mean.data()}, {"var", c.var.data()}});
    }
    field["components"] = comps;
  } else {
    field["velocity"] = cfg.field.constant_velocity;
  }
  j["field"] = field;
  j["grid"] = {{"N", cfg.grid.steps}, {"T", cfg.grid.total_time}};
  j["solver"] = std::string(to_string(cfg.solver));
  const CorrectionConfig& c = cfg.correction;
  j["correction"] = {{"pmi", cfg.pmi},
                     {"mimic_cfg", cfg.mimic_cfg},
                     {"lambda", c.lambda},
                     {"epsilon", c.epsilon},
                     {"w", c.w},
                     {"norm", std::string(to_string(c.norm_choice))},
                     {"averaging", std::string(to_string(c.averaging))},
                     {"ema_alpha", c.ema_alpha},
                     {"grad_tol", c.grad_tol},
                     {"average_source", std::string(to_string(c.average_source))},
                     {"interp_mode", std::string(to_string(c.interp_mode))},
                     {"projection_tol", c.projection_tol}};
  j["seeds"] = cfg.seeds;
  j["batch"] = cfg.batch;
  j["threads"] = cfg.threads;
  json axes = json::object();
  for (const auto& ax : cfg.sweep.axes) {
    json vals = json::array();
    if (ax.axis == SweepAxis::solver) {
      for (auto s : ax.solvers) vals.push_back(std::string(to_string(s)));
    } else if (ax.axis == SweepAxis::steps) {
      for (double x : ax.numbers) vals.push_back(static_cast<std::uint64_t>(x));
    } else {
      for (double x : ax.numbers) vals.push_back(x);
    }
    axes[std::string(to_string(ax.axis))] = vals;
  }
  j["sweep"] = {{"base_task", std::string(to_string(cfg.sweep.base_task))}, {"axes", axes}};
  j["edit"] = {{"coordinate", cfg.edit.coordinate}, {"shift", cfg.edit.shift}};
  j["instability"] = {
      {"probes", cfg.instability.probes},
      {"h", cfg.instability.h},
      {"direction", direction_name(cfg.instability.direction)},
      {"basis", cfg.instability.basis == ProbeBasis::canonical ? "canonical" : "random"}};
  j["output"] = cfg.output_path;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GmmField build_gmm(const FieldSpec& spec) {
  if (spec.type != FieldType::gmm) throw ConfigError("field.type: expected a gmm field");
  return GmmField(spec.components);
}

FieldPtr build_field(const FieldSpec& spec, std::uint64_t seed) {
  FieldPtr base;
  if (spec.type == FieldType::gmm) {
    base = std::make_shared<GmmField>(build_gmm(spec));
  } else {
    base = std::make_shared<ConstantField>(StateVec(spec.constant_velocity));
  }
  if (spec.noise_scale > 0.0) {
    return std::make_shared<PerturbedField>(base, spec.noise_scale,
                                            derive_seed(RngSeed{spec.noise_seed}, seed));
  }
  return base;
}

}  // namespace pmiflow::harness
