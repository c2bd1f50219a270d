#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmiflow/correction_config.hpp"
#include "pmiflow/errors.hpp"
#include "pmiflow/fields.hpp"
#include "pmiflow/instability.hpp"
#include "pmiflow/solvers.hpp"

namespace pmiflow::harness {

/// Parse or validation failure in an experiment config. The message names
/// the offending key path or the line and column of a syntax error.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class TaskKind { invert, roundtrip, edit, instability, sweep, oracle };

std::string_view to_string(TaskKind t);
TaskKind parse_task_kind(std::string_view s);

enum class FieldType { gmm, constant };

struct FieldSpec {
  FieldType type = FieldType::gmm;
  std::size_t dim = 0;
  std::vector<GaussComponent> components;
  /// Only for type constant.
  std::vector<double> constant_velocity;
  double noise_scale = 0.0;
  std::uint64_t noise_seed = 0;
};

struct GridSpec {
  std::size_t steps = 30;
  double total_time = 1.0;
};

struct EditSpec {
  std::size_t coordinate = 0;
  double shift = 2.0;
};

struct InstabilitySpec {
  /// 0 means m = n.
  std::size_t probes = 0;
  double h = 1e-4;
  FlowDirection direction = FlowDirection::data_to_noise;
  ProbeBasis basis = ProbeBasis::random_orthonormal;
};

enum class SweepAxis { lambda, epsilon, w, steps, solver, noise_scale };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view s);

struct SweepAxisValues {
  SweepAxis axis;
  /// Numeric axes use numbers; the solver axis uses solvers.
  std::vector<double> numbers;
  std::vector<SolverKind> solvers;

  std::size_t size() const noexcept {
    return axis == SweepAxis::solver ? solvers.size() : numbers.size();
  }
};

struct SweepSpec {
  TaskKind base_task = TaskKind::roundtrip;
  std::vector<SweepAxisValues> axes;
};

struct ExperimentConfig {
  std::string run_id = "run";
  TaskKind task = TaskKind::roundtrip;
  FieldSpec field;
  GridSpec grid;
  SolverKind solver = SolverKind::euler;
  bool pmi = true;
  bool mimic_cfg = false;
  /// False when λ was left to the per-task default, so that sweeps over
  /// the solver pick the matching editing value.
  bool lambda_explicit = false;
  /// False when mimic_cfg follows the task default (on for edits).
  bool mimic_explicit = false;
  CorrectionConfig correction;
  std::vector<std::uint64_t> seeds{0};
  std::size_t batch = 1;
  /// 0 means hardware concurrency.
  std::size_t threads = 0;
  SweepSpec sweep;
  EditSpec edit;
  InstabilitySpec instability;
  std::string output_path;

  /// The task each trajectory actually runs.
  TaskKind effective_task() const noexcept {
    return task == TaskKind::sweep ? sweep.base_task : task;
  }
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::string_view text);

/// Switches the task and re-applies the task-dependent defaults.
void set_task(ExperimentConfig& cfg, TaskKind task);

/// Re-applies the λ default after a solver or task change.
void resolve_lambda_default(ExperimentConfig& cfg);

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& cfg);

/// Canonical JSON serialization with every default filled in.
std::string canonical_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of canonical_json, as 16 lowercase hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Builds the velocity field for one trajectory. Perturbed fields draw a
/// distinct realization per seed.
FieldPtr build_field(const FieldSpec& spec, std::uint64_t seed);

/// Source mixture of a gmm field spec.
GmmField build_gmm(const FieldSpec& spec);

}  // namespace pmiflow::harness
