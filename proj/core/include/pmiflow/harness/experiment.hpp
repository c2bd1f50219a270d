#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pmiflow/harness/config.hpp"
#include "pmiflow/harness/record.hpp"

namespace pmiflow::harness {

std::string_view toolkit_version() noexcept;

/// One resolved configuration per sweep point, cartesian product with the
/// last axis varying fastest. A non-sweep config expands to itself.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

/// Data point for (seed, batch_index): a draw from the source mixture, or a
/// standard normal vector for a constant field.
StateVec draw_data_point(const FieldSpec& spec, std::uint64_t seed, std::size_t batch_index);

/// Runs one trajectory of a resolved (non-sweep, non-oracle) config.
/// Failures are caught and reported in the row's error column.
RunRow run_trajectory(const ExperimentConfig& point, std::uint64_t seed, std::size_t batch_index,
                      std::size_t group);

/// Executes every trajectory on a worker pool. When cfg.output_path is set,
/// CSV rows are appended there in (group, seed, batch) order as soon as all
/// earlier rows are done, and the JSON record goes to `<output_path>.json`.
RunRecord run_experiment(const ExperimentConfig& cfg);

std::string record_to_json(const RunRecord& record);
void emit_json(const RunRecord& record, const std::string& path);

}  // namespace pmiflow::harness
