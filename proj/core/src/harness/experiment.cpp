#include "pmiflow/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pmiflow/harness/csv.hpp"
#include "pmiflow/harness/oracle_suite.hpp"
#include "pmiflow/instability.hpp"
#include "pmiflow/metrics.hpp"
#include "pmiflow/mimic_cfg.hpp"
#include "pmiflow/pmi.hpp"

#ifndef PMIFLOW_VERSION_STRING
#define PMIFLOW_VERSION_STRING "0.0.0"
#endif

namespace pmiflow::harness {

using nlohmann::json;

std::string_view toolkit_version() noexcept { return PMIFLOW_VERSION_STRING; }

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
  if (cfg.task != TaskKind::sweep) return {cfg};
  std::vector<ExperimentConfig> points;
  std::vector<std::size_t> idx(cfg.sweep.axes.size(), 0);
  while (true) {
    ExperimentConfig p = cfg;
    p.task = cfg.sweep.base_task;
    p.sweep.axes.clear();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const auto& ax = cfg.sweep.axes[a];
      switch (ax.axis) {
        case SweepAxis::lambda:
          p.correction.lambda = ax.numbers[idx[a]];
          p.lambda_explicit = true;
          break;
        case SweepAxis::epsilon: p.correction.epsilon = ax.numbers[idx[a]]; break;
        case SweepAxis::w: p.correction.w = ax.numbers[idx[a]]; break;
        case SweepAxis::steps: p.grid.steps = static_cast<std::size_t>(ax.numbers[idx[a]]); break;
        case SweepAxis::noise_scale: p.field.noise_scale = ax.numbers[idx[a]]; break;
        case SweepAxis::solver: p.solver = ax.solvers[idx[a]]; break;
      }
    }
    resolve_lambda_default(p);
    points.push_back(std::move(p));
    std::size_t a = idx.size();
    while (a > 0) {
      --a;
      if (++idx[a] < cfg.sweep.axes[a].size()) break;
      idx[a] = 0;
      if (a == 0) return points;
    }
    if (idx.empty()) return points;
  }
}

StateVec draw_data_point(const FieldSpec& spec, std::uint64_t seed, std::size_t batch_index) {
  const RngSeed s = derive_seed(RngSeed{seed}, batch_index);
  if (spec.type == FieldType::gmm) {
    auto engine = make_engine(s);
    return build_gmm(spec).sample_data(engine);
  }
  return sample_standard_normal(spec.dim, s, 1).front();
}

namespace {

constexpr std::uint64_t kProbeStream = 0x70726f6265ULL;
constexpr std::uint64_t kLatentStream = 0x6c6174656e74ULL;

RunRow base_row(const ExperimentConfig& p, std::uint64_t seed, std::size_t batch_index,
                std::size_t group) {
  RunRow row;
  row.run_id = p.run_id;
  row.seed = seed;
  row.batch_index = batch_index;
  row.group = group;
  row.task = std::string(to_string(p.task));
  row.solver = p.solver;
  row.steps = p.grid.steps;
  row.lambda = p.correction.lambda;
  row.epsilon = p.correction.epsilon;
  row.w = p.correction.w;
  row.noise_scale = p.field.noise_scale;
  return row;
}

double exceed_indicator(const StateVec& z) {
  return norm_threshold_stats({z}).exceed_fraction;
}

void fill_reconstruction(RunRow& row, const StateVec& z0, const StateVec& out) {
  const MetricRecord m = reconstruction_metrics(z0, out);
  row.rmse = m.rmse;
  row.mse = m.mse;
  row.psnr_db = m.psnr_db;
}

}  // namespace

RunRow run_trajectory(const ExperimentConfig& p, std::uint64_t seed, std::size_t batch_index,
                      std::size_t group) {
  RunRow row = base_row(p, seed, batch_index, group);
  try {
    const TimeGrid grid = make_uniform_grid(p.grid.steps, p.grid.total_time);
    const StateVec z0 = draw_data_point(p.field, seed, batch_index);
    const CorrectionConfig& cc = p.correction;

    auto invert = [&](const VelocityField& f, const StateVec& z) {
      return p.pmi ? pmi_invert(f, z, grid, p.solver, cc) : run_inversion(f, z, grid, p.solver);
    };
    auto reconstruct = [&](const VelocityField& f, const StateVec& z) {
      return p.pmi ? pmi_sample(f, z, grid, p.solver, cc) : run_sampling(f, z, grid, p.solver);
    };

    switch (p.task) {
      case TaskKind::invert: {
        const FieldPtr field = build_field(p.field, seed);
        const Trajectory inv = invert(*field, z0);
        row.nfe = inv.nfe;
        row.exceed_fraction = exceed_indicator(inv.final_state());
        break;
      }
      case TaskKind::roundtrip: {
        const FieldPtr field = build_field(p.field, seed);
        const Trajectory inv = invert(*field, z0);
        const Trajectory rec = reconstruct(*field, inv.final_state());
        row.nfe = inv.nfe + rec.nfe;
        row.exceed_fraction = exceed_indicator(inv.final_state());
        fill_reconstruction(row, z0, rec.final_state());
        break;
      }
      case TaskKind::edit: {
        const GmmField source = build_gmm(p.field);
        EditTask task{source,
                      source.shifted(p.edit.coordinate, p.edit.shift),
                      grid,
                      p.solver,
                      cc,
                      p.pmi,
                      p.mimic_cfg,
                      p.field.noise_scale,
                      derive_seed(RngSeed{p.field.noise_seed}, seed)};
        const EditReport rep = run_edit(task, z0);
        row.nfe = rep.nfe;
        row.exceed_fraction = exceed_indicator(rep.z1_hat);
        fill_reconstruction(row, z0, rep.z_recon);
        row.structure_metric = rep.structure_metric;
        row.fidelity_metric = rep.fidelity_metric;
        break;
      }
      case TaskKind::instability: {
        const FieldPtr field = build_field(p.field, seed);
        const bool to_noise = p.instability.direction == FlowDirection::data_to_noise;
        MapFn map = [&](const StateVec& z) {
          return (to_noise ? invert(*field, z) : reconstruct(*field, z)).final_state();
        };
        const StateVec base =
            to_noise ? z0
                     : sample_standard_normal(p.field.dim,
                                              derive_seed(RngSeed{seed}, kLatentStream + batch_index),
                                              1)
                           .front();
        const std::size_t m = p.instability.probes == 0 ? p.field.dim : p.instability.probes;
        const InstabilityReport rep = instability_coefficient(
            map, base, m, p.instability.h, derive_seed(RngSeed{seed}, kProbeStream + batch_index),
            p.instability.basis);
        row.instability_coeff = rep.coefficient;
        row.nfe = (m + 1) * expected_nfe(p.solver, p.grid.steps);
        if (to_noise) row.exceed_fraction = exceed_indicator(map(z0));
        break;
      }
      case TaskKind::sweep:
      case TaskKind::oracle:
        throw InvalidArgument("run_trajectory needs a resolved trajectory task");
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<GroupAggregate> aggregate_rows(const std::vector<RunRow>& rows) {
  std::map<std::size_t, std::vector<const RunRow*>> groups;
  for (const auto& r : rows) groups[r.group].push_back(&r);
  using Getter = std::optional<double> RunRow::*;
  const std::vector<std::pair<std::string, Getter>> metrics{
      {"rmse", &RunRow::rmse},
      {"mse", &RunRow::mse},
      {"psnr_db", &RunRow::psnr_db},
      {"instability_coeff", &RunRow::instability_coeff},
      {"exceed_fraction", &RunRow::exceed_fraction},
      {"structure_metric", &RunRow::structure_metric},
      {"fidelity_metric", &RunRow::fidelity_metric}};

  std::vector<GroupAggregate> out;
  for (const auto& [group, members] : groups) {
    GroupAggregate agg;
    const RunRow& first = *members.front();
    agg.group = group;
    agg.solver = first.solver;
    agg.steps = first.steps;
    agg.lambda = first.lambda;
    agg.epsilon = first.epsilon;
    agg.w = first.w;
    agg.noise_scale = first.noise_scale;
    agg.rows = members.size();
    for (const RunRow* r : members) {
      agg.nfe_total += r->nfe;
      if (r->failed()) ++agg.failures;
    }
    for (const auto& [name, field] : metrics) {
      std::vector<double> vals;
      for (const RunRow* r : members) {
        if (!r->failed() && (r->*field)) vals.push_back(*(r->*field));
      }
      if (vals.empty()) continue;
      MetricAggregate m;
      m.metric = name;
      m.count = vals.size();
      for (double x : vals) m.mean += x;
      m.mean /= static_cast<double>(vals.size());
      if (vals.size() > 1) {
        double ss = 0.0;
        for (double x : vals) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      }
      agg.metrics.push_back(m);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

namespace {

struct Job {
  std::size_t group;
  std::uint64_t seed;
  std::size_t batch_index;
  /// Oracle check name for oracle runs.
  std::string check;
};

RunRow run_oracle_row(const ExperimentConfig& cfg, const Job& job) {
  RunRow row = base_row(cfg, job.seed, job.batch_index, job.group);
  try {
    const OracleCheckResult res = run_oracle_check(job.check, job.seed);
    row.note = res.name + ": " + res.detail;
    if (!res.passed) row.error = res.name + " failed: " + res.detail;
  } catch (const std::exception& e) {
    row.error = job.check + ": " + e.what();
  }
  return row;
}

/// Writes rows strictly in job order, whatever order they complete in.
class OrderedSink {
 public:
  OrderedSink(std::size_t count, const std::string& path) : rows_(count) {
    if (!path.empty()) {
      out_.open(path, std::ios::binary | std::ios::trunc);
      if (!out_) throw std::runtime_error(path + ": cannot open for writing");
      out_ << csv_header_line() << '\n';
      out_.flush();
      path_ = path;
    }
  }

  void put(std::size_t index, RunRow row) {
    std::lock_guard<std::mutex> lock(mu_);
    rows_[index] = std::move(row);
    while (next_ < rows_.size() && rows_[next_]) {
      if (out_.is_open()) out_ << csv_row_line(*rows_[next_]) << '\n';
      ++next_;
    }
    if (out_.is_open()) out_.flush();
  }

  std::vector<RunRow> take() {
    if (out_.is_open()) {
      out_.close();
      if (!out_) throw std::runtime_error(path_ + ": write failed");
    }
    std::vector<RunRow> out;
    out.reserve(rows_.size());
    for (auto& r : rows_) out.push_back(std::move(*r));
    return out;
  }

 private:
  std::mutex mu_;
  std::vector<std::optional<RunRow>> rows_;
  std::size_t next_ = 0;
  std::ofstream out_;
  std::string path_;
};

}  // namespace

RunRecord run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<ExperimentConfig> points = expand_sweep(cfg);

  std::vector<Job> jobs;
  for (std::size_t g = 0; g < points.size(); ++g) {
    for (std::uint64_t seed : cfg.seeds) {
      if (cfg.task == TaskKind::oracle) {
        for (const auto& name : oracle_check_names()) jobs.push_back({g, seed, 0, name});
      } else {
        for (std::size_t b = 0; b < cfg.batch; ++b) jobs.push_back({g, seed, b, {}});
      }
    }
  }

  OrderedSink sink(jobs.size(), cfg.output_path);
  std::size_t threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs.size(), 1));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      RunRow row = cfg.task == TaskKind::oracle
                       ? run_oracle_row(cfg, job)
                       : run_trajectory(points[job.group], job.seed, job.batch_index, job.group);
      sink.put(i, std::move(row));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunRecord record;
  record.config_json = canonical_json(cfg);
  record.config_hash = config_hash(cfg);
  record.version = std::string(toolkit_version());
  record.rows = sink.take();
  record.aggregates = aggregate_rows(record.rows);
  for (const auto& r : record.rows) {
    record.nfe_total += r.nfe;
    if (r.failed()) ++record.failures;
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.output_path.empty()) emit_json(record, cfg.output_path + ".json");
  return record;
}

namespace {

json optional_json(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

}  // namespace

std::string record_to_json(const RunRecord& record) {
  json j;
  j["config"] = json::parse(record.config_json);
  j["config_hash"] = record.config_hash;
  j["version"] = record.version;
  j["wall_seconds"] = record.wall_seconds;
  j["nfe_total"] = record.nfe_total;
  j["failures"] = record.failures;
  json rows = json::array();
  for (const auto& r : record.rows) {
    rows.push_back({{"run_id", r.run_id},
                    {"seed", r.seed},
                    {"batch_index", r.batch_index},
                    {"group", r.group},
                    {"task", r.task},
                    {"solver", std::string(to_string(r.solver))},
                    {"N", r.steps},
                    {"nfe", r.nfe},
                    {"lambda", r.lambda},
                    {"epsilon", r.epsilon},
                    {"w", r.w},
                    {"noise_scale", r.noise_scale},
                    {"rmse", optional_json(r.rmse)},
                    {"mse", optional_json(r.mse)},
                    {"psnr_db", optional_json(r.psnr_db)},
                    {"instability_coeff", optional_json(r.instability_coeff)},
                    {"exceed_fraction", optional_json(r.exceed_fraction)},
                    {"structure_metric", optional_json(r.structure_metric)},
                    {"fidelity_metric", optional_json(r.fidelity_metric)},
                    {"error", r.error},
                    {"note", r.note}});
  }
  j["rows"] = rows;
  json aggs = json::array();
  for (const auto& a : record.aggregates) {
    json metrics = json::object();
    for (const auto& m : a.metrics) {
      metrics[m.metric] = {{"count", m.count},
                           {"mean", optional_json(m.mean)},
                           {"stddev", optional_json(m.stddev)}};
    }
    aggs.push_back({{"group", a.group},
                    {"solver", std::string(to_string(a.solver))},
                    {"N", a.steps},
                    {"lambda", a.lambda},
                    {"epsilon", a.epsilon},
                    {"w", a.w},
                    {"noise_scale", a.noise_scale},
                    {"rows", a.rows},
                    {"failures", a.failures},
                    {"nfe_total", a.nfe_total},
                    {"metrics", metrics}});
  }
  j["aggregates"] = aggs;
  return j.dump(2);
}

void emit_json(const RunRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << record_to_json(record) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace pmiflow::harness
