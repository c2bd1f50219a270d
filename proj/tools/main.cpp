// pmiflow command-line driver.
//
// Exit codes: 0 success, 1 validation or parse error, 2 trajectory or
// oracle failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pmiflow/harness/config.hpp"
#include "pmiflow/harness/csv.hpp"
#include "pmiflow/harness/experiment.hpp"
#include "pmiflow/harness/oracle_suite.hpp"

namespace ph = pmiflow::harness;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<std::string> solver;
  std::optional<std::size_t> steps;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<double> w;
  std::optional<double> noise_scale;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> probes;
  bool no_pmi = false;
  bool no_mimic = false;
};

void add_common(CLI::App* sub, Overrides& o, bool config_required) {
  auto* c = sub->add_option("--config", o.config_path, "JSON experiment config");
  if (config_required) c->required();
  sub->add_option("--seed", o.seed, "run a single seed instead of the configured list");
  sub->add_option("--out", o.out, "CSV output path; the JSON record goes to <out>.json");
  sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

void add_overrides(CLI::App* sub, Overrides& o) {
  sub->add_option("--solver", o.solver, "euler, heun, rf_solver or fireflow");
  sub->add_option("-N,--steps", o.steps, "number of grid intervals");
  sub->add_option("--lambda", o.lambda, "proximal weight");
  sub->add_option("--epsilon", o.epsilon, "radius offset");
  sub->add_option("--w", o.w, "mimic-CFG interpolation weight");
  sub->add_option("--noise-scale", o.noise_scale, "velocity perturbation scale");
  sub->add_option("--batch", o.batch, "trajectories per seed");
  sub->add_flag("--no-pmi", o.no_pmi, "disable the proximal-mean correction");
  sub->add_flag("--no-mimic", o.no_mimic, "disable mimic-CFG during edits");
}

ph::ExperimentConfig build_config(ph::TaskKind task, const Overrides& o) {
  ph::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = ph::load_config(o.config_path);
  } else {
    cfg = ph::parse_config(R"({"task": "oracle"})");
  }
  ph::set_task(cfg, task);
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.out) cfg.output_path = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.solver) cfg.solver = pmiflow::parse_solver_kind(*o.solver);
  if (o.steps) cfg.grid.steps = *o.steps;
  if (o.lambda) {
    cfg.correction.lambda = *o.lambda;
    cfg.lambda_explicit = true;
  }
  if (o.epsilon) cfg.correction.epsilon = *o.epsilon;
  if (o.w) cfg.correction.w = *o.w;
  if (o.noise_scale) cfg.field.noise_scale = *o.noise_scale;
  if (o.batch) cfg.batch = *o.batch;
  if (o.probes) cfg.instability.probes = *o.probes;
  if (o.no_pmi) cfg.pmi = false;
  if (o.no_mimic) {
    cfg.mimic_cfg = false;
    cfg.mimic_explicit = true;
  }
  ph::resolve_lambda_default(cfg);
  ph::validate(cfg);
  return cfg;
}

void print_summary(const ph::RunRecord& rec, ph::TaskKind task) {
  std::cerr << "config " << rec.config_hash << ", " << rec.rows.size() << " rows, "
            << rec.failures << " failed, nfe " << rec.nfe_total << '\n';
  if (task == ph::TaskKind::oracle) {
    for (const auto& r : rec.rows) {
      std::cerr << (r.failed() ? "FAIL " : "ok   ") << r.note << '\n';
    }
    return;
  }
  for (const auto& a : rec.aggregates) {
    std::cerr << "group " << a.group << " solver=" << pmiflow::to_string(a.solver)
              << " N=" << a.steps << " lambda=" << ph::format_double(a.lambda)
              << " epsilon=" << ph::format_double(a.epsilon) << " w=" << ph::format_double(a.w)
              << " noise=" << ph::format_double(a.noise_scale);
    for (const auto& m : a.metrics) {
      std::cerr << ' ' << m.metric << '=' << ph::format_double(m.mean) << "±"
                << ph::format_double(m.stddev);
    }
    std::cerr << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmiflow: proximal-mean inversion experiments on analytic flow fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ph::toolkit_version()));

  Overrides o;
  struct Sub {
    ph::TaskKind task;
    CLI::App* app;
  };
  std::vector<Sub> subs{
      {ph::TaskKind::invert, app.add_subcommand("invert", "invert data points to latents")},
      {ph::TaskKind::roundtrip,
       app.add_subcommand("roundtrip", "invert then reconstruct and report errors")},
      {ph::TaskKind::edit, app.add_subcommand("edit", "shifted-mixture editing task")},
      {ph::TaskKind::instability,
       app.add_subcommand("instability", "flow-map instability coefficient")},
      {ph::TaskKind::sweep, app.add_subcommand("sweep", "cartesian sweep over config axes")},
      {ph::TaskKind::oracle, app.add_subcommand("oracle", "closed-form and order oracles")},
  };
  for (auto& s : subs) {
    add_common(s.app, o, s.task != ph::TaskKind::oracle);
    if (s.task != ph::TaskKind::oracle) add_overrides(s.app, o);
    if (s.task == ph::TaskKind::instability) {
      s.app->add_option("--probes", o.probes, "probe count (0 = full dimension)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ph::TaskKind task = ph::TaskKind::oracle;
  for (const auto& s : subs) {
    if (s.app->parsed()) task = s.task;
  }

  try {
    const ph::ExperimentConfig cfg = build_config(task, o);
    const ph::RunRecord rec = ph::run_experiment(cfg);
    if (cfg.output_path.empty()) ph::write_csv(rec, std::cout);
    print_summary(rec, task);
    return rec.failures == 0 ? 0 : 2;
  } catch (const pmiflow::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
