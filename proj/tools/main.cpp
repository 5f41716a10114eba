// Command-line front end: simulate synthetic datasets, fit the fusion
// models, predict risk surfaces, and run / aggregate the full simulation
// study.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgcpfuse/experiment.hpp"
#include "lgcpfuse/heatmap.hpp"
#include "lgcpfuse/io.hpp"
#include "lgcpfuse/kernels.hpp"
#include "lgcpfuse/predict.hpp"
#include "lgcpfuse/rng.hpp"

using namespace lgcpfuse;

namespace {

Domain domain_for(const std::string& domain_dir) {
  if (domain_dir.empty()) return build_synthetic_domain();
  return load_domain(domain_dir);
}

// `data_dir` as written by `simulate`: domain/ + data/.
struct LoadedData {
  Domain domain;
  Replicate rep;
};

LoadedData load_data_dir(const std::string& data_dir) {
  LoadedData d{load_domain(data_dir + "/domain"), {}};
  d.rep = load_replicate(data_dir + "/data", d.domain.grid);
  return d;
}

int cmd_simulate(int scenario, int replicate, std::uint64_t seed,
                 const std::string& domain_dir, const std::string& out) {
  const Domain domain = domain_for(domain_dir);
  auto core = std::make_shared<const LatticeCore>(domain.grid);
  const ScenarioSpec spec = ScenarioSpec::preset(scenario);
  const Replicate rep = simulate_replicate(domain, core, spec, seed, replicate);
  save_domain(out + "/domain", domain);
  save_replicate(out + "/data", domain.grid, rep);
  std::printf("scenario %d replicate %d seed %llu\n", scenario, replicate,
              static_cast<unsigned long long>(seed));
  std::printf("points: true %zu cs %zu aux %zu ps %zu, selected units %d\n",
              rep.true_pattern.size(), rep.cs_pattern.size(),
              rep.aux_pattern.size(), rep.ps_pattern.size(), [&] {
                int k = 0;
                for (auto s : rep.selection.selected) k += s != 0;
                return k;
              }());
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_fit(int model, const std::string& data_dir, const std::string& out,
            FitConfig fc, bool aux_own_intercept) {
  const LoadedData d = load_data_dir(data_dir);
  auto core = std::make_shared<const LatticeCore>(d.domain.grid);
  ModelSpec spec = ModelSpec::preset(model);
  if (aux_own_intercept) spec.aux_own_intercept = true;
  const FitData data = FitData::from_replicate(d.domain, d.rep);
  const PriorSpec priors = PriorSpec::defaults(d.domain.grid);

  const FitResult fit = fit_model(spec, d.domain, data, priors, fc, core);
  if (!fit.ok) {
    std::fprintf(stderr, "fit failed: %s\n", fit.error.c_str());
    return 1;
  }
  std::printf("%-14s %12s %10s %8s\n", "parameter", "post.mean", "split-Rhat",
              "ESS");
  for (int i = 0; i < fit.n_scalar; ++i)
    std::printf("%-14s %12.5f %10.3f %8.1f\n", fit.scalar_names[i].c_str(),
                fit.posterior_mean(fit.scalar_names[i]), fit.split_rhat[i],
                fit.ess[i]);
  for (const auto& a : fit.accepts)
    std::printf("accept %-10s chain %d  %.3f\n", a.block.c_str(), a.chain,
                a.rate);
  if (!out.empty()) {
    save_fit(out, fit);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

int cmd_predict(const std::string& fit_dir, const std::string& data_dir,
                const std::string& mode, const std::string& out) {
  const LoadedData d = load_data_dir(data_dir);
  const FitResult fit = load_fit(fit_dir);
  const ModelSpec spec = ModelSpec::preset(fit.model_id);
  const RiskMode rm = mode == "field" ? RiskMode::with_field
                                      : RiskMode::fixed_effects_only;
  const RiskSummary risk = predict_risk(fit, spec, d.domain, rm);
  std::filesystem::create_directories(out);
  io::write_raster_csv(out + "/risk_median.csv", d.domain.grid, risk.median);
  io::write_raster_csv(out + "/risk_width.csv", d.domain.grid, risk.width);
  io::write_raster_csv(out + "/risk_sd.csv", d.domain.grid, risk.sd);
  HeatmapOptions hopt;
  hopt.title = "posterior median risk (" + mode + ")";
  render_heatmap(d.domain.grid, risk.median, out + "/risk_median.svg", hopt);
  double mw = 0.0;
  for (double w : risk.width) mw += w;
  std::printf("mean 95%% interval width %.5f\nwrote %s\n",
              risk.width.empty() ? 0.0 : mw / risk.width.size(), out.c_str());
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out,
                   int threads, bool resume, std::uint64_t seed,
                   bool have_seed, const std::string& emit_path) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_experiment_config(config_path);
  if (!out.empty()) cfg.out_dir = out;
  if (threads > 0) cfg.threads = threads;
  if (resume) cfg.resume = true;
  if (have_seed) cfg.master_seed = seed;
  if (!emit_path.empty()) {
    write_experiment_config(emit_path, cfg);
    std::printf("wrote %s\n", emit_path.c_str());
    return 0;
  }
  const ExperimentResult res = run_experiment(cfg);
  std::printf("completed %d fits, %d failures\nmetrics: %s/metrics.csv\n",
              res.n_completed, res.n_failures, res.out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& run_dir) {
  const ExperimentResult res = aggregate_run(run_dir);
  std::printf("completed %d fits, %d failures, %zu metric rows\n",
              res.n_completed, res.n_failures, res.table.rows.size());
  std::printf("metrics: %s/metrics.csv\nreport:  %s/report.txt\n",
              run_dir.c_str(), run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"log-Gaussian Cox process fusion of citizen-science and "
               "professional survey data"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate one synthetic dataset");
  int scenario = 2, replicate = 0;
  std::uint64_t seed = 1;
  std::string domain_dir, sim_out = "sim_out";
  sim->add_option("--scenario", scenario, "study cell 1-4")
      ->check(CLI::Range(1, 4));
  sim->add_option("--replicate", replicate, "replicate index");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--domain", domain_dir, "domain directory (default: built-in)");
  sim->add_option("--out", sim_out, "output directory");

  // fit
  auto* fitc = app.add_subcommand("fit", "fit one model to a dataset");
  int model = 6;
  std::string fit_data, fit_out;
  FitConfig fc;
  bool aux_own = false;
  fitc->add_option("--model", model, "model 1-8")->check(CLI::Range(1, 8));
  fitc->add_option("--data", fit_data, "dataset directory from `simulate`")
      ->required();
  fitc->add_option("--out", fit_out, "directory to store the fit");
  fitc->add_option("--chains", fc.n_chains, "number of chains");
  fitc->add_option("--iters", fc.n_iter, "iterations per chain");
  fitc->add_option("--warmup", fc.n_warmup, "warm-up iterations");
  fitc->add_option("--thin", fc.thin, "keep every k-th draw");
  fitc->add_option("--seed", fc.seed, "sampler seed");
  fitc->add_flag("--aux-own-intercept", aux_own,
                 "give the auxiliary pattern its own intercept instead of "
                 "sharing the effort intercept");
  bool no_fields = false;
  fitc->add_flag("--no-fields", no_fields, "do not store field draws");

  // predict
  auto* pred = app.add_subcommand("predict", "risk surface from a stored fit");
  std::string pfit, pdata, pmode = "fixed", pout = "predict_out";
  pred->add_option("--fit", pfit, "fit directory")->required();
  pred->add_option("--data", pdata, "dataset directory")->required();
  pred->add_option("--mode", pmode, "fixed | field")
      ->check(CLI::IsMember({"fixed", "field"}));
  pred->add_option("--out", pout, "output directory");

  // experiment
  auto* expc = app.add_subcommand("experiment", "run the simulation study");
  std::string econfig, eout, emit;
  int ethreads = 0;
  bool eresume = false;
  std::uint64_t eseed = 0;
  expc->add_option("--config", econfig, "experiment config JSON");
  expc->add_option("--out", eout, "output directory (overrides config)");
  expc->add_option("--threads", ethreads, "worker threads");
  expc->add_flag("--resume", eresume, "skip triples already in the manifest");
  auto* eseed_opt = expc->add_option("--seed", eseed, "master seed");
  expc->add_option("--emit-config", emit,
                   "write the effective config to this path and exit");

  // report
  auto* repc = app.add_subcommand("report", "re-aggregate a finished run");
  std::string run_dir;
  repc->add_option("--run", run_dir, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(scenario, replicate, seed, domain_dir, sim_out);
    if (*fitc) {
      fc.store_fields = !no_fields;
      return cmd_fit(model, fit_data, fit_out, fc, aux_own);
    }
    if (*pred) return cmd_predict(pfit, pdata, pmode, pout);
    if (*expc)
      return cmd_experiment(econfig, eout, ethreads, eresume, eseed,
                            eseed_opt->count() > 0, emit);
    if (*repc) return cmd_report(run_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
