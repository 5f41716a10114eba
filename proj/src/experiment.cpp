#include "lgcpfuse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "lgcpfuse/heatmap.hpp"
#include "lgcpfuse/io.hpp"
#include "lgcpfuse/predict.hpp"
#include "lgcpfuse/rng.hpp"

namespace fs = std::filesystem;

namespace lgcpfuse {

namespace {

struct Triple {
  int scenario = 0, replicate = 0, model = 0;
};

std::string rep_dir(const std::string& out, int s, int r) {
  return out + "/s" + std::to_string(s) + "/r" + std::to_string(r);
}

std::string triple_dir(const std::string& out, const Triple& t) {
  return rep_dir(out, t.scenario, t.replicate) + "/m" + std::to_string(t.model);
}

nlohmann::json sampler_json(const FitConfig& c) {
  return {{"n_chains", c.n_chains},     {"n_iter", c.n_iter},
          {"n_warmup", c.n_warmup},     {"thin", c.thin},
          {"field_thin", c.field_thin}, {"eps_omega", c.eps_omega},
          {"eps_fixed", c.eps_fixed},   {"step_hyper", c.step_hyper},
          {"step_rescale", c.step_rescale}, {"adapt", c.adapt},
          {"store_fields", c.store_fields}};
}

FitConfig sampler_from_json(const nlohmann::json& j) {
  FitConfig c;
  c.n_chains = j.value("n_chains", c.n_chains);
  c.n_iter = j.value("n_iter", c.n_iter);
  c.n_warmup = j.value("n_warmup", c.n_warmup);
  c.thin = j.value("thin", c.thin);
  c.field_thin = j.value("field_thin", c.field_thin);
  c.eps_omega = j.value("eps_omega", c.eps_omega);
  c.eps_fixed = j.value("eps_fixed", c.eps_fixed);
  c.step_hyper = j.value("step_hyper", c.step_hyper);
  c.step_rescale = j.value("step_rescale", c.step_rescale);
  c.adapt = j.value("adapt", c.adapt);
  c.store_fields = j.value("store_fields", c.store_fields);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {{"scenarios", cfg.scenarios},
          {"models", cfg.models},
          {"n_replicates", cfg.n_replicates},
          {"reporting_models_everywhere", cfg.reporting_models_everywhere},
          {"master_seed", cfg.master_seed},
          {"threads", cfg.threads},
          {"resume", cfg.resume},
          {"out_dir", cfg.out_dir},
          {"domain_dir", cfg.domain_dir},
          {"prior_range_frac", cfg.prior_range_frac},
          {"aux_own_intercept", cfg.aux_own_intercept},
          {"save_chains", cfg.save_chains},
          {"test_hook_truth", cfg.test_hook_truth},
          {"sampler", sampler_json(cfg.sampler)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.scenarios = j.value("scenarios", cfg.scenarios);
  cfg.models = j.value("models", cfg.models);
  cfg.n_replicates = j.value("n_replicates", cfg.n_replicates);
  cfg.reporting_models_everywhere =
      j.value("reporting_models_everywhere", cfg.reporting_models_everywhere);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.resume = j.value("resume", cfg.resume);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.domain_dir = j.value("domain_dir", cfg.domain_dir);
  cfg.prior_range_frac = j.value("prior_range_frac", cfg.prior_range_frac);
  cfg.aux_own_intercept = j.value("aux_own_intercept", cfg.aux_own_intercept);
  cfg.save_chains = j.value("save_chains", cfg.save_chains);
  cfg.test_hook_truth = j.value("test_hook_truth", cfg.test_hook_truth);
  if (j.contains("sampler")) cfg.sampler = sampler_from_json(j.at("sampler"));
  return cfg;
}

Domain make_domain(const ExperimentConfig& cfg) {
  if (cfg.domain_dir.empty()) return build_synthetic_domain();
  return load_domain(cfg.domain_dir);
}

std::vector<double> true_risk_of(const Replicate& rep, double area) {
  std::vector<double> risk(rep.log_lambda_true.size());
  for (std::size_t c = 0; c < risk.size(); ++c)
    risk[c] = -std::expm1(-std::exp(rep.log_lambda_true[c]) * area);
  return risk;
}

void process_triple(const ExperimentConfig& cfg, const Domain& domain,
                    std::shared_ptr<const LatticeCore> core,
                    const PriorSpec& priors, const Triple& t,
                    std::mutex& io_mu) {
  const ScenarioSpec sspec = ScenarioSpec::preset(t.scenario);
  const Replicate rep =
      simulate_replicate(domain, core, sspec, cfg.master_seed, t.replicate);

  const std::string rdir = rep_dir(cfg.out_dir, t.scenario, t.replicate);
  const std::string mdir = triple_dir(cfg.out_dir, t);
  fs::create_directories(mdir);
  {
    std::lock_guard<std::mutex> lock(io_mu);
    const std::string truth_path = rdir + "/true_risk.csv";
    if (!fs::exists(truth_path))
      io::write_raster_csv(truth_path, domain.grid,
                           true_risk_of(rep, domain.grid.cell_area()));
  }

  nlohmann::json summary;
  summary["scenario"] = t.scenario;
  summary["replicate"] = t.replicate;
  summary["model"] = t.model;

  ModelSpec mspec = ModelSpec::preset(t.model);
  mspec.aux_own_intercept = cfg.aux_own_intercept;
  FitData data = FitData::from_replicate(domain, rep);
  FitConfig fc = cfg.sampler;
  fc.seed = rng::derive_seed(
      cfg.master_seed,
      {static_cast<std::uint64_t>(t.scenario),
       static_cast<std::uint64_t>(t.replicate),
       static_cast<std::uint64_t>(t.model), 0xf17ULL});
  fc.store_fields = cfg.save_chains && fc.store_fields;

  FitResult fit = fit_model(mspec, domain, data, priors, fc, core);
  summary["ok"] = fit.ok;
  summary["error"] = fit.error;

  if (fit.ok) {
    const auto truths = truth_map(sspec);
    nlohmann::json pm, rhat, ess;
    for (int i = 0; i < fit.n_scalar; ++i) {
      const std::string& name = fit.scalar_names[i];
      double mean = fit.posterior_mean(name);
      if (cfg.test_hook_truth) {
        const auto it = truths.find(name);
        if (it != truths.end()) mean = it->second;
      }
      pm[name] = mean;
      rhat[name] = fit.split_rhat[i];
      ess[name] = fit.ess[i];
    }
    summary["postmean"] = pm;
    summary["split_rhat"] = rhat;
    summary["ess"] = ess;

    const RiskSummary risk =
        predict_risk(fit, mspec, domain, RiskMode::fixed_effects_only);
    double mw = 0.0;
    for (double wv : risk.width) mw += wv;
    summary["mean_width"] = risk.width.empty() ? 0.0 : mw / risk.width.size();
    io::write_raster_csv(mdir + "/risk_median.csv", domain.grid, risk.median);
    io::write_raster_csv(mdir + "/risk_width.csv", domain.grid, risk.width);
    io::write_raster_csv(mdir + "/risk_sd.csv", domain.grid, risk.sd);
    if (cfg.save_chains) save_fit(mdir + "/fit", fit);
  }

  std::ofstream f(mdir + "/summary.json");
  f << summary.dump(2) << '\n';
}

}  // namespace

std::vector<int> ExperimentConfig::models_for_scenario(int scenario) const {
  std::vector<int> out;
  for (int m : models) {
    if ((m == 7 || m == 8) && (scenario == 1 || scenario == 2) &&
        !reporting_models_everywhere)
      continue;
    out.push_back(m);
  }
  return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  nlohmann::json j;
  f >> j;
  return config_from_json(j);
}

void write_experiment_config(const std::string& path,
                             const ExperimentConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << config_to_json(cfg).dump(2) << '\n';
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  write_experiment_config(cfg.out_dir + "/config_echo.json", cfg);

  const Domain domain = make_domain(cfg);
  auto core = std::make_shared<const LatticeCore>(domain.grid);
  const PriorSpec priors =
      PriorSpec::defaults(domain.grid, cfg.prior_range_frac);

  std::vector<Triple> triples;
  for (int s : cfg.scenarios)
    for (int r = 0; r < cfg.n_replicates; ++r)
      for (int m : cfg.models_for_scenario(s))
        triples.push_back({s, r, m});

  const std::string manifest_path = cfg.out_dir + "/manifest.jsonl";
  std::set<std::string> done;
  if (cfg.resume && fs::exists(manifest_path)) {
    std::ifstream mf(manifest_path);
    std::string line;
    while (std::getline(mf, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      done.insert(std::to_string(j.at("scenario").get<int>()) + "/" +
                  std::to_string(j.at("replicate").get<int>()) + "/" +
                  std::to_string(j.at("model").get<int>()));
    }
  } else {
    std::ofstream mf(manifest_path, std::ios::trunc);  // start fresh
  }

  std::vector<Triple> todo;
  for (const auto& t : triples) {
    const std::string key = std::to_string(t.scenario) + "/" +
                            std::to_string(t.replicate) + "/" +
                            std::to_string(t.model);
    if (!done.count(key)) todo.push_back(t);
  }

  std::atomic<std::size_t> next{0};
  std::mutex io_mu;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) break;
      const Triple& t = todo[i];
      std::string err;
      try {
        process_triple(cfg, domain, core, priors, t, io_mu);
      } catch (const std::exception& e) {
        err = e.what();
        // Record the failure in the triple's summary so aggregation sees it.
        const std::string mdir = triple_dir(cfg.out_dir, t);
        fs::create_directories(mdir);
        nlohmann::json summary{{"scenario", t.scenario},
                               {"replicate", t.replicate},
                               {"model", t.model},
                               {"ok", false},
                               {"error", err}};
        std::ofstream f(mdir + "/summary.json");
        f << summary.dump(2) << '\n';
      }
      std::lock_guard<std::mutex> lock(io_mu);
      std::ofstream mf(manifest_path, std::ios::app);
      mf << nlohmann::json{{"scenario", t.scenario},
                           {"replicate", t.replicate},
                           {"model", t.model},
                           {"ok", err.empty()}}
                .dump()
         << '\n';
      std::fprintf(stderr, "done s%d r%d m%d%s\n", t.scenario, t.replicate,
                   t.model, err.empty() ? "" : " (failed)");
    }
  };

  const int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads - 1; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  return aggregate_run(cfg.out_dir);
}

ExperimentResult aggregate_run(const std::string& out_dir) {
  const ExperimentConfig cfg =
      load_experiment_config(out_dir + "/config_echo.json");
  const Domain domain = make_domain(cfg);
  const int n = domain.grid.n_active();

  ExperimentResult res;
  res.out_dir = out_dir;
  fs::create_directories(out_dir + "/maps");
  std::ofstream failures(out_dir + "/failures.csv");
  failures << "scenario,model,replicate,error\n";

  for (int s : cfg.scenarios) {
    const ScenarioSpec sspec = ScenarioSpec::preset(s);
    const auto truths = truth_map(sspec);
    for (int m : cfg.models_for_scenario(s)) {
      std::map<std::string, std::vector<double>> errors;
      std::vector<double> sq_err(n, 0.0), width_sum(n, 0.0);
      int used = 0;
      for (int r = 0; r < cfg.n_replicates; ++r) {
        const std::string mdir = triple_dir(out_dir, {s, r, m});
        std::ifstream sf(mdir + "/summary.json");
        if (!sf) continue;  // not yet run (partial report)
        nlohmann::json summary;
        sf >> summary;
        if (!summary.value("ok", false)) {
          res.n_failures++;
          failures << s << ',' << m << ',' << r << ",\""
                   << summary.value("error", std::string("unknown")) << "\"\n";
          continue;
        }
        res.n_completed++;
        used++;
        for (const auto& [name, tv] : truths) {
          if (!summary.at("postmean").contains(name)) continue;
          errors[name].push_back(summary.at("postmean").at(name).get<double>() -
                                 tv);
        }
        const auto median =
            io::read_raster_csv(mdir + "/risk_median.csv", domain.grid);
        const auto width =
            io::read_raster_csv(mdir + "/risk_width.csv", domain.grid);
        const auto truth = io::read_raster_csv(
            rep_dir(out_dir, s, r) + "/true_risk.csv", domain.grid);
        for (int c = 0; c < n; ++c) {
          const double d = median[c] - truth[c];
          sq_err[c] += d * d;
          width_sum[c] += width[c];
        }
      }
      for (const auto& [name, errs] : errors)
        res.table.rows.push_back(make_metric(s, m, name, errs));
      if (used > 0) {
        std::vector<double> rmse_map(n), width_map(n);
        for (int c = 0; c < n; ++c) {
          rmse_map[c] = std::sqrt(sq_err[c] / used);
          width_map[c] = width_sum[c] / used;
        }
        const std::string tag = "s" + std::to_string(s) + "_m" +
                                std::to_string(m);
        io::write_raster_csv(out_dir + "/maps/" + tag + "_pred_rmse.csv",
                             domain.grid, rmse_map);
        io::write_raster_csv(out_dir + "/maps/" + tag + "_width.csv",
                             domain.grid, width_map);
        HeatmapOptions hopt;
        hopt.title = tag + " prediction RMSE";
        render_heatmap(domain.grid, rmse_map,
                       out_dir + "/maps/" + tag + "_pred_rmse.svg", hopt);
        hopt.title = tag + " mean 95% interval width";
        render_heatmap(domain.grid, width_map,
                       out_dir + "/maps/" + tag + "_width.svg", hopt);
      }
    }
  }

  res.table.sort_canonical();
  res.table.write_csv(out_dir + "/metrics.csv");

  std::ofstream rep(out_dir + "/report.txt");
  rep << "scenario model parameter        bias         rmse         mcse  n\n";
  char buf[160];
  for (const auto& row : res.table.rows) {
    std::snprintf(buf, sizeof buf, "%8d %5d %-10s %12.5f %12.5f %12.5f %3d\n",
                  row.scenario, row.model, row.parameter.c_str(), row.bias,
                  row.rmse, row.mcse, row.n_used);
    rep << buf;
  }
  return res;
}

}  // namespace lgcpfuse
