#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgcpfuse/scenario.hpp"

// Replicate-level estimation metrics: for each (scenario, model, parameter),
// the mean bias, RMSE and Monte Carlo standard error of the posterior means
// across replicates.

namespace lgcpfuse {

struct MetricRow {
  int scenario = 0;
  int model = 0;
  std::string parameter;
  double bias = 0.0;
  double rmse = 0.0;
  double mcse = 0.0;
  int n_used = 0;
};

struct MetricsTable {
  std::vector<MetricRow> rows;

  void sort_canonical();  // by (scenario, model, parameter)
  void write_csv(const std::string& path) const;
  static MetricsTable read_csv(const std::string& path);
  const MetricRow* find(int scenario, int model,
                        const std::string& parameter) const;
};

// errors = posterior mean minus truth, one entry per used replicate.
MetricRow make_metric(int scenario, int model, const std::string& parameter,
                      const std::vector<double>& errors);

// True values of the inference parameters implied by a scenario, keyed by
// the sampler's scalar names. Parameters without a scalar truth (the
// reporting block) are absent.
std::map<std::string, double> truth_map(const ScenarioSpec& spec);

}  // namespace lgcpfuse
