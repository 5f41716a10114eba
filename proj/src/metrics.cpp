#include "lgcpfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lgcpfuse/io.hpp"

namespace lgcpfuse {

void MetricsTable::sort_canonical() {
  std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    if (a.model != b.model) return a.model < b.model;
    return a.parameter < b.parameter;
  });
}

void MetricsTable::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "scenario,model,parameter,bias,rmse,mcse,n_used\n";
  for (const auto& r : rows)
    f << r.scenario << ',' << r.model << ',' << r.parameter << ','
      << io::fmt_g17(r.bias) << ',' << io::fmt_g17(r.rmse) << ','
      << io::fmt_g17(r.mcse) << ',' << r.n_used << '\n';
}

MetricsTable MetricsTable::read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  MetricsTable t;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    MetricRow r;
    std::size_t pos = 0;
    auto next = [&]() {
      const auto comma = line.find(',', pos);
      std::string tok = comma == std::string::npos
                            ? line.substr(pos)
                            : line.substr(pos, comma - pos);
      pos = comma == std::string::npos ? line.size() : comma + 1;
      return tok;
    };
    r.scenario = std::stoi(next());
    r.model = std::stoi(next());
    r.parameter = next();
    r.bias = std::stod(next());
    r.rmse = std::stod(next());
    r.mcse = std::stod(next());
    r.n_used = std::stoi(next());
    t.rows.push_back(std::move(r));
  }
  return t;
}

const MetricRow* MetricsTable::find(int scenario, int model,
                                    const std::string& parameter) const {
  for (const auto& r : rows)
    if (r.scenario == scenario && r.model == model && r.parameter == parameter)
      return &r;
  return nullptr;
}

MetricRow make_metric(int scenario, int model, const std::string& parameter,
                      const std::vector<double>& errors) {
  MetricRow r;
  r.scenario = scenario;
  r.model = model;
  r.parameter = parameter;
  r.n_used = static_cast<int>(errors.size());
  if (errors.empty()) return r;
  double s = 0.0, ss = 0.0;
  for (double e : errors) {
    s += e;
    ss += e * e;
  }
  const double n = static_cast<double>(errors.size());
  r.bias = s / n;
  r.rmse = std::sqrt(ss / n);
  r.mcse = errors.size() > 1
               ? std::sqrt(std::max(0.0, (ss - s * s / n) / (n - 1.0)) / n)
               : 0.0;
  return r;
}

std::map<std::string, double> truth_map(const ScenarioSpec& spec) {
  std::map<std::string, double> t;
  t["beta0"] = spec.beta0;
  t["beta1"] = spec.beta1;
  // Hyperparameters are sampled (and summarized) on the log scale.
  t["log_rho1"] = std::log(spec.rho1);
  t["log_sigma1"] = std::log(spec.sigma1);
  t["log_rho2"] = std::log(spec.rho2);
  t["log_sigma2"] = std::log(spec.sigma2);
  t["alpha0"] = spec.cs_a0;
  t["alpha1"] = spec.cs_a1;
  t["alpha0_aux"] = spec.cs_a0;
  if (spec.preferential) {
    t["gamma0"] = spec.gamma0;
    t["gamma1"] = spec.gamma_eg;
    t["gamma2"] = spec.gamma_cc;
  } else {
    t["gamma0"] = std::log(spec.random_p / (1.0 - spec.random_p));
    t["gamma1"] = 0.0;
    t["gamma2"] = 0.0;
  }
  t["zeta"] = spec.zeta_sel;
  for (std::size_t k = 0; k < spec.nu_det.size(); ++k)
    t["nu" + std::to_string(k)] = spec.nu_det[k];
  return t;
}

}  // namespace lgcpfuse
