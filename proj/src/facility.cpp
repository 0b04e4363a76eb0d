#include "dcflex/facility.hpp"

#include "dcflex/errors.hpp"

namespace dcflex {

void DataCenterConfig::validate() const {
  if (num_nodes < 1) throw ConfigError("nodes must be >= 1");
  if (gpus_per_node < 1) throw ConfigError("gpus_per_node must be >= 1");
  if (!(node_idle_kw > 0.0)) throw ConfigError("node_idle_kw must be > 0");
  if (!(node_max_kw > node_idle_kw)) throw ConfigError("node_max_kw must exceed node_idle_kw");
  if (!(cooling_alpha >= 0.0)) throw ConfigError("cooling_alpha must be >= 0");
  if (!(gpu_hour_price >= 0.0)) throw ConfigError("gpu_hour_price must be >= 0");
  if (max_wait_h < 0) throw ConfigError("max_wait_h must be >= 0");
}

double gpu_active_power(const DataCenterConfig& cfg) {
  if (cfg.gpus_per_node <= 0) throw ConfigError("gpus_per_node must be >= 1");
  return (cfg.node_max_kw - cfg.node_idle_kw) / cfg.gpus_per_node;
}

double idle_power(const DataCenterConfig& cfg) { return cfg.node_idle_kw * cfg.num_nodes; }

double total_power(std::span<const ActiveLoad> active, const DataCenterConfig& cfg) {
  const double per_gpu = gpu_active_power(cfg);
  double load = 0.0;
  for (const auto& a : active) load += a.gpus * a.util;
  return idle_power(cfg) + load * per_gpu;
}

double energy_cost(double power_kw, double price_per_kwh, double alpha, double dt_h) {
  return (1.0 + alpha) * price_per_kwh * power_kw * dt_h;
}

}  // namespace dcflex
