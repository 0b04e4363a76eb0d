#pragma once

#include <span>

namespace dcflex {

struct DataCenterConfig {
  int num_nodes = 100;
  int gpus_per_node = 4;
  double node_max_kw = 3.0;
  double node_idle_kw = 0.9;
  double cooling_alpha = 0.4;
  double gpu_hour_price = 2.30;  // $ per GPU-hour
  int max_wait_h = 30;

  // Throws ConfigError.
  void validate() const;
};

// Load drawn by one running job.
struct ActiveLoad {
  int gpus = 0;
  double util = 0.0;
};

// Active draw of one GPU at full utilization, kW.
double gpu_active_power(const DataCenterConfig& cfg);

// Idle power is charged for every node, occupied or not.
double idle_power(const DataCenterConfig& cfg);

double total_power(std::span<const ActiveLoad> active, const DataCenterConfig& cfg);

// Electricity plus cooling cost of drawing `power_kw` for `dt_h` hours.
double energy_cost(double power_kw, double price_per_kwh, double alpha, double dt_h = 1.0);

}  // namespace dcflex
