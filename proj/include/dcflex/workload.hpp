#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace dcflex {

using Rng = std::mt19937_64;

struct Job {
  int id = 0;
  int arrival = 0;       // hour the job enters the queue
  int dur_est = 1;       // user estimate, used for planning and revenue
  int dur_act = 1;       // realized runtime, dur_act <= dur_est
  int gpus = 1;
  int nodes = 1;
  double util = 0.6;     // fraction of per-GPU active power drawn

  bool terminates_early() const { return dur_act < dur_est; }
  bool operator==(const Job&) const = default;
};

// --- utilization laws -------------------------------------------------------

struct FixedUtil {
  double value = 0.6;
};

// Normal draw clipped into [kMinUtil, kMaxUtil].
struct TruncatedNormalUtil {
  double mean = 0.6;
  double sd = 0.3;
};

using UtilMode = std::variant<FixedUtil, TruncatedNormalUtil>;

inline constexpr double kMinUtil = 0.05;
inline constexpr double kMaxUtil = 1.0;

// --- GPU request laws -------------------------------------------------------

struct FixedGpus {
  int count = 20;
};

// max(1, Poisson(mean)).
struct PoissonGpus {
  double mean = 20.0;
};

// P(g) proportional to 1/g over the support.
struct InverseWeightedGpus {
  std::vector<int> support;
};

using GpuMode = std::variant<FixedGpus, PoissonGpus, InverseWeightedGpus>;

// Support {1, ..., max_gpus}.
InverseWeightedGpus inverse_weighted_range(int max_gpus);

inline constexpr int kDefaultMaxGpusPerJob = 100;

struct WorkloadSpec {
  int num_jobs = 150;
  int arrival_span = 96;
  double duration_mean = 10.0;
  double duration_sd = 6.0;
  int duration_max = 48;
  UtilMode util = TruncatedNormalUtil{};
  GpuMode gpus = inverse_weighted_range(kDefaultMaxGpusPerJob);
  double early_term_fraction = 0.20;
  int gpus_per_node = 4;
  std::uint64_t seed = 42;

  // Throws ConfigError.
  void validate() const;
};

int derive_nodes(int gpus, int gpus_per_node);

int sample_gpu_count(const GpuMode& mode, Rng& rng);
double sample_util(const UtilMode& mode, Rng& rng);

// Pure function of the spec (seed included). Jobs are returned ordered by
// (arrival, id) with ids 0..num_jobs-1 assigned in that order.
std::vector<Job> generate_workload(const WorkloadSpec& spec);

// jobs.csv: id,arrival_h,dur_est_h,dur_act_h,gpus,nodes,util
void write_jobs_csv(std::ostream& out, const std::vector<Job>& jobs);
std::vector<Job> read_jobs_csv(std::istream& in);

std::string describe(const UtilMode& mode);
std::string describe(const GpuMode& mode);

}  // namespace dcflex
