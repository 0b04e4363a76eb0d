#include "dcflex/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dcflex/errors.hpp"

namespace dcflex {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void validate_gpu_mode(const GpuMode& mode) {
  std::visit(Overloaded{
                 [](const FixedGpus& m) {
                   if (m.count < 1) throw ConfigError("fixed GPU count must be >= 1");
                 },
                 [](const PoissonGpus& m) {
                   if (!(m.mean > 0.0) || !std::isfinite(m.mean))
                     throw ConfigError("Poisson GPU mean must be > 0");
                 },
                 [](const InverseWeightedGpus& m) {
                   if (m.support.empty()) throw ConfigError("inverse-weighted GPU support is empty");
                   for (int g : m.support)
                     if (g < 1) throw ConfigError("inverse-weighted GPU support entries must be >= 1");
                 },
             },
             mode);
}

void validate_util_mode(const UtilMode& mode) {
  std::visit(Overloaded{
                 [](const FixedUtil& m) {
                   if (!(m.value >= kMinUtil && m.value <= kMaxUtil))
                     throw ConfigError("fixed utilization must lie in [0.05, 1.0]");
                 },
                 [](const TruncatedNormalUtil& m) {
                   if (!std::isfinite(m.mean)) throw ConfigError("utilization mean must be finite");
                   if (!(m.sd >= 0.0) || !std::isfinite(m.sd))
                     throw ConfigError("utilization sd must be >= 0");
                 },
             },
             mode);
}

double normal_draw(Rng& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

InverseWeightedGpus inverse_weighted_range(int max_gpus) {
  InverseWeightedGpus mode;
  for (int g = 1; g <= max_gpus; ++g) mode.support.push_back(g);
  return mode;
}

void WorkloadSpec::validate() const {
  if (num_jobs < 0) throw ConfigError("num_jobs must be >= 0");
  if (arrival_span < 1) throw ConfigError("arrival_span must be >= 1");
  if (!std::isfinite(duration_mean)) throw ConfigError("duration_mean must be finite");
  if (!(duration_sd >= 0.0) || !std::isfinite(duration_sd))
    throw ConfigError("duration_sd must be >= 0");
  if (duration_max < 1) throw ConfigError("duration_max must be >= 1");
  if (!(early_term_fraction >= 0.0 && early_term_fraction <= 1.0))
    throw ConfigError("early_term_fraction must lie in [0, 1]");
  if (gpus_per_node < 1) throw ConfigError("gpus_per_node must be >= 1");
  if (duration_max < 2 && std::lround(early_term_fraction * num_jobs) > 0)
    throw ConfigError("early-terminating jobs need duration_max >= 2");
  validate_util_mode(util);
  validate_gpu_mode(gpus);
}

int derive_nodes(int gpus, int gpus_per_node) {
  return (gpus + gpus_per_node - 1) / gpus_per_node;
}

int sample_gpu_count(const GpuMode& mode, Rng& rng) {
  validate_gpu_mode(mode);
  return std::visit(
      Overloaded{
          [](const FixedGpus& m) { return m.count; },
          [&rng](const PoissonGpus& m) {
            return std::max(1, std::poisson_distribution<int>(m.mean)(rng));
          },
          [&rng](const InverseWeightedGpus& m) {
            std::vector<double> weights;
            weights.reserve(m.support.size());
            for (int g : m.support) weights.push_back(1.0 / g);
            std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
            return m.support[pick(rng)];
          },
      },
      mode);
}

double sample_util(const UtilMode& mode, Rng& rng) {
  return std::visit(Overloaded{
                        [](const FixedUtil& m) { return m.value; },
                        [&rng](const TruncatedNormalUtil& m) {
                          return std::clamp(normal_draw(rng, m.mean, m.sd), kMinUtil, kMaxUtil);
                        },
                    },
                    mode);
}

std::vector<Job> generate_workload(const WorkloadSpec& spec) {
  spec.validate();
  // One stream per attribute, so variants that change only the GPU or
  // utilisation law keep the same arrivals, durations and early exits.
  auto stream = [&](std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), id};
    return Rng(seq);
  };
  Rng rng = stream(0);
  Rng gpu_rng = stream(1);
  Rng util_rng = stream(2);
  Rng exit_rng = stream(3);
  const auto n = static_cast<std::size_t>(spec.num_jobs);

  // The inverse-weighted table is built once; sample_gpu_count rebuilds it per call.
  std::vector<double> inv_weights;
  if (const auto* inv = std::get_if<InverseWeightedGpus>(&spec.gpus))
    for (int g : inv->support) inv_weights.push_back(1.0 / g);
  std::discrete_distribution<std::size_t> inv_pick(inv_weights.begin(), inv_weights.end());

  std::vector<Job> jobs(n);
  std::uniform_int_distribution<int> arrival(0, spec.arrival_span - 1);
  for (auto& job : jobs) {
    job.arrival = arrival(rng);
    const double raw = std::round(normal_draw(rng, spec.duration_mean, spec.duration_sd));
    job.dur_est = static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(spec.duration_max)));
    job.dur_act = job.dur_est;
    if (const auto* inv = std::get_if<InverseWeightedGpus>(&spec.gpus))
      job.gpus = inv->support[inv_pick(gpu_rng)];
    else
      job.gpus = sample_gpu_count(spec.gpus, gpu_rng);
    job.nodes = derive_nodes(job.gpus, spec.gpus_per_node);
    job.util = sample_util(spec.util, util_rng);
  }

  // Exactly round(fraction * n) jobs end early. A one-hour estimate cannot
  // shrink, so such a job is stretched to two hours before being cut.
  const auto early = static_cast<std::size_t>(std::lround(spec.early_term_fraction * spec.num_jobs));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), exit_rng);
  std::uniform_real_distribution<double> shrink(0.3, 0.9);
  for (std::size_t k = 0; k < early; ++k) {
    Job& job = jobs[order[k]];
    job.dur_est = std::max(job.dur_est, 2);
    const auto cut = static_cast<int>(std::lround(shrink(exit_rng) * job.dur_est));
    job.dur_act = std::clamp(cut, 1, job.dur_est - 1);
  }

  std::vector<std::size_t> by_arrival(n);
  std::iota(by_arrival.begin(), by_arrival.end(), 0);
  std::stable_sort(by_arrival.begin(), by_arrival.end(),
                   [&](std::size_t a, std::size_t b) { return jobs[a].arrival < jobs[b].arrival; });
  std::vector<Job> sorted;
  sorted.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted.push_back(jobs[by_arrival[i]]);
    sorted.back().id = static_cast<int>(i);
  }
  return sorted;
}

void write_jobs_csv(std::ostream& out, const std::vector<Job>& jobs) {
  out << "id,arrival_h,dur_est_h,dur_act_h,gpus,nodes,util\n";
  char buf[160];
  for (const auto& j : jobs) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d,%.4f\n", j.id, j.arrival, j.dur_est,
                  j.dur_act, j.gpus, j.nodes, j.util);
    out << buf;
  }
}

std::vector<Job> read_jobs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,arrival_h,dur_est_h,dur_act_h,gpus,nodes,util")
    throw IoError("jobs.csv: unexpected header");
  std::vector<Job> jobs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    Job j;
    char c[6];
    if (!(row >> j.id >> c[0] >> j.arrival >> c[1] >> j.dur_est >> c[2] >> j.dur_act >> c[3] >>
          j.gpus >> c[4] >> j.nodes >> c[5] >> j.util))
      throw IoError("jobs.csv: malformed row at line " + std::to_string(lineno));
    jobs.push_back(j);
  }
  return jobs;
}

std::string describe(const UtilMode& mode) {
  char buf[64];
  std::visit(Overloaded{
                 [&](const FixedUtil& m) { std::snprintf(buf, sizeof buf, "fixed:%g", m.value); },
                 [&](const TruncatedNormalUtil& m) {
                   std::snprintf(buf, sizeof buf, "normal:%g,%g", m.mean, m.sd);
                 },
             },
             mode);
  return buf;
}

std::string describe(const GpuMode& mode) {
  return std::visit(Overloaded{
                        [](const FixedGpus& m) { return "fixed:" + std::to_string(m.count); },
                        [](const PoissonGpus& m) {
                          char buf[48];
                          std::snprintf(buf, sizeof buf, "poisson:%g", m.mean);
                          return std::string(buf);
                        },
                        [](const InverseWeightedGpus& m) {
                          const auto& s = m.support;
                          bool is_range = !s.empty() && s.front() == 1;
                          for (std::size_t i = 0; is_range && i < s.size(); ++i)
                            is_range = s[i] == static_cast<int>(i) + 1;
                          if (is_range && s.size() > 1) return "inverse:1-" + std::to_string(s.back());
                          std::string out = "inverse:";
                          for (std::size_t i = 0; i < s.size(); ++i)
                            out += (i ? "," : "") + std::to_string(s[i]);
                          return out;
                        },
                    },
                    mode);
}

}  // namespace dcflex
