#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace dcflex {

struct JobSlot {
  bool scheduled = false;
  std::optional<int> start;
  std::optional<int> end;  // exclusive
  bool rejected = false;   // can never run (needs more nodes than exist)

  bool operator==(const JobSlot&) const = default;
};

// Scheduling status of every job, indexed by the job's position in the job
// list handed to the scheduler.
class ScheduleState {
 public:
  ScheduleState() = default;
  explicit ScheduleState(std::size_t num_jobs) : slots_(num_jobs) {}

  std::size_t size() const { return slots_.size(); }
  const JobSlot& operator[](std::size_t j) const { return slots_.at(j); }

  // Throws std::logic_error if j is already scheduled or rejected.
  void start(std::size_t j, int t, int duration);
  void reject(std::size_t j);
  void unschedule(std::size_t j);
  void set_end(std::size_t j, int end);

  std::size_t num_scheduled() const;

  bool operator==(const ScheduleState&) const = default;

 private:
  std::vector<JobSlot> slots_;
};

}  // namespace dcflex
