#include "dcflex/schedule.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dcflex {

void ScheduleState::start(std::size_t j, int t, int duration) {
  auto& s = slots_.at(j);
  if (s.scheduled) throw std::logic_error("job " + std::to_string(j) + " is already scheduled");
  if (s.rejected) throw std::logic_error("job " + std::to_string(j) + " was rejected");
  s.scheduled = true;
  s.start = t;
  s.end = t + duration;
}

void ScheduleState::reject(std::size_t j) {
  auto& s = slots_.at(j);
  if (s.scheduled) throw std::logic_error("cannot reject scheduled job " + std::to_string(j));
  s.rejected = true;
}

void ScheduleState::unschedule(std::size_t j) {
  auto& s = slots_.at(j);
  s.scheduled = false;
  s.start.reset();
  s.end.reset();
}

void ScheduleState::set_end(std::size_t j, int end) {
  auto& s = slots_.at(j);
  if (!s.scheduled) throw std::logic_error("job " + std::to_string(j) + " has no start");
  s.end = end;
}

std::size_t ScheduleState::num_scheduled() const {
  return static_cast<std::size_t>(
      std::count_if(slots_.begin(), slots_.end(), [](const JobSlot& s) { return s.scheduled; }));
}

}  // namespace dcflex
