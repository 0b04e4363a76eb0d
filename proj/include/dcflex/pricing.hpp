#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dcflex {

// Electricity price per hourly timestep, $/kWh. Immutable once built.
class PriceSignal {
 public:
  PriceSignal() = default;
  explicit PriceSignal(std::vector<double> prices);

  static PriceSignal flat(double base, int horizon);

  // Copy with entries in [start, start + duration) scaled by `multiplier`.
  PriceSignal with_peak(int start, int duration, double multiplier) const;

  std::size_t size() const { return prices_.size(); }
  int horizon() const { return static_cast<int>(prices_.size()); }
  double operator[](std::size_t t) const { return prices_[t]; }
  std::span<const double> values() const { return prices_; }

  bool operator==(const PriceSignal&) const = default;

 private:
  std::vector<double> prices_;
};

struct PeakEvent {
  int start = 60;
  int duration = 1;
  double multiplier = 3.0;
};

}  // namespace dcflex
