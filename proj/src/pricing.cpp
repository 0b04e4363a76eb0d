#include "dcflex/pricing.hpp"

#include <cmath>
#include <string>

#include "dcflex/errors.hpp"

namespace dcflex {

PriceSignal::PriceSignal(std::vector<double> prices) : prices_(std::move(prices)) {
  for (double p : prices_)
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("prices must be positive and finite");
}

PriceSignal PriceSignal::flat(double base, int horizon) {
  if (!(base > 0.0)) throw ConfigError("price_base must be > 0");
  if (horizon < 1) throw ConfigError("price horizon must be >= 1");
  return PriceSignal(std::vector<double>(static_cast<std::size_t>(horizon), base));
}

PriceSignal PriceSignal::with_peak(int start, int duration, double multiplier) const {
  if (!(multiplier > 0.0)) throw ConfigError("peak multiplier must be > 0");
  if (start < 0 || duration < 0 || start + duration > horizon())
    throw ConfigError("peak window [" + std::to_string(start) + ", " +
                      std::to_string(start + duration) + ") exceeds the " +
                      std::to_string(horizon()) + " h price horizon");
  std::vector<double> out = prices_;
  for (int t = start; t < start + duration; ++t) out[static_cast<std::size_t>(t)] *= multiplier;
  return PriceSignal(std::move(out));
}

}  // namespace dcflex
