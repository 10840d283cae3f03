#include "ajcir/rng.hpp"

#include <cmath>
#include <random>

namespace ajcir {

double RngStream::exponential() noexcept { return -std::log(uniform()); }

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(*this);
}

}  // namespace ajcir
