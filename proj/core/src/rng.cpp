#include "nsc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nsc {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("rng: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

std::size_t Rng::categorical(std::span<const double> cumulative) {
  if (cumulative.empty()) throw std::invalid_argument("rng: empty categorical table");
  const double u = uniform() * cumulative.back();
  for (std::size_t a = 0; a < cumulative.size(); ++a) {
    if (u < cumulative[a]) return a;
  }
  return cumulative.size() - 1;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  return splitmix64(splitmix64(base) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

}  // namespace nsc
