#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace annoserve {

/// mt19937_64 has a standard-mandated sequence; the helpers below avoid the
/// implementation-defined std distributions so seeded output is identical on
/// every toolchain.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n), n > 0, by rejection sampling.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound) - 1;  // reject above
  std::uint64_t draw = rng();
  while (draw > limit) draw = rng();
  return static_cast<std::size_t>(draw % bound);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// First `k` entries of a seeded Fisher-Yates shuffle of [0, n): a uniform
/// k-subset in uniform random order.
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

template <typename T>
void shuffle_in_place(Rng& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

/// Round half away from zero, for count = round(rate * n) rules.
inline std::size_t round_count(double rate, std::size_t n) {
  const double v = rate * static_cast<double>(n);
  return static_cast<std::size_t>(v + 0.5 + 1e-9);
}

}  // namespace annoserve
