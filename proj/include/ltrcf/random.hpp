#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ltrcf {

using rng_engine = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives a child seed from a parent seed, a path name and a counter.
/// Every random stream in the library hangs off one root seed this way, so
/// results never depend on the order in which work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view name,
                                    std::uint64_t index = 0) {
  return detail::splitmix64(detail::splitmix64(parent ^ detail::fnv1a(name)) + index);
}

inline rng_engine make_rng(std::uint64_t parent, std::string_view name, std::uint64_t index = 0) {
  return rng_engine(derive_seed(parent, name, index));
}

/// Uniform integer in [0, n). Uses a fixed rejection scheme so the sequence is
/// identical across standard library implementations.
inline std::uint64_t uniform_index(rng_engine& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

/// Uniform real in the open interval (0, 1).
inline double uniform_open(rng_engine& rng) {
  // 53 random bits, shifted by half an ulp so neither endpoint is reachable.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Draws k distinct values from [0, n) in draw order.
inline std::vector<int> sample_without_replacement(rng_engine& rng, int n, int k) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

template <class T>
void shuffle(std::vector<T>& v, rng_engine& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace ltrcf
