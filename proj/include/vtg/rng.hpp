#pragma once

// Counter-based, splittable random source. Output i of a stream is a pure
// function of (key, i), so independent streams never share state and results
// do not depend on thread scheduling.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "vtg/hash.hpp"

namespace vtg {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit CounterRng(std::uint64_t key) noexcept : key_(mix64(key)) {}

  // Derives an independent child stream; the parent is left untouched.
  CounterRng split(std::string_view tag) const noexcept {
    return CounterRng(key_ ^ mix64(Fnv1a64{}.update(tag).digest()));
  }
  CounterRng split(std::uint64_t tag) const noexcept { return CounterRng(key_ ^ mix64(tag + kGamma)); }

  std::uint64_t operator()() noexcept { return mix64(key_ + kGamma * ++counter_); }

  // Unbiased integer in [0, bound) via multiply-shift with rejection (Lemire).
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

template <class T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    using std::swap;
    swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace vtg
