#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace vtg {

// 64-bit FNV-1a. Stable across platforms; used for record ids and cache keys.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  // Field separator so ("ab","c") and ("a","bc") hash differently.
  Fnv1a64& field(std::string_view bytes) noexcept {
    update(bytes);
    const char sep = '\x1f';
    return update(std::string_view(&sep, 1));
  }

  std::uint64_t digest() const noexcept { return state_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(std::string_view bytes) { return Fnv1a64{}.update(bytes).hex(); }

}  // namespace vtg
