#ifndef ADVFORGE_RNG_H_
#define ADVFORGE_RNG_H_

#include <cstdint>
#include <string_view>

namespace advforge {

// SplitMix64 (Steele, Lea, Flood). Small, seedable from any 64-bit value and
// identical on every platform, which keeps perturbations reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform-ish index in [0, bound) by modulo reduction; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// FNV-1a, used to derive per-sample seeds from ids.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace advforge

#endif  // ADVFORGE_RNG_H_
