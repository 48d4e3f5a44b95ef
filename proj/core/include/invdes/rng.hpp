#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace invdes {

// Deterministic seed-derived random stream. All randomness in the project
// flows from one root seed through named sub-streams, so thread count and
// evaluation order never change results: sub-streams are derived from the
// parent's seed, not from its draw position.
class RngStream {
 public:
  static RngStream root(std::uint64_t seed);
  RngStream sub(std::string_view name, std::uint64_t index = 0) const;

  double uniform();                      // [0,1)
  double uniform(double lo, double hi);  // [lo,hi)
  double normal();                       // standard normal
  std::uint64_t integer(std::uint64_t n);  // [0,n)
  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return eng_; }

 private:
  explicit RngStream(std::uint64_t seed);
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t x);
std::uint64_t hash_str(std::string_view s);

}  // namespace invdes
