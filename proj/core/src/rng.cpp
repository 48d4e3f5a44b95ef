#include "invdes/rng.hpp"

namespace invdes {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t x) {
  return splitmix64(h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t hash_str(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

RngStream RngStream::root(std::uint64_t seed) { return RngStream(seed); }

RngStream RngStream::sub(std::string_view name, std::uint64_t index) const {
  return RngStream(hash_combine(hash_combine(seed_, hash_str(name)), index));
}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
}

double RngStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(eng_);
}

double RngStream::normal() {
  return std::normal_distribution<double>(0.0, 1.0)(eng_);
}

std::uint64_t RngStream::integer(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
}

}  // namespace invdes
