#include "gomsp/rng.hpp"

namespace gomsp {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t RngStreams::derive_seed(std::string_view stream, std::uint64_t index,
                                      std::uint64_t slot) const {
  std::uint64_t h = splitmix64(master_seed_);
  h = splitmix64(h ^ fnv1a(stream));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ slot);
  return h;
}

std::mt19937_64 RngStreams::generator(std::string_view stream, std::uint64_t index,
                                      std::uint64_t slot) const {
  return std::mt19937_64(derive_seed(stream, index, slot));
}

}  // namespace gomsp
