#include "prefext/rng.hpp"

namespace prefext {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

Stream Stream::derive(std::uint64_t master_seed, std::uint64_t index) {
  // Two splitmix rounds decorrelate neighbouring (seed, index) pairs before
  // they reach the xoshiro state expansion.
  std::uint64_t sm = master_seed;
  std::uint64_t mixed = splitmix64(sm);
  sm = mixed ^ (index * 0xd1b54a32d192ed03ULL);
  mixed = splitmix64(sm);
  return Stream(mixed);
}

}  // namespace prefext
