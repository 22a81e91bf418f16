#include "firewatch/rng.hpp"

namespace firewatch {

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t trial,
                          std::string_view stream) {
  // FNV-1a over the stream name, then three mixing rounds.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base_seed ^ splitmix64(trial ^ splitmix64(h)));
}

}  // namespace firewatch
