#include "contagion/rng.hpp"

namespace contagion {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the stream name.
std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream,
                          std::uint64_t index) {
  std::uint64_t s = splitmix64(parent);
  s = splitmix64(s ^ hash_name(stream));
  return splitmix64(s ^ (index * 0xd6e8feb86659fd93ULL));
}

}  // namespace contagion
