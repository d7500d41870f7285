#include "rmarkov/random.hpp"

#include <cmath>
#include <numbers>

namespace rmarkov {
namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t mix13(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SeededStream::derive_key(std::uint64_t master_seed, std::uint64_t stream_index) {
  return mix13(fmix64(master_seed) + kGolden * (stream_index + 1));
}

SeededStream::SeededStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      key_(derive_key(master_seed, stream_index)) {}

std::uint64_t SeededStream::next_u64() {
  ++counter_;
  return mix13(key_ + kGolden * counter_);
}

double SeededStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1p-53;
}

double SeededStream::next_open_uniform() {
  double u = next_uniform();
  while (u == 0.0) u = next_uniform();
  return u;
}

double SeededStream::next_gaussian() {
  const double u1 = next_open_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rmarkov
