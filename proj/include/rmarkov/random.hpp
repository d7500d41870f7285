#pragma once

#include <cstdint>

namespace rmarkov {

/// Counter-based, splittable random stream.
///
/// A stream is identified by (master_seed, stream_index). Its 64-bit key is
///
///   key = mix13(fmix64(master_seed) + golden * (stream_index + 1))
///
/// where fmix64 is the MurmurHash3 finalizer and mix13 is Stafford's
/// variant 13 (the SplitMix64 output function). Both mixers are bijections on
/// 64-bit words and golden = 0x9e3779b97f4a7c15 is odd, so distinct indices
/// under one master seed always get distinct keys. Draw k of the stream is
/// mix13(key + golden * (k + 1)), i.e. SplitMix64 run in counter mode: the
/// value depends only on (key, k), never on what other streams did.
class SeededStream {
 public:
  SeededStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent child stream keyed off this stream's key.
  SeededStream substream(std::uint64_t index) const { return SeededStream(key_, index); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform();
  /// Uniform on (0, 1); exact zeros are rejected and redrawn.
  double next_open_uniform();
  /// Standard normal via Box-Muller (consumes two draws).
  double next_gaussian();

  static std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t stream_index);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t fmix64(std::uint64_t x);
std::uint64_t mix13(std::uint64_t x);

}  // namespace rmarkov
