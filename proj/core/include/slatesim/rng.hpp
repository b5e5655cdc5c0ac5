#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace slatesim {

// Counter-based random stream. Draw i is the SplitMix64 finalizer applied to
// key + i * golden_gamma, so a stream is fully described by (key, position)
// and child streams can be derived without touching the parent's state.
//
// Satisfies UniformRandomBitGenerator, so it plugs into <random>
// distributions. A stream must not be shared between threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() = default;
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller (one draw discarded, keeps the stream simple).
  double normal();

  // Independent child stream; does not advance this stream.
  RngStream split(std::uint64_t index) const;
  RngStream split(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Stream identified by (master_seed, label, index). Distinct labels or
// indices give unrelated streams; identical inputs give identical streams.
RngStream derive_stream(std::uint64_t master_seed, std::string_view label,
                        std::uint64_t index);

}  // namespace slatesim
