#include "slatesim/rng.hpp"

#include <cmath>
#include <numbers>

namespace slatesim {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

__extension__ using Uint128 = unsigned __int128;

std::uint64_t RngStream::below(std::uint64_t n) {
  // Lemire's nearly-divisionless method.
  Uint128 m = static_cast<Uint128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<Uint128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(mix64(mix64(key_ ^ 0x5851F42D4C957F2DULL) + mix64(index + kGoldenGamma)));
}

RngStream RngStream::split(std::string_view label, std::uint64_t index) const {
  return RngStream(mix64(key_ + mix64(stable_hash(label)))).split(index);
}

RngStream derive_stream(std::uint64_t master_seed, std::string_view label,
                        std::uint64_t index) {
  return RngStream(mix64(master_seed)).split(label, index);
}

}  // namespace slatesim
