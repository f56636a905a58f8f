#include "spdebridge/rng.hpp"

#include <cmath>

namespace spdebridge {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double u64_to_unit(std::uint64_t bits) {
  // Top 53 bits -> [0, 1) on the double grid.
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
  std::uint32_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, x0, hi0, lo0);
    mulhilo(kPhiloxM1, x2, hi1, lo1);
    const std::uint32_t y0 = hi1 ^ x1 ^ k0;
    const std::uint32_t y1 = lo1;
    const std::uint32_t y2 = hi0 ^ x3 ^ k1;
    const std::uint32_t y3 = lo0;
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
  }
  return {x0, x1, x2, x3};
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t chain, StreamRole role,
                            std::uint64_t iteration, std::uint64_t member) {
  std::uint64_t s = mix64(chain);
  s = mix64(s ^ static_cast<std::uint64_t>(role));
  s = mix64(s ^ iteration);
  s = mix64(s ^ member);
  return s;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

double RngStream::uniform(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  const auto block = philox4x32(counter, key_);
  return u64_to_unit((static_cast<std::uint64_t>(block[0]) << 32) | block[1]);
}

double RngStream::normal(std::uint64_t index) const {
  // Indices 2i and 2i+1 come from the Box-Muller pair of block i.
  const std::uint64_t block_index = index >> 1;
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
      static_cast<std::uint32_t>(block_index),
      static_cast<std::uint32_t>((block_index >> 32) | 0x80000000ull)};
  const auto block = philox4x32(counter, key_);
  const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
  // (0, 1] for the log argument.
  const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
  const double u2 = u64_to_unit(b);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  return (index & 1) == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
}

void RngStream::fill_normal(std::span<double> out, std::uint64_t base_index) const {
  std::uint64_t index = base_index;
  std::size_t i = 0;
  // Unpaired leading element when base_index is odd.
  if ((index & 1) != 0 && i < out.size()) {
    out[i++] = normal(index++);
  }
  for (; i + 1 < out.size(); i += 2, index += 2) {
    const std::uint64_t block_index = index >> 1;
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
        static_cast<std::uint32_t>(block_index),
        static_cast<std::uint32_t>((block_index >> 32) | 0x80000000ull)};
    const auto block = philox4x32(counter, key_);
    const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
    const double u2 = u64_to_unit(b);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    out[i] = radius * std::cos(angle);
    out[i + 1] = radius * std::sin(angle);
  }
  if (i < out.size()) {
    out[i] = normal(index);
  }
}

Eigen::VectorXd RngStream::normal_vector(Eigen::Index n, std::uint64_t base_index) const {
  Eigen::VectorXd v(n);
  fill_normal(std::span<double>(v.data(), static_cast<std::size_t>(n)), base_index);
  return v;
}

}  // namespace spdebridge
