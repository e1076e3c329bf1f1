#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mspec {

// Counter-based pseudo-random generator (Philox 4x32, 10 rounds).
//
// Every draw is a pure function of (seed, stream, index, subcounter), so
// samples can be generated lazily, in any order, and from any thread, and the
// result never depends on how much of the sequence was consumed elsewhere.
// This is what makes spectra reproducible: r(n) is addressed by n directly.
class CounterRng {
 public:
  // Independent purposes get distinct streams so their draws never collide.
  enum Stream : std::uint32_t {
    kPerturbation = 0,  // base offsets r(n)
    kPlantJitter = 1,   // jitter added to planted witness offsets
    kTrial = 2,         // Monte Carlo trial draws
    kAux = 3,
  };

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // One 64-bit word from the block addressed by (stream, index, subcounter).
  std::uint64_t raw(Stream stream, std::uint64_t index,
                    std::uint32_t subcounter) const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        subcounter,
        static_cast<std::uint32_t>(stream),
    };
    std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32),
    };
    const std::array<std::uint32_t, 4> out = block(key, ctr);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  }

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform01(Stream stream, std::uint64_t index,
                   std::uint32_t subcounter) const {
    return static_cast<double>(raw(stream, index, subcounter) >> 11) *
           0x1.0p-53;
  }

  // Uniform draw in the open interval (-half_width, half_width).
  // Rejects the endpoint values so strict inequalities are guaranteed; the
  // rejection loop advances the subcounter within the same (stream, index)
  // address, preserving order independence.
  double symmetric(Stream stream, std::uint64_t index, double half_width,
                   std::uint32_t subcounter_base = 0) const {
    if (!(half_width > 0.0)) {
      throw std::invalid_argument("symmetric draw needs half_width > 0");
    }
    for (std::uint32_t attempt = 0; attempt < 256; ++attempt) {
      const double u = uniform01(stream, index, subcounter_base + attempt);
      const double r = half_width * (2.0 * u - 1.0);
      if (std::fabs(r) < half_width) return r;
    }
    throw std::runtime_error("symmetric draw failed to accept in 256 tries");
  }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 2> key,
                                            std::array<std::uint32_t, 4> ctr) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(ctr[0]);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(ctr[2]);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2511F53ull;
  static constexpr std::uint64_t kMul1 = 0xCD9E8D57ull;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint64_t seed_;
};

}  // namespace mspec
