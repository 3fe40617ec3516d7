#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "pir/ggm.hpp"

namespace pir {

// Deterministic randomness for the client and the harness. mt19937_64 output
// is pinned by the standard, and bounded draws go through an explicit
// rejection loop, so a (seed, call sequence) pair replays identically on any
// platform. std::uniform_int_distribution is avoided for that reason.
class Rng : public ggm::SeedSource {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased draw from [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % bound;
  }

  ggm::Seed next_seed() override {
    ggm::Seed s;
    fill(s.bytes);
    return s;
  }

  void fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t v = gen_();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(v >> (56 - 8 * b));
      }
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pir
