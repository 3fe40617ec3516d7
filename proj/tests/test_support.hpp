#pragma once

// Independent reference implementations the library is checked against.
// Nothing here may call into pir:: code paths under test; the SHA-256 below
// is written directly from the FIPS 180-4 description so PRG outputs are
// verified through a second route.

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "pir/ggm.hpp"

namespace ref {

inline std::uint32_t rotr(std::uint32_t x, int k) { return (x >> k) | (x << (32 - k)); }

inline std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> msg) {
  static constexpr std::uint32_t kRound[64] = {
      0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
      0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
      0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
      0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
      0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
      0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
      0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
      0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
      0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
      0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
      0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
  std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

  std::vector<std::uint8_t> padded(msg.begin(), msg.end());
  padded.push_back(0x80);
  while (padded.size() % 64 != 56) padded.push_back(0x00);
  const std::uint64_t bit_len = std::uint64_t{msg.size()} * 8;
  for (int i = 7; i >= 0; --i) padded.push_back(static_cast<std::uint8_t>(bit_len >> (8 * i)));

  for (std::size_t block = 0; block < padded.size(); block += 64) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = std::uint32_t{padded[block + 4 * i]} << 24 |
             std::uint32_t{padded[block + 4 * i + 1]} << 16 |
             std::uint32_t{padded[block + 4 * i + 2]} << 8 |
             std::uint32_t{padded[block + 4 * i + 3]};
    }
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t temp1 = hh + s1 + ch + kRound[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t temp2 = s0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + temp1;
      d = c;
      c = b;
      b = a;
      a = temp1 + temp2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  std::array<std::uint8_t, 32> digest;
  for (int i = 0; i < 8; ++i) {
    digest[4 * i] = static_cast<std::uint8_t>(h[i] >> 24);
    digest[4 * i + 1] = static_cast<std::uint8_t>(h[i] >> 16);
    digest[4 * i + 2] = static_cast<std::uint8_t>(h[i] >> 8);
    digest[4 * i + 3] = static_cast<std::uint8_t>(h[i]);
  }
  return digest;
}

inline std::pair<pir::ggm::Seed, pir::ggm::Seed> prg(const pir::ggm::Seed& seed) {
  const std::array<std::uint8_t, 32> digest = sha256(seed.bytes);
  std::pair<pir::ggm::Seed, pir::ggm::Seed> out;
  std::memcpy(out.first.bytes.data(), digest.data(), 16);
  std::memcpy(out.second.bytes.data(), digest.data() + 16, 16);
  return out;
}

// bits given most-significant-first as 0/1 characters, e.g. "110".
inline pir::ggm::Seed eval(const pir::ggm::Seed& seed, const char* bits) {
  pir::ggm::Seed cur = seed;
  for (const char* p = bits; *p != '\0'; ++p) {
    const auto [left, right] = prg(cur);
    cur = (*p == '1') ? right : left;
  }
  return cur;
}

inline std::uint32_t offset_of(const pir::ggm::Seed& leaf, std::uint32_t t) {
  std::uint64_t v = 0;
  for (std::size_t i = 8; i < 16; ++i) v = (v << 8) | leaf.bytes[i];
  return static_cast<std::uint32_t>(v & ((std::uint64_t{1} << t) - 1));
}

inline pir::ggm::Seed seed_from(std::uint64_t pattern) {
  pir::ggm::Seed s;
  for (int i = 0; i < 8; ++i) {
    s.bytes[i] = static_cast<std::uint8_t>(pattern >> (56 - 8 * i));
    s.bytes[8 + i] = static_cast<std::uint8_t>(~pattern >> (56 - 8 * i));
  }
  return s;
}

// Hands out scripted seeds first, then falls back to a deterministic
// stream; used to force specific resample candidates.
class ScriptedSeeds : public pir::ggm::SeedSource {
 public:
  ScriptedSeeds(std::vector<pir::ggm::Seed> scripted, std::uint64_t fallback_seed)
      : scripted_(std::move(scripted)), fallback_(fallback_seed) {}

  pir::ggm::Seed next_seed() override {
    if (cursor_ < scripted_.size()) return scripted_[cursor_++];
    pir::ggm::Seed s;
    for (std::size_t i = 0; i < s.bytes.size(); ++i) {
      fallback_ = fallback_ * 6364136223846793005ull + 1442695040888963407ull;
      s.bytes[i] = static_cast<std::uint8_t>(fallback_ >> 33);
    }
    return s;
  }

  std::size_t scripted_used() const { return cursor_; }

 private:
  std::vector<pir::ggm::Seed> scripted_;
  std::size_t cursor_ = 0;
  std::uint64_t fallback_;
};

}  // namespace ref
