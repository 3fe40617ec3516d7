#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

// GGM tree of 128-bit seeds with weak private puncturing and constrained
// resampling.
//
// Conventions fixed here and relied on everywhere else:
//   - The PRG is SHA-256 of the 16 seed bytes; left child = digest[0..15],
//     right child = digest[16..31].
//   - Paths and chunk ids are big-endian bit strings: bit 0 is the branch
//     taken at the root, 0 = left, 1 = right.
//   - A leaf seed reduces to an offset in [0, 2^t) by reading its final
//     8 bytes as a big-endian integer and keeping the low t bits.
//   - A key punctured at chunk x consists of the t off-path subkeys,
//     shallowest level first; the level-i subkey hangs at x_{i-1} || ~x_i.

namespace pir::ggm {

inline constexpr std::size_t kSeedBytes = 16;  // lambda = 128

struct Seed {
  std::array<std::uint8_t, kSeedBytes> bytes{};

  friend bool operator==(const Seed&, const Seed&) = default;
};

// Root-to-node path, at most 32 bits. bit(0) is the first branch from the
// root; value holds the bits with bit(0) most significant.
struct TreePath {
  std::uint32_t len = 0;
  std::uint32_t value = 0;

  static TreePath for_chunk(std::uint32_t chunk, std::uint32_t t) {
    return TreePath{t, chunk};
  }

  bool bit(std::uint32_t i) const { return (value >> (len - 1 - i)) & 1u; }
  TreePath prefix(std::uint32_t i) const {
    return i == 0 ? TreePath{} : TreePath{i, value >> (len - i)};
  }
  TreePath suffix_after(std::uint32_t i) const {
    return i == len ? TreePath{} : TreePath{len - i, value & ((1u << (len - i)) - 1u)};
  }
  TreePath appended(bool b) const {
    return TreePath{len + 1, (value << 1) | (b ? 1u : 0u)};
  }
  bool is_prefix_of(const TreePath& other) const {
    return len <= other.len && other.value >> (other.len - len) == value;
  }

  friend bool operator==(const TreePath&, const TreePath&) = default;
};

// Off-path subkeys ordered from the shallowest level to the deepest;
// subkeys[i] sits at depth i+1.
struct PuncturedKey {
  std::vector<Seed> subkeys;

  std::uint32_t levels() const { return static_cast<std::uint32_t>(subkeys.size()); }

  friend bool operator==(const PuncturedKey&, const PuncturedKey&) = default;
};

struct LeafEntry {
  std::uint32_t chunk = 0;
  std::uint32_t offset = 0;

  friend bool operator==(const LeafEntry&, const LeafEntry&) = default;
};

enum class Sign : std::uint8_t { positive, negative };

struct IndexConstraint {
  Sign sign = Sign::positive;
  std::uint32_t chunk = 0;
  std::uint32_t offset = 0;
};

// Resampling ran out of attempts: the constraint set is statistically
// impossible or the cap was too small.
class AttemptsExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source of fresh uniform seeds for resampling; deterministic streams make
// runs replayable.
class SeedSource {
 public:
  virtual ~SeedSource() = default;
  virtual Seed next_seed() = 0;
};

// left = G0(seed), right = G1(seed): the two halves of SHA-256(seed).
void prg_expand(const Seed& seed, Seed& left, Seed& right);
std::pair<Seed, Seed> prg_expand(const Seed& seed);

// Applies the PRG along `path`, consuming bits from the root down.
// eval_path(s, empty) = s.
Seed eval_path(const Seed& seed, TreePath path);

// Final 8 bytes big-endian, low t bits.
std::uint32_t leaf_offset(const Seed& leaf, std::uint32_t t);

// All 2^depth leaf seeds below `root`, in path order.
std::vector<Seed> expand_leaf_seeds(const Seed& root, std::uint32_t depth);

// Leaf offsets below `root` at tree parameter t (offsets mod 2^t).
std::vector<std::uint32_t> expand_leaf_offsets(const Seed& root, std::uint32_t depth,
                                               std::uint32_t t);

// One (chunk, offset) entry per chunk in [0, 2^t).
std::vector<LeafEntry> tree_leaves(const Seed& k, std::uint32_t t);

// Leaves handled by a subkey hanging at `prefix` inside a depth-t tree.
// When prefix is a full path the subkey itself is the leaf.
std::vector<LeafEntry> subtree_leaves(const Seed& sk, TreePath prefix, std::uint32_t t);

// Placement of the level-`level` subkey (1-based) of a key punctured or
// guessed at `chunk`: the first level-1 bits of chunk followed by the
// flipped level-th bit.
TreePath placement_prefix(TreePath chunk, std::uint32_t level);

PuncturedKey puncture(const Seed& k, TreePath x_chunk);

// Rebuilds every leaf except the one at guess_chunk, assuming the key was
// punctured there. Entries come back in ascending chunk order. Correct
// only when the guess matches the true punctured chunk.
std::vector<LeafEntry> peval_leaves(const PuncturedKey& pk, TreePath guess_chunk,
                                    std::uint32_t t);

std::size_t default_resample_attempts(std::uint32_t t, std::size_t negative_count);

// Replaces the one subkey whose placement covers the positive constraint's
// chunk by a fresh seed whose subtree pins that chunk's offset to the
// constraint and avoids every negative constraint falling in the same
// subtree. All other subkeys are returned byte-identical.
PuncturedKey resample(const PuncturedKey& pk, TreePath x_chunk,
                      const IndexConstraint& positive,
                      std::span<const IndexConstraint> negatives, std::uint32_t t,
                      SeedSource& fresh, std::size_t max_attempts);

PuncturedKey resample(const PuncturedKey& pk, TreePath x_chunk,
                      const IndexConstraint& positive,
                      std::span<const IndexConstraint> negatives, std::uint32_t t,
                      SeedSource& fresh);

}  // namespace pir::ggm
