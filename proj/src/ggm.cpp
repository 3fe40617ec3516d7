#include "pir/ggm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <string>

namespace pir::ggm {

namespace {

EVP_MD_CTX* sha_ctx() {
  thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  return ctx;
}

}  // namespace

void prg_expand(const Seed& seed, Seed& left, Seed& right) {
  unsigned char digest[32];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = sha_ctx();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, seed.bytes.data(), seed.bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  std::memcpy(left.bytes.data(), digest, kSeedBytes);
  std::memcpy(right.bytes.data(), digest + kSeedBytes, kSeedBytes);
}

std::pair<Seed, Seed> prg_expand(const Seed& seed) {
  std::pair<Seed, Seed> out;
  prg_expand(seed, out.first, out.second);
  return out;
}

Seed eval_path(const Seed& seed, TreePath path) {
  Seed cur = seed;
  Seed left, right;
  for (std::uint32_t i = 0; i < path.len; ++i) {
    prg_expand(cur, left, right);
    cur = path.bit(i) ? right : left;
  }
  return cur;
}

std::uint32_t leaf_offset(const Seed& leaf, std::uint32_t t) {
  std::uint64_t v = 0;
  for (std::size_t i = kSeedBytes - 8; i < kSeedBytes; ++i) {
    v = (v << 8) | leaf.bytes[i];
  }
  return static_cast<std::uint32_t>(v & ((std::uint64_t{1} << t) - 1));
}

std::vector<Seed> expand_leaf_seeds(const Seed& root, std::uint32_t depth) {
  std::vector<Seed> cur{root};
  std::vector<Seed> next;
  for (std::uint32_t d = 0; d < depth; ++d) {
    next.resize(cur.size() * 2);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      prg_expand(cur[i], next[2 * i], next[2 * i + 1]);
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<std::uint32_t> expand_leaf_offsets(const Seed& root, std::uint32_t depth,
                                               std::uint32_t t) {
  std::vector<Seed> leaves = expand_leaf_seeds(root, depth);
  std::vector<std::uint32_t> out(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    out[i] = leaf_offset(leaves[i], t);
  }
  return out;
}

std::vector<LeafEntry> tree_leaves(const Seed& k, std::uint32_t t) {
  std::vector<std::uint32_t> offs = expand_leaf_offsets(k, t, t);
  std::vector<LeafEntry> out(offs.size());
  for (std::uint32_t c = 0; c < offs.size(); ++c) {
    out[c] = LeafEntry{c, offs[c]};
  }
  return out;
}

std::vector<LeafEntry> subtree_leaves(const Seed& sk, TreePath prefix, std::uint32_t t) {
  if (prefix.len > t) {
    throw std::invalid_argument("subtree prefix deeper than tree");
  }
  const std::uint32_t depth = t - prefix.len;
  std::vector<std::uint32_t> offs = expand_leaf_offsets(sk, depth, t);
  std::vector<LeafEntry> out(offs.size());
  for (std::uint32_t i = 0; i < offs.size(); ++i) {
    out[i] = LeafEntry{(prefix.value << depth) | i, offs[i]};
  }
  return out;
}

TreePath placement_prefix(TreePath chunk, std::uint32_t level) {
  if (level == 0 || level > chunk.len) {
    throw std::invalid_argument("placement level out of range");
  }
  return chunk.prefix(level - 1).appended(!chunk.bit(level - 1));
}

PuncturedKey puncture(const Seed& k, TreePath x_chunk) {
  PuncturedKey pk;
  pk.subkeys.reserve(x_chunk.len);
  Seed cur = k;
  Seed left, right;
  for (std::uint32_t i = 0; i < x_chunk.len; ++i) {
    prg_expand(cur, left, right);
    if (x_chunk.bit(i)) {
      pk.subkeys.push_back(left);
      cur = right;
    } else {
      pk.subkeys.push_back(right);
      cur = left;
    }
  }
  return pk;
}

std::vector<LeafEntry> peval_leaves(const PuncturedKey& pk, TreePath guess_chunk,
                                    std::uint32_t t) {
  if (guess_chunk.len != t || pk.levels() != t) {
    throw std::invalid_argument("punctured key and guess must span the full tree");
  }
  std::vector<LeafEntry> out;
  out.reserve((std::size_t{1} << t) - 1);
  for (std::uint32_t i = 1; i <= t; ++i) {
    TreePath p = placement_prefix(guess_chunk, i);
    std::vector<LeafEntry> part = subtree_leaves(pk.subkeys[i - 1], p, t);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end(),
            [](const LeafEntry& a, const LeafEntry& b) { return a.chunk < b.chunk; });
  return out;
}

std::size_t default_resample_attempts(std::uint32_t t, std::size_t negative_count) {
  return (std::size_t{128} << t) * (1 + negative_count);
}

PuncturedKey resample(const PuncturedKey& pk, TreePath x_chunk,
                      const IndexConstraint& positive,
                      std::span<const IndexConstraint> negatives, std::uint32_t t,
                      SeedSource& fresh, std::size_t max_attempts) {
  if (x_chunk.len != t || pk.levels() != t) {
    throw std::invalid_argument("punctured key and chunk must span the full tree");
  }
  if (positive.sign != Sign::positive) {
    throw std::invalid_argument("resample needs a positive constraint");
  }
  if (positive.chunk == x_chunk.value) {
    throw std::invalid_argument("positive constraint lies on the punctured chunk");
  }

  // The subtrees hanging off the punctured path partition the other chunks,
  // so exactly one placement prefix covers the constrained chunk: the one at
  // the level just past the longest common prefix of the two chunk paths.
  TreePath y_chunk = TreePath::for_chunk(positive.chunk, t);
  std::uint32_t lcp = 0;
  while (lcp < t && x_chunk.bit(lcp) == y_chunk.bit(lcp)) ++lcp;
  const std::uint32_t level = lcp + 1;
  const TreePath prefix = y_chunk.prefix(level);
  const TreePath inner = y_chunk.suffix_after(level);

  PuncturedKey out = pk;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Seed candidate = fresh.next_seed();
    if (leaf_offset(eval_path(candidate, inner), t) != positive.offset) {
      continue;
    }
    bool ok = true;
    for (const IndexConstraint& neg : negatives) {
      if (neg.sign != Sign::negative) {
        throw std::invalid_argument("secondary constraints must be negative");
      }
      TreePath neg_chunk = TreePath::for_chunk(neg.chunk, t);
      if (!prefix.is_prefix_of(neg_chunk)) {
        continue;
      }
      Seed leaf = eval_path(candidate, neg_chunk.suffix_after(level));
      if (leaf_offset(leaf, t) == neg.offset) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.subkeys[level - 1] = candidate;
      return out;
    }
  }
  throw AttemptsExhausted("resample gave up after " + std::to_string(max_attempts) +
                          " attempts");
}

PuncturedKey resample(const PuncturedKey& pk, TreePath x_chunk,
                      const IndexConstraint& positive,
                      std::span<const IndexConstraint> negatives, std::uint32_t t,
                      SeedSource& fresh) {
  return resample(pk, x_chunk, positive, negatives, t, fresh,
                  default_resample_attempts(t, negatives.size()));
}

}  // namespace pir::ggm
