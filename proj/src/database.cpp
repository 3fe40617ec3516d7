#include "pir/database.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace pir::db {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'R', '1'};

void put_u32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t get_u32(const std::uint8_t* in) {
  return static_cast<std::uint32_t>(in[0]) << 24 | static_cast<std::uint32_t>(in[1]) << 16 |
         static_cast<std::uint32_t>(in[2]) << 8 | static_cast<std::uint32_t>(in[3]);
}

std::uint32_t next_power_of_four(std::uint32_t n) {
  std::uint32_t p = 1;
  while (p < n) p <<= 2;
  return p;
}

// Low t bits of SHA-256(key || round || value), value as big-endian u64.
std::uint32_t feistel_round(const PrpKey& key, std::uint8_t round, std::uint32_t half,
                            std::uint32_t t) {
  std::uint8_t msg[16 + 1 + 8];
  std::memcpy(msg, key.bytes.data(), 16);
  msg[16] = round;
  for (int i = 0; i < 8; ++i) {
    msg[17 + i] = static_cast<std::uint8_t>(std::uint64_t{half} >> (56 - 8 * i));
  }
  unsigned char digest[32];
  unsigned int len = 0;
  thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, msg, sizeof(msg));
  EVP_DigestFinal_ex(ctx, digest, &len);
  std::uint64_t v = 0;
  for (int i = 24; i < 32; ++i) v = (v << 8) | digest[i];
  return static_cast<std::uint32_t>(v & ((1u << t) - 1));
}

std::uint32_t half_bits(std::uint32_t n) {
  if (n < 4 || (n & (n - 1)) != 0 || std::countr_zero(n) % 2 != 0) {
    throw std::invalid_argument("permutation domain must be a power of 4");
  }
  return static_cast<std::uint32_t>(std::countr_zero(n)) / 2;
}

}  // namespace

void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] ^= src[i];
  }
}

DbIndex split_index(std::uint32_t value, std::uint32_t t) {
  return DbIndex{value, value >> t, value & ((1u << t) - 1)};
}

std::uint32_t permute_index(const PrpKey& key, std::uint32_t x, std::uint32_t n) {
  const std::uint32_t t = half_bits(n);
  if (x >= n) throw IndexOutOfRange("permute: index " + std::to_string(x));
  std::uint32_t left = x >> t;
  std::uint32_t right = x & ((1u << t) - 1);
  for (std::uint8_t r = 0; r < 4; ++r) {
    std::uint32_t next = left ^ feistel_round(key, r, right, t);
    left = right;
    right = next;
  }
  return (left << t) | right;
}

std::uint32_t unpermute_index(const PrpKey& key, std::uint32_t x, std::uint32_t n) {
  const std::uint32_t t = half_bits(n);
  if (x >= n) throw IndexOutOfRange("unpermute: index " + std::to_string(x));
  std::uint32_t left = x >> t;
  std::uint32_t right = x & ((1u << t) - 1);
  for (int r = 3; r >= 0; --r) {
    std::uint32_t prev = right ^ feistel_round(key, static_cast<std::uint8_t>(r), left, t);
    right = left;
    left = prev;
  }
  return (left << t) | right;
}

Database::Database(std::uint32_t n, std::uint32_t entry_size)
    : n_(n), stored_n_(n), entry_size_(entry_size) {
  if (n < 4 || (n & (n - 1)) != 0 || std::countr_zero(n) % 2 != 0) {
    throw std::invalid_argument("database size must be a power of 4, got " +
                                std::to_string(n));
  }
  if (entry_size == 0) {
    throw std::invalid_argument("entry size must be positive");
  }
  t_ = static_cast<std::uint32_t>(std::countr_zero(n)) / 2;
  data_.resize(std::size_t{n} * entry_size);
}

Database Database::random(std::uint32_t n, std::uint32_t entry_size, Rng& rng) {
  Database db(n, entry_size);
  rng.fill(db.data_);
  return db;
}

Database Database::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadDatabaseFile("cannot open " + path);
  std::uint8_t header[16];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header))) {
    throw BadDatabaseFile("truncated header in " + path);
  }
  if (std::memcmp(header, kMagic, 4) != 0) {
    throw BadDatabaseFile("bad magic in " + path);
  }
  const std::uint32_t stored_n = get_u32(header + 4);
  const std::uint32_t entry_size = get_u32(header + 8);
  if (stored_n == 0 || entry_size == 0) {
    throw BadDatabaseFile("empty dimensions in " + path);
  }
  Database db(next_power_of_four(stored_n), entry_size);
  db.stored_n_ = stored_n;
  if (!in.read(reinterpret_cast<char*>(db.data_.data()),
               static_cast<std::streamsize>(std::size_t{stored_n} * entry_size))) {
    throw BadDatabaseFile("truncated data in " + path);
  }
  return db;
}

void Database::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BadDatabaseFile("cannot create " + path);
  std::uint8_t header[16] = {};
  std::memcpy(header, kMagic, 4);
  put_u32(header + 4, stored_n_);
  put_u32(header + 8, entry_size_);
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(std::size_t{stored_n_} * entry_size_));
  if (!out) throw BadDatabaseFile("short write to " + path);
}

Database Database::shuffled(const PrpKey& key) const {
  Database out(n_, entry_size_);
  out.stored_n_ = stored_n_;
  for (std::uint32_t i = 0; i < n_; ++i) {
    const std::uint32_t to = permute_index(key, i, n_);
    std::memcpy(out.data_.data() + std::size_t{to} * entry_size_,
                data_.data() + std::size_t{i} * entry_size_, entry_size_);
  }
  return out;
}

std::span<const std::uint8_t> Database::entry(std::uint32_t index) const {
  if (index >= n_) {
    throw IndexOutOfRange("entry " + std::to_string(index) + " of " + std::to_string(n_));
  }
  return {data_.data() + std::size_t{index} * entry_size_, entry_size_};
}

std::span<std::uint8_t> Database::entry(std::uint32_t index) {
  if (index >= n_) {
    throw IndexOutOfRange("entry " + std::to_string(index) + " of " + std::to_string(n_));
  }
  return {data_.data() + std::size_t{index} * entry_size_, entry_size_};
}

std::span<const std::uint8_t> Database::chunk_bytes(std::uint32_t chunk_id) const {
  if (chunk_id >= chunk_count()) {
    throw IndexOutOfRange("chunk " + std::to_string(chunk_id));
  }
  const std::size_t chunk_len = std::size_t{chunk_count()} * entry_size_;
  return {data_.data() + chunk_id * chunk_len, chunk_len};
}

Block Database::parity(std::span<const DbIndex> indices) const {
  Block out(entry_size_, 0);
  for (const DbIndex& idx : indices) {
    xor_into(out, entry(idx.value));
  }
  return out;
}

}  // namespace pir::db
