#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pir/rng.hpp"

namespace pir::db {

using Block = std::vector<std::uint8_t>;

void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src);

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class BadDatabaseFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Index into a database of n = 4^t entries, viewed as 2^t chunks of 2^t
// entries: value = chunk * 2^t + offset.
struct DbIndex {
  std::uint32_t value = 0;
  std::uint32_t chunk = 0;
  std::uint32_t offset = 0;

  friend bool operator==(const DbIndex&, const DbIndex&) = default;
};

DbIndex split_index(std::uint32_t value, std::uint32_t t);

struct PrpKey {
  std::array<std::uint8_t, 16> bytes{};

  friend bool operator==(const PrpKey&, const PrpKey&) = default;
};

// Permutation of [0, n) built as a 4-round Feistel network over 2t-bit
// values, with SHA-256(key || round || half) as the round function. n must
// be a power of 4 so the halves split evenly.
std::uint32_t permute_index(const PrpKey& key, std::uint32_t x, std::uint32_t n);
std::uint32_t unpermute_index(const PrpKey& key, std::uint32_t x, std::uint32_t n);

// Flat n-entry store of fixed-size records, n a power of 4. Files carry a
// "PIR1" magic, big-endian n and entry size, 4 reserved bytes, then the raw
// entries; loads round n up to the next power of 4 with zero entries.
class Database {
 public:
  Database(std::uint32_t n, std::uint32_t entry_size);

  static Database random(std::uint32_t n, std::uint32_t entry_size, Rng& rng);
  static Database load(const std::string& path);
  void save(const std::string& path) const;

  // Serving view under `key`: shuffled.entry(permute_index(key, i)) is
  // entry(i), materialized once so chunks stream contiguously.
  Database shuffled(const PrpKey& key) const;

  std::uint32_t n() const { return n_; }
  std::uint32_t stored_n() const { return stored_n_; }
  std::uint32_t entry_size() const { return entry_size_; }
  std::uint32_t t() const { return t_; }
  std::uint32_t chunk_count() const { return 1u << t_; }

  std::span<const std::uint8_t> entry(std::uint32_t index) const;
  std::span<std::uint8_t> entry(std::uint32_t index);
  std::span<const std::uint8_t> chunk_bytes(std::uint32_t chunk_id) const;
  std::span<const std::uint8_t> data() const { return data_; }

  Block parity(std::span<const DbIndex> indices) const;

 private:
  std::uint32_t n_ = 0;
  std::uint32_t stored_n_ = 0;
  std::uint32_t entry_size_ = 0;
  std::uint32_t t_ = 0;
  std::vector<std::uint8_t> data_;
};

}  // namespace pir::db
