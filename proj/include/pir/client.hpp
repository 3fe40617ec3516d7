#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pir/database.hpp"
#include "pir/ggm.hpp"
#include "pir/parity_matrix.hpp"
#include "pir/rng.hpp"
#include "pir/transport.hpp"
#include "pir/wire.hpp"

namespace pir::client {

using db::Block;
using db::DbIndex;

// No primary hint covers the queried index; a decoy query was still sent so
// the wire trace does not depend on the miss.
class QueryFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The backup group for the queried chunk has no unconsumed hints left; the
// matched primary hint is retired without replacement.
class BackupExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateChunk : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EpochExhausted : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The server's reply violates the protocol (wrong frame, wrong dimensions,
// or an error frame).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::uint32_t n = 0;
  std::uint32_t entry_size = 0;
  std::uint32_t c1 = 8;   // primary table holds c1 * sqrt(n) hints
  std::uint32_t c2 = 24;  // backup hints per chunk group
  bool pipeline = false;
};

// One primary-table entry. parity is the XOR of the database entries the
// hint's tree selects, one per chunk. A hint promoted from a backup group
// carries the index that consumed its predecessor as `positive` plus the
// backup's gamma blocks; gammas[i-1] is the parity of the hint's leaves
// under the (i-bit prefix of positive.chunk) subtree.
struct PrimaryHint {
  ggm::Seed sk;
  Block parity;
  std::optional<DbIndex> positive;
  std::vector<Block> gammas;
  bool consumed = false;
};

struct BackupHint {
  ggm::Seed sk;
  Block parity;
  std::vector<Block> gammas;
};

// (index, before_position): every hint earlier than before_position was
// scanned for `index` and did not contain it.
struct LedgerEntry {
  DbIndex index;
  std::size_t before_position = 0;
};

using NegativeLedger = std::vector<LedgerEntry>;

// Answers for the most recently queried original indices, FIFO-evicted.
class DedupCache {
 public:
  explicit DedupCache(std::size_t capacity) : capacity_(capacity) {}

  const Block* find(std::uint32_t key) const {
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  void insert(std::uint32_t key, Block value) {
    auto it = map_.find(key);
    if (it != map_.end()) {
      it->second = std::move(value);
      return;
    }
    if (order_.size() == capacity_) {
      map_.erase(order_.front());
      order_.pop_front();
    }
    order_.push_back(key);
    map_.emplace(key, std::move(value));
  }

  std::size_t size() const { return order_.size(); }

 private:
  std::size_t capacity_;
  std::unordered_map<std::uint32_t, Block> map_;
  std::deque<std::uint32_t> order_;
};

struct Stats {
  std::uint64_t wire_queries = 0;
  std::uint64_t misses = 0;
  std::uint64_t backup_exhaustions = 0;
  std::uint64_t resamples = 0;
  std::uint64_t epoch_swaps = 0;
  std::vector<std::uint32_t> upload_payload_sizes;
  std::vector<std::uint32_t> matrix_section_sizes;
};

// The stateful client: hint tables built from the streamed shuffled
// database, query pipeline, refresh bookkeeping, and epoch management.
// All randomness comes from the seed handed to the constructor.
class ClientState {
 public:
  ClientState(const Config& cfg, db::PrpKey prp, std::uint64_t seed);

  // Reads Hello, PrpKey and the full chunk stream. A nonzero cfg.n or
  // cfg.entry_size must match what the server announces.
  static ClientState from_offline_stream(const Config& cfg, Stream& stream,
                                         std::uint64_t seed);

  void ingest_chunk(std::uint32_t chunk_id, std::span<const std::uint8_t> bytes);
  bool tables_ready() const { return current_.chunks_seen == sqrt_n_; }

  // Full online protocol for one index: dedup, find, puncture/resample,
  // exchange, reconstruct, refresh, epoch tick.
  Block query(std::uint32_t original_index, Stream& stream);

  std::optional<std::size_t> find_hint(const DbIndex& x) const;
  ggm::PuncturedKey build_query(const DbIndex& x, std::size_t position);
  Block reconstruct(const PrimaryHint& hint, const DbIndex& x,
                    const server::ParityMatrix& matrix) const;
  void refresh(const DbIndex& x, std::size_t matched_position);
  void epoch_tick(const std::vector<wire::ChunkMsg>& chunks);

  const Config& config() const { return cfg_; }
  std::uint32_t t() const { return t_; }
  std::uint32_t sqrt_n() const { return sqrt_n_; }
  std::uint32_t query_budget() const { return sqrt_n_ / 2; }
  std::uint32_t queries_served() const { return queries_served_; }
  std::uint32_t epoch() const { return epoch_; }
  const db::PrpKey& prp() const { return prp_; }
  const Stats& stats() const { return stats_; }
  const NegativeLedger& ledger() const { return ledger_; }
  const std::vector<PrimaryHint>& primary_hints() const { return current_.primary; }
  std::size_t backup_cursor(std::uint32_t chunk) const {
    return current_.groups.at(chunk).next;
  }
  std::size_t dedup_size() const { return dedup_.size(); }
  bool next_tables_ready() const;

 private:
  struct Group {
    std::vector<BackupHint> hints;
    std::vector<std::vector<std::uint32_t>> offsets;
    std::size_t next = 0;
  };

  struct Tables {
    std::vector<PrimaryHint> primary;
    // offsets[p][c] caches leaf_offset(eval_path(primary[p].sk, c)).
    std::vector<std::vector<std::uint32_t>> primary_offsets;
    std::vector<Group> groups;
    std::vector<bool> chunk_seen;
    std::uint32_t chunks_seen = 0;
  };

  Tables make_tables();
  void tables_ingest(Tables& tables, std::uint32_t chunk_id,
                     std::span<const std::uint8_t> bytes) const;
  Block run_protocol(std::uint32_t original_index, Stream& stream);
  wire::AnswerMsg exchange(const ggm::PuncturedKey& pk, Stream& stream);
  void swap_epochs();

  Config cfg_;
  std::uint32_t t_ = 0;
  std::uint32_t sqrt_n_ = 0;
  db::PrpKey prp_;
  Rng rng_;
  Tables current_;
  std::optional<Tables> next_;
  NegativeLedger ledger_;
  DedupCache dedup_;
  std::uint32_t queries_served_ = 0;
  std::uint32_t epoch_ = 0;
  Stats stats_;
};

}  // namespace pir::client
