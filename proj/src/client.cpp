#include "pir/client.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <utility>

namespace pir::client {

namespace {

std::uint32_t common_prefix_len(std::uint32_t a, std::uint32_t b, std::uint32_t t) {
  std::uint32_t lcp = 0;
  while (lcp < t && ((a >> (t - 1 - lcp)) & 1u) == ((b >> (t - 1 - lcp)) & 1u)) ++lcp;
  return lcp;
}

}  // namespace

ClientState::ClientState(const Config& cfg, db::PrpKey prp, std::uint64_t seed)
    : cfg_(cfg), prp_(prp), rng_(seed), dedup_(0) {
  if (cfg.n < 4 || (cfg.n & (cfg.n - 1)) != 0 ||
      std::countr_zero(cfg.n) % 2 != 0) {
    throw std::invalid_argument("database size must be a power of 4");
  }
  if (cfg.entry_size == 0 || cfg.c1 == 0) {
    throw std::invalid_argument("entry size and c1 must be positive");
  }
  t_ = static_cast<std::uint32_t>(std::countr_zero(cfg.n)) / 2;
  sqrt_n_ = 1u << t_;
  dedup_ = DedupCache(sqrt_n_ / 2);
  current_ = make_tables();
  if (cfg_.pipeline) next_ = make_tables();
}

ClientState ClientState::from_offline_stream(const Config& cfg, Stream& stream,
                                             std::uint64_t seed) {
  wire::Hello hello = wire::decode_hello(wire::read_frame(stream));
  if ((cfg.n != 0 && cfg.n != hello.n) ||
      (cfg.entry_size != 0 && cfg.entry_size != hello.entry_size)) {
    throw ProtocolError("server announced " + std::to_string(hello.n) + "x" +
                        std::to_string(hello.entry_size) +
                        ", which conflicts with the expected shape");
  }
  db::PrpKey prp = wire::decode_prp(wire::read_frame(stream));
  Config full = cfg;
  full.n = hello.n;
  full.entry_size = hello.entry_size;
  ClientState state(full, prp, seed);
  for (std::uint32_t i = 0; i < state.sqrt_n_; ++i) {
    wire::ChunkMsg chunk = wire::decode_chunk_stream(wire::read_frame(stream));
    state.ingest_chunk(chunk.chunk_id, chunk.bytes);
  }
  return state;
}

ClientState::Tables ClientState::make_tables() {
  Tables tables;
  const std::size_t primary_count = std::size_t{cfg_.c1} * sqrt_n_;
  tables.primary.resize(primary_count);
  tables.primary_offsets.resize(primary_count);
  for (std::size_t i = 0; i < primary_count; ++i) {
    PrimaryHint& hint = tables.primary[i];
    hint.sk = rng_.next_seed();
    hint.parity.assign(cfg_.entry_size, 0);
    tables.primary_offsets[i] = ggm::expand_leaf_offsets(hint.sk, t_, t_);
  }
  tables.groups.resize(sqrt_n_);
  for (Group& group : tables.groups) {
    group.hints.resize(cfg_.c2);
    group.offsets.resize(cfg_.c2);
    for (std::uint32_t k = 0; k < cfg_.c2; ++k) {
      BackupHint& hint = group.hints[k];
      hint.sk = rng_.next_seed();
      hint.parity.assign(cfg_.entry_size, 0);
      hint.gammas.assign(t_, Block(cfg_.entry_size, 0));
      group.offsets[k] = ggm::expand_leaf_offsets(hint.sk, t_, t_);
    }
  }
  tables.chunk_seen.assign(sqrt_n_, false);
  return tables;
}

void ClientState::tables_ingest(Tables& tables, std::uint32_t chunk_id,
                                std::span<const std::uint8_t> bytes) const {
  if (chunk_id >= sqrt_n_) {
    throw std::invalid_argument("chunk id " + std::to_string(chunk_id) +
                                " out of range");
  }
  if (bytes.size() != std::size_t{sqrt_n_} * cfg_.entry_size) {
    throw std::invalid_argument("chunk byte length does not match n and entry size");
  }
  if (tables.chunk_seen[chunk_id]) {
    throw DuplicateChunk("chunk " + std::to_string(chunk_id) + " already ingested");
  }
  tables.chunk_seen[chunk_id] = true;
  ++tables.chunks_seen;

  auto entry = [&](std::uint32_t offset) {
    return bytes.subspan(std::size_t{offset} * cfg_.entry_size, cfg_.entry_size);
  };

  for (std::size_t i = 0; i < tables.primary.size(); ++i) {
    db::xor_into(tables.primary[i].parity, entry(tables.primary_offsets[i][chunk_id]));
  }
  for (std::uint32_t c = 0; c < sqrt_n_; ++c) {
    Group& group = tables.groups[c];
    for (std::uint32_t k = 0; k < group.hints.size(); ++k) {
      BackupHint& hint = group.hints[k];
      std::span<const std::uint8_t> e = entry(group.offsets[k][chunk_id]);
      db::xor_into(hint.parity, e);
      // gamma_i covers the subtree at the designated chunk's i-bit prefix;
      // this chunk falls inside it for every i up to the common prefix.
      const std::uint32_t shared = common_prefix_len(chunk_id, c, t_);
      for (std::uint32_t i = 0; i < shared; ++i) {
        db::xor_into(hint.gammas[i], e);
      }
    }
  }
}

void ClientState::ingest_chunk(std::uint32_t chunk_id,
                               std::span<const std::uint8_t> bytes) {
  if (current_.chunks_seen < sqrt_n_) {
    tables_ingest(current_, chunk_id, bytes);
    return;
  }
  if (!next_) {
    throw std::logic_error("tables are complete and pipelining is off");
  }
  tables_ingest(*next_, chunk_id, bytes);
}

std::optional<std::size_t> ClientState::find_hint(const DbIndex& x) const {
  for (std::size_t i = 0; i < current_.primary.size(); ++i) {
    const PrimaryHint& hint = current_.primary[i];
    if (hint.consumed) continue;
    if (hint.positive && hint.positive->chunk == x.chunk) continue;
    if (current_.primary_offsets[i][x.chunk] == x.offset) return i;
  }
  return std::nullopt;
}

ggm::PuncturedKey ClientState::build_query(const DbIndex& x, std::size_t position) {
  const PrimaryHint& hint = current_.primary[position];
  const ggm::TreePath x_path = ggm::TreePath::for_chunk(x.chunk, t_);
  ggm::PuncturedKey pk = ggm::puncture(hint.sk, x_path);
  if (!hint.positive) return pk;

  const DbIndex y = *hint.positive;
  const std::uint32_t level = common_prefix_len(x.chunk, y.chunk, t_) + 1;
  const ggm::TreePath replaced =
      ggm::TreePath::for_chunk(y.chunk, t_).prefix(level);

  std::vector<ggm::IndexConstraint> negatives;
  for (const LedgerEntry& entry : ledger_) {
    if (entry.before_position <= position) continue;
    if (!replaced.is_prefix_of(ggm::TreePath::for_chunk(entry.index.chunk, t_))) {
      continue;
    }
    negatives.push_back(ggm::IndexConstraint{ggm::Sign::negative, entry.index.chunk,
                                             entry.index.offset});
  }
  ++stats_.resamples;
  return ggm::resample(pk, x_path,
                       ggm::IndexConstraint{ggm::Sign::positive, y.chunk, y.offset},
                       negatives, t_, rng_);
}

Block ClientState::reconstruct(const PrimaryHint& hint, const DbIndex& x,
                               const server::ParityMatrix& matrix) const {
  Block value{matrix.at(0, x.chunk).begin(), matrix.at(0, x.chunk).end()};
  db::xor_into(value, hint.parity);
  if (hint.positive) {
    const std::uint32_t h = common_prefix_len(x.chunk, hint.positive->chunk, t_) + 1;
    db::xor_into(value, hint.gammas[h - 1]);
    db::xor_into(value, matrix.at(h, x.chunk));
  }
  return value;
}

void ClientState::refresh(const DbIndex& x, std::size_t matched_position) {
  ledger_.push_back(LedgerEntry{x, matched_position});
  Group& group = current_.groups[x.chunk];
  if (group.next >= group.hints.size()) {
    throw BackupExhausted("backup group for chunk " + std::to_string(x.chunk) +
                          " is empty");
  }
  BackupHint promoted = std::move(group.hints[group.next]);
  current_.primary[matched_position] =
      PrimaryHint{promoted.sk, std::move(promoted.parity), x,
                  std::move(promoted.gammas), false};
  current_.primary_offsets[matched_position] = std::move(group.offsets[group.next]);
  ++group.next;
}

void ClientState::epoch_tick(const std::vector<wire::ChunkMsg>& chunks) {
  if (!cfg_.pipeline) return;
  for (const wire::ChunkMsg& chunk : chunks) {
    tables_ingest(*next_, chunk.chunk_id, chunk.bytes);
  }
  if (next_->chunks_seen == sqrt_n_) swap_epochs();
}

void ClientState::swap_epochs() {
  current_ = std::move(*next_);
  next_ = make_tables();
  ledger_.clear();
  queries_served_ = 0;
  ++epoch_;
  ++stats_.epoch_swaps;
}

bool ClientState::next_tables_ready() const {
  return next_ && next_->chunks_seen == sqrt_n_;
}

wire::AnswerMsg ClientState::exchange(const ggm::PuncturedKey& pk, Stream& stream) {
  wire::Frame query = wire::encode_query(pk);
  ++stats_.wire_queries;
  stats_.upload_payload_sizes.push_back(static_cast<std::uint32_t>(query.payload.size()));
  wire::write_frame(stream, query);

  wire::Frame reply = wire::read_frame(stream);
  if (reply.msg_type == wire::MsgType::error) {
    throw ProtocolError("server error code " +
                        std::to_string(wire::decode_error(reply)));
  }
  wire::AnswerMsg answer = wire::decode_answer(reply);
  if (answer.matrix.rows() != t_ + 1 || answer.matrix.cols() != sqrt_n_ ||
      answer.matrix.block_size() != cfg_.entry_size) {
    throw ProtocolError("answer dimensions do not match the database shape");
  }
  stats_.matrix_section_sizes.push_back(static_cast<std::uint32_t>(
      wire::answer_matrix_section_bytes(t_, sqrt_n_, cfg_.entry_size)));
  return answer;
}

Block ClientState::run_protocol(std::uint32_t original_index, Stream& stream) {
  if (queries_served_ >= query_budget()) {
    throw EpochExhausted("epoch budget of " + std::to_string(query_budget()) +
                         " queries is spent");
  }
  const DbIndex x =
      db::split_index(db::permute_index(prp_, original_index, cfg_.n), t_);
  const std::optional<std::size_t> position = find_hint(x);

  ggm::PuncturedKey pk;
  if (position) {
    pk = build_query(x, *position);
  } else {
    ++stats_.misses;
    pk = ggm::puncture(rng_.next_seed(), ggm::TreePath::for_chunk(x.chunk, t_));
  }

  wire::AnswerMsg answer = exchange(pk, stream);

  Block value;
  bool exhausted = false;
  if (position) {
    value = reconstruct(current_.primary[*position], x, answer.matrix);
    try {
      refresh(x, *position);
    } catch (const BackupExhausted&) {
      current_.primary[*position].consumed = true;
      ++stats_.backup_exhaustions;
      exhausted = true;
    }
  } else {
    // A miss scanned the whole table, so every hint is known to avoid x.
    ledger_.push_back(LedgerEntry{x, current_.primary.size()});
  }

  ++queries_served_;
  epoch_tick(answer.chunks);

  if (exhausted) {
    throw BackupExhausted("backup group for chunk " + std::to_string(x.chunk) +
                          " is empty");
  }
  if (!position) {
    throw QueryFailed("no primary hint covers the requested index");
  }
  return value;
}

Block ClientState::query(std::uint32_t original_index, Stream& stream) {
  if (original_index >= cfg_.n) {
    throw db::IndexOutOfRange("query index " + std::to_string(original_index));
  }
  if (const Block* cached = dedup_.find(original_index)) {
    Block value = *cached;
    const std::uint32_t decoy = static_cast<std::uint32_t>(rng_.below(cfg_.n));
    try {
      run_protocol(decoy, stream);
    } catch (const QueryFailed&) {
    } catch (const BackupExhausted&) {
    }
    return value;
  }
  Block value = run_protocol(original_index, stream);
  dedup_.insert(original_index, value);
  return value;
}

}  // namespace pir::client
