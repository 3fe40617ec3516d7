#include "pir/server.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "pir/wire.hpp"

namespace pir::server {

ParityMatrix answer(const db::Database& database, const ggm::PuncturedKey& pk) {
  const std::uint32_t t = database.t();
  if (pk.levels() != t) {
    throw MalformedKey("expected " + std::to_string(t) + " subkeys, got " +
                       std::to_string(pk.levels()));
  }
  const std::uint32_t sqrt_n = database.chunk_count();
  const std::uint32_t entry_size = database.entry_size();
  ParityMatrix matrix(t + 1, sqrt_n, entry_size);

  std::vector<std::uint8_t> level_parities;
  for (std::uint32_t level = 1; level <= t; ++level) {
    const std::uint32_t depth = t - level;
    const std::uint32_t placements = 1u << level;
    const std::uint32_t leaves = 1u << depth;

    // The subkey's leaf offsets do not depend on where it is placed; only
    // the chunk labels do. Expand once, then reuse for every placement.
    const std::vector<std::uint32_t> offsets =
        ggm::expand_leaf_offsets(pk.subkeys[level - 1], depth, t);

    level_parities.assign(std::size_t{placements} * entry_size, 0);
    for (std::uint32_t p = 0; p < placements; ++p) {
      std::span<std::uint8_t> cell{level_parities.data() + std::size_t{p} * entry_size,
                                   entry_size};
      for (std::uint32_t i = 0; i < leaves; ++i) {
        const std::uint32_t chunk = (p << depth) | i;
        db::xor_into(cell, database.entry(chunk * sqrt_n + offsets[i]));
      }
    }

    // Candidate chunk c places this subkey at prefix c_{level-1} || ~c_level,
    // which as an integer is c's level-bit prefix with the low bit flipped.
    for (std::uint32_t c = 0; c < sqrt_n; ++c) {
      const std::uint32_t placement = (c >> depth) ^ 1u;
      std::span<const std::uint8_t> cell{
          level_parities.data() + std::size_t{placement} * entry_size, entry_size};
      std::copy(cell.begin(), cell.end(), matrix.at(level, c).begin());
      db::xor_into(matrix.at(0, c), cell);
    }
  }
  return matrix;
}

namespace {

db::PrpKey derive_prp(std::uint64_t seed) {
  Rng rng(seed);
  db::PrpKey key;
  rng.fill(key.bytes);
  return key;
}

}  // namespace

Server::Server(const db::Database& database, std::uint64_t seed)
    : prp_(derive_prp(seed)), view_(database.shuffled(prp_)) {}

void Session::send_offline_stream() {
  const db::Database& view = server_.view();
  wire::write_frame(stream_, wire::encode_hello(wire::Hello{
                                 view.n(), view.entry_size(),
                                 static_cast<std::uint8_t>(view.t())}));
  wire::write_frame(stream_, wire::encode_prp(server_.prp_key()));
  for (std::uint32_t c = 0; c < view.chunk_count(); ++c) {
    std::span<const std::uint8_t> bytes = view.chunk_bytes(c);
    wire::write_frame(stream_, wire::encode_chunk_stream(wire::ChunkMsg{
                                   c, {bytes.begin(), bytes.end()}}));
  }
}

void Session::run() {
  send_offline_stream();
  const db::Database& view = server_.view();
  while (true) {
    wire::Frame frame;
    try {
      frame = wire::read_frame(stream_);
    } catch (const TransportClosed&) {
      return;
    } catch (const wire::MalformedFrame&) {
      // Framing is lost; nothing further can be parsed off this stream.
      wire::write_frame(stream_, wire::encode_error(kErrBadFrame));
      return;
    }
    ggm::PuncturedKey pk;
    try {
      pk = wire::decode_query(frame);
      if (pk.levels() != view.t()) {
        throw MalformedKey("subkey count does not match database");
      }
    } catch (const std::runtime_error&) {
      wire::write_frame(stream_, wire::encode_error(kErrBadKey));
      continue;
    }
    std::vector<wire::ChunkMsg> chunks;
    if (pipeline_) {
      for (int i = 0; i < 2; ++i) {
        const std::uint32_t id = next_chunk_;
        next_chunk_ = (next_chunk_ + 1) % view.chunk_count();
        std::span<const std::uint8_t> bytes = view.chunk_bytes(id);
        chunks.push_back(wire::ChunkMsg{id, {bytes.begin(), bytes.end()}});
      }
    }
    wire::write_frame(stream_, wire::encode_answer(server_.answer(pk), chunks));
  }
}

}  // namespace pir::server
