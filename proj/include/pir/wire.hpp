#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pir/database.hpp"
#include "pir/ggm.hpp"
#include "pir/parity_matrix.hpp"
#include "pir/transport.hpp"

// Framing: u32 big-endian payload length, u8 message type, payload.
// All integers inside payloads are big-endian. Layouts:
//   0x01 Hello       u32 n | u32 entry_size | u8 t
//   0x02 PrpKey      16 key bytes
//   0x03 ChunkStream u32 chunk_id | sqrt(n)*entry_size bytes
//   0x04 Query       u8 t | t*16 subkey bytes, shallowest level first
//   0x05 Answer      u8 t | u32 sqrt(n) | u32 entry_size |
//                    (t+1)*sqrt(n)*entry_size matrix bytes, row-major |
//                    u8 chunk_count (0 or 2) | chunk_count * ChunkStream payloads
//   0x06 Error       u16 code

namespace pir::wire {

class MalformedFrame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MsgType : std::uint8_t {
  hello = 0x01,
  prp_key = 0x02,
  chunk_stream = 0x03,
  query = 0x04,
  answer = 0x05,
  error = 0x06,
};

struct Frame {
  MsgType msg_type = MsgType::error;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Frames above this payload size are rejected as malformed before any
// allocation happens.
inline constexpr std::uint32_t kMaxPayload = 1u << 28;

void write_frame(Stream& stream, const Frame& frame);
Frame read_frame(Stream& stream);

struct Hello {
  std::uint32_t n = 0;
  std::uint32_t entry_size = 0;
  std::uint8_t t = 0;

  friend bool operator==(const Hello&, const Hello&) = default;
};

struct ChunkMsg {
  std::uint32_t chunk_id = 0;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const ChunkMsg&, const ChunkMsg&) = default;
};

struct AnswerMsg {
  server::ParityMatrix matrix{0, 0, 0};
  std::vector<ChunkMsg> chunks;
};

Frame encode_hello(const Hello& hello);
Hello decode_hello(const Frame& frame);

Frame encode_prp(const db::PrpKey& key);
db::PrpKey decode_prp(const Frame& frame);

Frame encode_chunk_stream(const ChunkMsg& chunk);
ChunkMsg decode_chunk_stream(const Frame& frame);

Frame encode_query(const ggm::PuncturedKey& pk);
ggm::PuncturedKey decode_query(const Frame& frame);

Frame encode_answer(const server::ParityMatrix& matrix,
                    const std::vector<ChunkMsg>& pipelined_chunks);
AnswerMsg decode_answer(const Frame& frame);

Frame encode_error(std::uint16_t code);
std::uint16_t decode_error(const Frame& frame);

// Size of the matrix byte run inside an answer payload with these
// dimensions; the payload additionally carries 10 header bytes and the
// chunk section.
std::size_t answer_matrix_section_bytes(std::uint32_t t, std::uint32_t sqrt_n,
                                        std::uint32_t entry_size);

}  // namespace pir::wire
