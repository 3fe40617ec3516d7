#include "pir/wire.hpp"

#include <cstring>

namespace pir::wire {

namespace {

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  std::uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] << 8 | buf_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(buf_[pos_]) << 24 |
                      static_cast<std::uint32_t>(buf_[pos_ + 1]) << 16 |
                      static_cast<std::uint32_t>(buf_[pos_ + 2]) << 8 |
                      static_cast<std::uint32_t>(buf_[pos_ + 3]);
    pos_ += 4;
    return v;
  }

  void bytes(std::span<std::uint8_t> out) {
    need(out.size());
    std::memcpy(out.data(), buf_.data() + pos_, out.size());
    pos_ += out.size();
  }

  void done() const {
    if (pos_ != buf_.size()) throw MalformedFrame("trailing bytes in payload");
  }

 private:
  void need(std::size_t k) const {
    if (buf_.size() - pos_ < k) throw MalformedFrame("payload too short");
  }

  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }

  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }

  void u32(std::uint32_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 24));
    buf_.push_back(static_cast<std::uint8_t>(v >> 16));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }

  void bytes(std::span<const std::uint8_t> in) { buf_.insert(buf_.end(), in.begin(), in.end()); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

void expect_type(const Frame& frame, MsgType want, const char* name) {
  if (frame.msg_type != want) {
    throw MalformedFrame(std::string("frame is not a ") + name);
  }
}

}  // namespace

void write_frame(Stream& stream, const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) {
    throw MalformedFrame("payload exceeds frame limit");
  }
  std::uint8_t head[5];
  const std::uint32_t len = static_cast<std::uint32_t>(frame.payload.size());
  head[0] = static_cast<std::uint8_t>(len >> 24);
  head[1] = static_cast<std::uint8_t>(len >> 16);
  head[2] = static_cast<std::uint8_t>(len >> 8);
  head[3] = static_cast<std::uint8_t>(len);
  head[4] = static_cast<std::uint8_t>(frame.msg_type);
  stream.write(head);
  stream.write(frame.payload);
}

Frame read_frame(Stream& stream) {
  std::uint8_t head[5];
  stream.read_exact(head);
  const std::uint32_t len = static_cast<std::uint32_t>(head[0]) << 24 |
                            static_cast<std::uint32_t>(head[1]) << 16 |
                            static_cast<std::uint32_t>(head[2]) << 8 |
                            static_cast<std::uint32_t>(head[3]);
  if (len > kMaxPayload) throw MalformedFrame("frame length out of bounds");
  if (head[4] < 0x01 || head[4] > 0x06) throw MalformedFrame("unknown msg_type");
  Frame frame;
  frame.msg_type = static_cast<MsgType>(head[4]);
  frame.payload.resize(len);
  stream.read_exact(frame.payload);
  return frame;
}

Frame encode_hello(const Hello& hello) {
  Writer w;
  w.u32(hello.n);
  w.u32(hello.entry_size);
  w.u8(hello.t);
  return Frame{MsgType::hello, w.take()};
}

Hello decode_hello(const Frame& frame) {
  expect_type(frame, MsgType::hello, "hello");
  Reader r(frame.payload);
  Hello h;
  h.n = r.u32();
  h.entry_size = r.u32();
  h.t = r.u8();
  r.done();
  if (h.t > 15 || h.n != 1u << (2 * h.t) || h.entry_size == 0) {
    throw MalformedFrame("inconsistent hello dimensions");
  }
  return h;
}

Frame encode_prp(const db::PrpKey& key) {
  Writer w;
  w.bytes(key.bytes);
  return Frame{MsgType::prp_key, w.take()};
}

db::PrpKey decode_prp(const Frame& frame) {
  expect_type(frame, MsgType::prp_key, "prp key");
  Reader r(frame.payload);
  db::PrpKey key;
  r.bytes(key.bytes);
  r.done();
  return key;
}

Frame encode_chunk_stream(const ChunkMsg& chunk) {
  Writer w;
  w.u32(chunk.chunk_id);
  w.bytes(chunk.bytes);
  return Frame{MsgType::chunk_stream, w.take()};
}

ChunkMsg decode_chunk_stream(const Frame& frame) {
  expect_type(frame, MsgType::chunk_stream, "chunk stream");
  if (frame.payload.size() < 4) throw MalformedFrame("payload too short");
  Reader r(frame.payload);
  ChunkMsg chunk;
  chunk.chunk_id = r.u32();
  chunk.bytes.resize(frame.payload.size() - 4);
  r.bytes(chunk.bytes);
  r.done();
  return chunk;
}

Frame encode_query(const ggm::PuncturedKey& pk) {
  if (pk.subkeys.empty() || pk.subkeys.size() > 255) {
    throw MalformedFrame("punctured key has unusable level count");
  }
  Writer w;
  w.u8(static_cast<std::uint8_t>(pk.subkeys.size()));
  for (const ggm::Seed& s : pk.subkeys) w.bytes(s.bytes);
  return Frame{MsgType::query, w.take()};
}

ggm::PuncturedKey decode_query(const Frame& frame) {
  expect_type(frame, MsgType::query, "query");
  Reader r(frame.payload);
  const std::uint8_t t = r.u8();
  if (t == 0 || frame.payload.size() != 1 + std::size_t{t} * ggm::kSeedBytes) {
    throw MalformedFrame("query length does not match level count");
  }
  ggm::PuncturedKey pk;
  pk.subkeys.resize(t);
  for (ggm::Seed& s : pk.subkeys) r.bytes(s.bytes);
  r.done();
  return pk;
}

std::size_t answer_matrix_section_bytes(std::uint32_t t, std::uint32_t sqrt_n,
                                        std::uint32_t entry_size) {
  return std::size_t{t + 1} * sqrt_n * entry_size;
}

Frame encode_answer(const server::ParityMatrix& matrix,
                    const std::vector<ChunkMsg>& pipelined_chunks) {
  if (pipelined_chunks.size() != 0 && pipelined_chunks.size() != 2) {
    throw MalformedFrame("answer carries zero or two chunks");
  }
  if (matrix.rows() < 2 || matrix.rows() > 16) {
    throw MalformedFrame("matrix row count out of range");
  }
  const std::uint32_t t = matrix.rows() - 1;
  Writer w;
  w.u8(static_cast<std::uint8_t>(t));
  w.u32(matrix.cols());
  w.u32(matrix.block_size());
  w.bytes(matrix.bytes());
  w.u8(static_cast<std::uint8_t>(pipelined_chunks.size()));
  for (const ChunkMsg& chunk : pipelined_chunks) {
    w.u32(chunk.chunk_id);
    w.bytes(chunk.bytes);
  }
  return Frame{MsgType::answer, w.take()};
}

AnswerMsg decode_answer(const Frame& frame) {
  expect_type(frame, MsgType::answer, "answer");
  Reader r(frame.payload);
  const std::uint8_t t = r.u8();
  const std::uint32_t sqrt_n = r.u32();
  const std::uint32_t entry_size = r.u32();
  if (t == 0 || t > 15 || sqrt_n != 1u << t || entry_size == 0 ||
      entry_size > kMaxPayload / ((t + 1) * std::size_t{sqrt_n})) {
    throw MalformedFrame("inconsistent answer dimensions");
  }
  AnswerMsg msg;
  msg.matrix = server::ParityMatrix(t + 1, sqrt_n, entry_size);
  r.bytes(msg.matrix.bytes());
  const std::uint8_t count = r.u8();
  if (count != 0 && count != 2) throw MalformedFrame("bad pipelined chunk count");
  const std::size_t chunk_len = std::size_t{sqrt_n} * entry_size;
  for (std::uint8_t i = 0; i < count; ++i) {
    ChunkMsg chunk;
    chunk.chunk_id = r.u32();
    if (chunk.chunk_id >= sqrt_n) throw MalformedFrame("pipelined chunk id out of range");
    chunk.bytes.resize(chunk_len);
    r.bytes(chunk.bytes);
    msg.chunks.push_back(std::move(chunk));
  }
  r.done();
  return msg;
}

Frame encode_error(std::uint16_t code) {
  Writer w;
  w.u16(code);
  return Frame{MsgType::error, w.take()};
}

std::uint16_t decode_error(const Frame& frame) {
  expect_type(frame, MsgType::error, "error");
  Reader r(frame.payload);
  const std::uint16_t code = r.u16();
  r.done();
  return code;
}

}  // namespace pir::wire
