#pragma once

#include <cstdint>
#include <stdexcept>

#include "pir/database.hpp"
#include "pir/ggm.hpp"
#include "pir/parity_matrix.hpp"
#include "pir/transport.hpp"

namespace pir::server {

class MalformedKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parity matrix for every candidate punctured chunk. Row i >= 1, column c
// holds the XOR of database entries selected by subkey i placed at
// c_{i-1} || ~c_i; row 0 is the column XOR. Each subkey's subtree is
// expanded once and its leaf offsets reused across all 2^i placements.
ParityMatrix answer(const db::Database& database, const ggm::PuncturedKey& pk);

// Serving state: the shuffled view of a database plus the published PRP
// key, both fixed for the server's lifetime.
class Server {
 public:
  Server(const db::Database& database, std::uint64_t seed);

  const db::PrpKey& prp_key() const { return prp_; }
  const db::Database& view() const { return view_; }

  ParityMatrix answer(const ggm::PuncturedKey& pk) const {
    return server::answer(view_, pk);
  }

 private:
  db::PrpKey prp_;
  db::Database view_;
};

// One client connection: Hello, PrpKey, the offline chunk stream, then a
// query/answer loop until the peer hangs up. With pipelining on, every
// answer carries the next two chunks of the serving view.
class Session {
 public:
  Session(const Server& server, Stream& stream, bool pipeline)
      : server_(server), stream_(stream), pipeline_(pipeline) {}

  void send_offline_stream();
  void run();

 private:
  const Server& server_;
  Stream& stream_;
  bool pipeline_;
  std::uint32_t next_chunk_ = 0;
};

// Error frame codes.
inline constexpr std::uint16_t kErrBadFrame = 1;
inline constexpr std::uint16_t kErrBadKey = 2;

}  // namespace pir::server
