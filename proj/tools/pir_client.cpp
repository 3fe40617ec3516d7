#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pir/client.hpp"
#include "pir/transport.hpp"

namespace {

bool parse_db_meta(const std::string& meta, std::uint32_t& n, std::uint32_t& entry_size) {
  const std::size_t comma = meta.find(',');
  if (comma == std::string::npos) return false;
  try {
    n = static_cast<std::uint32_t>(std::stoul(meta.substr(0, comma)));
    entry_size = static_cast<std::uint32_t>(std::stoul(meta.substr(comma + 1)));
  } catch (const std::exception&) {
    return false;
  }
  return n > 0 && entry_size > 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preprocessing PIR client"};
  std::string connect_addr;
  std::string db_meta;
  std::uint32_t query_index = 0;
  std::uint64_t seed = 1;
  std::uint32_t c1 = 8;
  std::uint32_t c2 = 24;
  bool pipeline = false;
  app.add_option("--connect", connect_addr, "server host:port")->required();
  app.add_option("--db-meta", db_meta, "expected database shape as n,B")->required();
  app.add_option("--query", query_index, "index to retrieve")->required();
  app.add_option("--seed", seed, "client randomness seed");
  app.add_option("--c1", c1, "primary hints per sqrt(n)");
  app.add_option("--c2", c2, "backup hints per chunk");
  app.add_flag("--pipeline", pipeline, "ingest pipelined next-epoch chunks");
  CLI11_PARSE(app, argc, argv);

  pir::client::Config cfg;
  if (!parse_db_meta(db_meta, cfg.n, cfg.entry_size)) {
    std::cerr << "error: --db-meta must look like 4096,32" << std::endl;
    return 1;
  }
  cfg.c1 = c1;
  cfg.c2 = c2;
  cfg.pipeline = pipeline;

  try {
    std::unique_ptr<pir::Stream> stream = pir::tcp_connect(connect_addr);
    pir::client::ClientState state =
        pir::client::ClientState::from_offline_stream(cfg, *stream, seed);
    const pir::db::Block value = state.query(query_index, *stream);
    for (std::uint8_t b : value) std::printf("%02x", b);
    std::printf("\n");
    stream->close();
  } catch (const pir::client::QueryFailed& e) {
    std::cerr << "query failed: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
