#include <cstdint>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "pir/database.hpp"
#include "pir/server.hpp"
#include "pir/transport.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Preprocessing PIR server"};
  std::string db_path;
  std::string listen_addr;
  std::uint64_t seed = 1;
  bool pipeline = false;
  app.add_option("--db", db_path, "database file")->required();
  app.add_option("--listen", listen_addr, "host:port to listen on")->required();
  app.add_option("--seed", seed, "PRP key derivation seed");
  app.add_flag("--pipeline", pipeline, "attach two chunks to every answer");
  CLI11_PARSE(app, argc, argv);

  try {
    pir::db::Database database = pir::db::Database::load(db_path);
    pir::server::Server server(database, seed);
    pir::TcpListener listener(listen_addr);
    std::cout << "serving " << database.n() << " entries of " << database.entry_size()
              << " bytes on port " << listener.port() << std::endl;

    while (true) {
      std::unique_ptr<pir::Stream> stream = listener.accept();
      std::thread([&server, stream = std::move(stream), pipeline]() mutable {
        try {
          pir::server::Session(server, *stream, pipeline).run();
        } catch (const std::exception& e) {
          std::cerr << "session ended: " << e.what() << std::endl;
        }
      }).detach();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
