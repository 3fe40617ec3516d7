#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pir/database.hpp"
#include "pir/rng.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a random database file"};
  std::uint32_t n = 4096;
  std::uint32_t entry_size = 32;
  std::uint64_t seed = 1;
  std::string out_path;
  app.add_option("--n", n, "entry count, a power of 4");
  app.add_option("--entry-size", entry_size, "bytes per entry");
  app.add_option("--seed", seed, "content seed");
  app.add_option("--out", out_path, "output file")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    pir::Rng rng(seed);
    pir::db::Database::random(n, entry_size, rng).save(out_path);
    std::cout << "wrote " << n << " x " << entry_size << " bytes to " << out_path
              << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
