#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <vector>

#include "pir/database.hpp"
#include "pir/rng.hpp"
#include "test_support.hpp"

using namespace pir;
using db::Database;
using db::DbIndex;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("split_index separates chunk and offset") {
  const DbIndex x = db::split_index(45, 3);
  CHECK(x.value == 45);
  CHECK(x.chunk == 5);
  CHECK(x.offset == 5);
  CHECK(x.chunk * 8 + x.offset == x.value);

  const DbIndex zero = db::split_index(0, 3);
  CHECK(zero.chunk == 0);
  CHECK(zero.offset == 0);
}

TEST_CASE("database construction validates its shape") {
  CHECK_THROWS_AS(Database(8, 1), std::invalid_argument);
  CHECK_THROWS_AS(Database(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Database(64, 0), std::invalid_argument);
  const Database d(64, 4);
  CHECK(d.n() == 64);
  CHECK(d.t() == 3);
  CHECK(d.chunk_count() == 8);
  CHECK(d.entry_size() == 4);
  CHECK(d.data().size() == 256);
}

TEST_CASE("parity of the empty list is the zero block") {
  Rng rng(1);
  const Database d = Database::random(64, 8, rng);
  const db::Block zero = d.parity({});
  CHECK(zero == db::Block(8, 0));
}

TEST_CASE("parity of a repeated index cancels") {
  Rng rng(2);
  const Database d = Database::random(64, 8, rng);
  const std::vector<DbIndex> twice{db::split_index(17, 3), db::split_index(17, 3)};
  CHECK(d.parity(twice) == db::Block(8, 0));
}

TEST_CASE("parity equals a fold of single-entry lookups") {
  Rng rng(3);
  const Database d = Database::random(64, 8, rng);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DbIndex> indices;
    for (int i = 0; i < 5; ++i) {
      indices.push_back(db::split_index(static_cast<std::uint32_t>(rng.below(64)), 3));
    }
    db::Block want(8, 0);
    for (const DbIndex& idx : indices) {
      const auto e = d.entry(idx.value);
      for (std::size_t b = 0; b < want.size(); ++b) want[b] ^= e[b];
    }
    REQUIRE(d.parity(indices) == want);

    std::reverse(indices.begin(), indices.end());
    REQUIRE(d.parity(indices) == want);
  }
}

TEST_CASE("parity rejects out-of-range indices") {
  const Database d(16, 1);
  const std::vector<DbIndex> bad{db::split_index(16, 2)};
  CHECK_THROWS_AS(d.parity(bad), db::IndexOutOfRange);
}

TEST_CASE("chunk_bytes addresses contiguous entries") {
  Rng rng(4);
  const Database d = Database::random(16, 1, rng);
  CHECK(std::equal(d.chunk_bytes(0).begin(), d.chunk_bytes(0).end(), d.data().begin()));

  std::vector<std::uint8_t> concat;
  for (std::uint32_t c = 0; c < d.chunk_count(); ++c) {
    const auto bytes = d.chunk_bytes(c);
    concat.insert(concat.end(), bytes.begin(), bytes.end());
  }
  CHECK(std::equal(concat.begin(), concat.end(), d.data().begin(), d.data().end()));

  const Database wide = Database::random(64, 8, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint32_t c = static_cast<std::uint32_t>(rng.below(8));
    const std::uint32_t j = static_cast<std::uint32_t>(rng.below(8));
    const auto chunk = wide.chunk_bytes(c);
    const auto e = wide.entry(c * 8 + j);
    REQUIRE(std::equal(e.begin(), e.end(), chunk.begin() + j * 8));
  }

  CHECK_THROWS_AS(d.chunk_bytes(4), db::IndexOutOfRange);
}

TEST_CASE("permute and unpermute are inverse bijections") {
  db::PrpKey key;
  Rng rng(5);
  rng.fill(key.bytes);

  for (std::uint32_t x = 0; x < 64; ++x) {
    REQUIRE(db::unpermute_index(key, db::permute_index(key, x, 64), 64) == x);
  }

  std::set<std::uint32_t> image;
  for (std::uint32_t x = 0; x < 256; ++x) {
    image.insert(db::permute_index(key, x, 256));
  }
  CHECK(image.size() == 256);
  CHECK(*image.begin() == 0);
  CHECK(*image.rbegin() == 255);
}

TEST_CASE("permutation is a bijection over the full acceptance domain") {
  db::PrpKey key;
  Rng rng(6);
  rng.fill(key.bytes);
  const std::uint32_t n = 1u << 16;
  std::vector<bool> hit(n, false);
  for (std::uint32_t x = 0; x < n; ++x) {
    const std::uint32_t y = db::permute_index(key, x, n);
    REQUIRE(y < n);
    REQUIRE(!hit[y]);
    hit[y] = true;
  }
}

TEST_CASE("permutation is deterministic and key-dependent") {
  db::PrpKey a{};
  db::PrpKey b{};
  b.bytes[0] = 1;
  CHECK(db::permute_index(a, 12, 4096) == db::permute_index(a, 12, 4096));
  bool differs = false;
  for (std::uint32_t x = 0; x < 64 && !differs; ++x) {
    differs = db::permute_index(a, x, 4096) != db::permute_index(b, x, 4096);
  }
  CHECK(differs);
  CHECK_THROWS_AS(db::permute_index(a, 4096, 4096), db::IndexOutOfRange);
}

TEST_CASE("shuffled view places each entry at its permuted index") {
  Rng rng(7);
  const Database d = Database::random(256, 4, rng);
  db::PrpKey key;
  rng.fill(key.bytes);
  const Database view = d.shuffled(key);
  REQUIRE(view.n() == d.n());
  for (std::uint32_t x = 0; x < d.n(); ++x) {
    const auto want = d.entry(x);
    const auto got = view.entry(db::permute_index(key, x, d.n()));
    REQUIRE(std::equal(want.begin(), want.end(), got.begin()));
  }
}

TEST_CASE("database files round-trip") {
  TempFile file("pir_db_roundtrip.bin");
  Rng rng(8);
  const Database d = Database::random(64, 8, rng);
  d.save(file.path);
  const Database loaded = Database::load(file.path);
  CHECK(loaded.n() == 64);
  CHECK(loaded.stored_n() == 64);
  CHECK(loaded.entry_size() == 8);
  CHECK(std::equal(d.data().begin(), d.data().end(), loaded.data().begin(),
                   loaded.data().end()));
}

TEST_CASE("database file header is byte-exact") {
  TempFile file("pir_db_header.bin");
  Database d(16, 2);
  d.entry(3)[0] = 0xaa;
  d.save(file.path);

  std::FILE* f = std::fopen(file.path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::uint8_t header[16];
  REQUIRE(std::fread(header, 1, 16, f) == 16);
  std::fclose(f);

  CHECK(header[0] == 'P');
  CHECK(header[1] == 'I');
  CHECK(header[2] == 'R');
  CHECK(header[3] == '1');
  const std::uint8_t want_n[4] = {0, 0, 0, 16};
  const std::uint8_t want_b[4] = {0, 0, 0, 2};
  CHECK(std::equal(header + 4, header + 8, want_n));
  CHECK(std::equal(header + 8, header + 12, want_b));
  for (int i = 12; i < 16; ++i) CHECK(header[i] == 0);
  CHECK(std::filesystem::file_size(file.path) == 16 + 32);
}

TEST_CASE("loading a non-power-of-4 size pads with zero entries") {
  TempFile file("pir_db_padded.bin");
  {
    // Hand-write a file claiming 5 entries of 2 bytes.
    std::FILE* f = std::fopen(file.path.c_str(), "wb");
    REQUIRE(f != nullptr);
    const std::uint8_t header[16] = {'P', 'I', 'R', '1', 0, 0, 0, 5,
                                     0,   0,   0,   2,   0, 0, 0, 0};
    std::fwrite(header, 1, 16, f);
    const std::uint8_t data[10] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::fwrite(data, 1, 10, f);
    std::fclose(f);
  }
  const Database d = Database::load(file.path);
  CHECK(d.n() == 16);
  CHECK(d.stored_n() == 5);
  CHECK(d.entry(4)[0] == 9);
  CHECK(d.entry(4)[1] == 10);
  for (std::uint32_t x = 5; x < 16; ++x) {
    CHECK(d.entry(x)[0] == 0);
    CHECK(d.entry(x)[1] == 0);
  }
}

TEST_CASE("corrupt database files are rejected") {
  TempFile file("pir_db_corrupt.bin");
  {
    std::FILE* f = std::fopen(file.path.c_str(), "wb");
    REQUIRE(f != nullptr);
    const std::uint8_t header[16] = {'X', 'I', 'R', '1', 0, 0, 0, 4,
                                     0,   0,   0,   1,   0, 0, 0, 0};
    std::fwrite(header, 1, 16, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(Database::load(file.path), db::BadDatabaseFile);
  CHECK_THROWS_AS(Database::load("/nonexistent/pir.db"), db::BadDatabaseFile);

  TempFile truncated("pir_db_truncated.bin");
  {
    std::FILE* f = std::fopen(truncated.path.c_str(), "wb");
    REQUIRE(f != nullptr);
    const std::uint8_t header[16] = {'P', 'I', 'R', '1', 0, 0, 0, 4,
                                     0,   0,   0,   1,   0, 0, 0, 0};
    std::fwrite(header, 1, 16, f);
    const std::uint8_t data[2] = {1, 2};
    std::fwrite(data, 1, 2, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(Database::load(truncated.path), db::BadDatabaseFile);
}

TEST_CASE("xor_into folds byte spans") {
  db::Block a{1, 2, 3};
  const db::Block b{1, 255, 0};
  db::xor_into(a, b);
  CHECK(a == db::Block{0, 253, 3});
}
