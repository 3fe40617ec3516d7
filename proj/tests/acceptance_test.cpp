// Acceptance gate: one line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pir/client.hpp"
#include "pir/harness.hpp"
#include "pir/rng.hpp"
#include "pir/server.hpp"
#include "pir/stats.hpp"
#include "pir/transport.hpp"
#include "pir/wire.hpp"

using namespace pir;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

std::uint32_t lcp_bits(std::uint32_t a, std::uint32_t b, std::uint32_t t) {
  std::uint32_t lcp = 0;
  while (lcp < t && ((a >> (t - 1 - lcp)) & 1u) == ((b >> (t - 1 - lcp)) & 1u)) ++lcp;
  return lcp;
}

db::Block block_of(std::span<const std::uint8_t> bytes) {
  return db::Block{bytes.begin(), bytes.end()};
}

sim::SimReport full_size_report;

Outcome end_to_end_correctness() {
  const auto start = std::chrono::steady_clock::now();
  full_size_report = sim::simulate(sim::SimConfig{});
  const double elapsed = seconds_since(start);

  const sim::SimReport& r = full_size_report;
  const bool pass = r.total_queries == 3200 && r.correctness_rate() >= 0.999 &&
                    r.incorrect == 0 && r.misses <= 8 &&
                    r.backup_exhaustions == 0 && elapsed < 120.0;
  return {pass, fmt("%llu/%llu correct (%.4f%%), misses %llu, exhaustions %llu, %.1fs",
                    (unsigned long long)r.correct, (unsigned long long)r.total_queries,
                    100.0 * r.correctness_rate(), (unsigned long long)r.misses,
                    (unsigned long long)r.backup_exhaustions, elapsed)};
}

Outcome constrained_hint_sweep() {
  const auto start = std::chrono::steady_clock::now();
  const std::uint32_t t = 3;
  Rng rng(2026);
  const db::Database db = db::Database::random(64, 32, rng);

  std::uint64_t pairs = 0;
  std::uint64_t exact = 0;
  for (std::uint32_t xv = 0; xv < 64; ++xv) {
    const db::DbIndex x = db::split_index(xv, t);
    const ggm::TreePath x_path = ggm::TreePath::for_chunk(x.chunk, t);

    // A hint that covers x, found the same way the client tables do: by
    // sampling until the leaf in x's chunk lands on x's offset.
    ggm::Seed sk;
    do {
      sk = rng.next_seed();
    } while (ggm::leaf_offset(ggm::eval_path(sk, x_path), t) != x.offset);

    const std::vector<ggm::LeafEntry> leaves = ggm::tree_leaves(sk, t);
    db::Block parity(db.entry_size(), 0);
    for (const ggm::LeafEntry& leaf : leaves) {
      db::xor_into(parity, db.entry(leaf.chunk * 8 + leaf.offset));
    }
    const ggm::PuncturedKey pk = ggm::puncture(sk, x_path);

    for (std::uint32_t y_chunk = 0; y_chunk < 8; ++y_chunk) {
      if (y_chunk == x.chunk) continue;
      // Per-level parities along y's chunk path, as a promoted backup hint
      // would have accumulated them.
      std::vector<db::Block> gammas(t, db::Block(db.entry_size(), 0));
      for (const ggm::LeafEntry& leaf : leaves) {
        const std::uint32_t shared = lcp_bits(leaf.chunk, y_chunk, t);
        for (std::uint32_t i = 0; i < shared; ++i) {
          db::xor_into(gammas[i], db.entry(leaf.chunk * 8 + leaf.offset));
        }
      }
      const std::uint32_t h = lcp_bits(x.chunk, y_chunk, t) + 1;

      for (std::uint32_t y_offset = 0; y_offset < 8; ++y_offset) {
        const ggm::PuncturedKey sent = ggm::resample(
            pk, x_path,
            ggm::IndexConstraint{ggm::Sign::positive, y_chunk, y_offset}, {}, t,
            rng);
        const server::ParityMatrix matrix = server::answer(db, sent);

        db::Block value = block_of(matrix.at(0, x.chunk));
        db::xor_into(value, parity);
        db::xor_into(value, gammas[h - 1]);
        db::xor_into(value, matrix.at(h, x.chunk));

        ++pairs;
        if (value == block_of(db.entry(xv))) ++exact;
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = pairs == 3584 && exact == pairs && elapsed < 10.0;
  return {pass, fmt("%llu/%llu (x, y) pairs exact, %.1fs", (unsigned long long)exact,
                    (unsigned long long)pairs, elapsed)};
}

Outcome weak_puncture_correctness() {
  Rng rng(301);
  std::uint64_t checks = 0;
  std::uint64_t matched = 0;
  for (std::uint32_t t = 1; t <= 4; ++t) {
    for (int key = 0; key < 50; ++key) {
      const ggm::Seed k = rng.next_seed();
      const std::vector<ggm::LeafEntry> leaves = ggm::tree_leaves(k, t);
      for (std::uint32_t chunk = 0; chunk < (1u << t); ++chunk) {
        const ggm::TreePath path = ggm::TreePath::for_chunk(chunk, t);
        const std::vector<ggm::LeafEntry> got =
            ggm::peval_leaves(ggm::puncture(k, path), path, t);
        std::vector<ggm::LeafEntry> want = leaves;
        want.erase(want.begin() + chunk);
        ++checks;
        if (got == want) ++matched;
      }
    }
  }
  return {matched == checks, fmt("%llu/%llu punctured trees reproduced",
                                 (unsigned long long)matched,
                                 (unsigned long long)checks)};
}

Outcome server_oracle_equivalence() {
  Rng rng(401);
  std::uint64_t keys = 0;
  std::uint64_t matched = 0;
  for (const std::uint32_t n : {64u, 256u}) {
    const db::Database db = db::Database::random(n, 32, rng);
    for (int i = 0; i < 100; ++i) {
      const std::uint32_t chunk =
          static_cast<std::uint32_t>(rng.below(db.chunk_count()));
      const ggm::PuncturedKey pk =
          ggm::puncture(rng.next_seed(), ggm::TreePath::for_chunk(chunk, db.t()));
      const server::ParityMatrix fast = server::answer(db, pk);
      const server::ParityMatrix slow = sim::answer_naive(db, pk);
      ++keys;
      if (std::equal(fast.bytes().begin(), fast.bytes().end(),
                     slow.bytes().begin(), slow.bytes().end())) {
        ++matched;
      }
    }
  }
  return {matched == keys, fmt("%llu/%llu parity matrices byte-identical",
                               (unsigned long long)matched, (unsigned long long)keys)};
}

Outcome bandwidth_exactness() {
  const sim::SimReport& r = full_size_report;
  const std::uint64_t per_query_down = 14336 + 15;  // matrix + frame and payload headers
  const std::uint64_t per_query_up = 97 + 5;
  const bool pass = r.wire_queries == 3200 && r.upload_payload_min == 97 &&
                    r.upload_payload_max == 97 && r.matrix_section_min == 14336 &&
                    r.matrix_section_max == 14336 &&
                    r.upload_bytes == r.wire_queries * per_query_up &&
                    r.download_bytes == r.wire_queries * per_query_down;
  return {pass, fmt("upload payload %u..%u B, matrix section %u..%u B over %llu queries",
                    r.upload_payload_min, r.upload_payload_max, r.matrix_section_min,
                    r.matrix_section_max, (unsigned long long)r.wire_queries)};
}

Outcome server_scaling() {
  const std::vector<std::uint32_t> sizes{1u << 12, 1u << 16};
  const std::vector<sim::BenchEntry> table = sim::bench_server(sizes, 51, true, 7);
  const double ratio = table[1].median_ms / table[0].median_ms;
  const double naive_factor = table[1].naive_median_ms / table[1].median_ms;
  const bool pass = ratio >= 3.5 && ratio <= 15.0 && naive_factor >= 4.0;
  return {pass, fmt("median %0.3fms @4096 vs %0.3fms @65536, ratio %.2f, naive %.1fx slower",
                    table[0].median_ms, table[1].median_ms, ratio, naive_factor)};
}

Outcome resampling_distribution() {
  const std::vector<sim::StatTest> tests = sim::stat_tests(17);
  bool pass = tests.size() == 5;
  std::string detail;
  for (const sim::StatTest& test : tests) {
    if (test.passed != test.expected_pass) pass = false;
    if (!detail.empty()) detail += ", ";
    detail += fmt("%s p=%.4g%s", test.name.c_str(), test.p_value,
                  test.passed == test.expected_pass ? "" : " UNEXPECTED");
  }
  return {pass, detail};
}

Outcome pipelined_epochs() {
  Rng rng(99);
  const db::Database db = db::Database::random(1024, 32, rng);
  const server::Server server(db, 100);

  auto [client_end, server_end] = make_pipe();
  std::thread worker([&server, stream = std::move(server_end)]() mutable {
    try {
      server::Session(server, *stream, true).run();
    } catch (const TransportClosed&) {
    }
  });

  client::Config cfg;
  cfg.pipeline = true;
  client::ClientState state =
      client::ClientState::from_offline_stream(cfg, *client_end, 101);

  std::vector<std::uint32_t> targets(1024);
  for (std::uint32_t i = 0; i < 1024; ++i) targets[i] = i;
  for (std::uint32_t i = 0; i < 32; ++i) {
    std::swap(targets[i], targets[i + rng.below(1024 - i)]);
  }

  std::uint64_t correct = 0;
  bool swaps_on_schedule = true;
  for (std::uint32_t i = 0; i < 32; ++i) {
    try {
      if (state.query(targets[i], *client_end) == sim::naive_pir(db, targets[i])) {
        ++correct;
      }
    } catch (const std::runtime_error&) {
    }
    // Two chunks per answer rebuild the 32-chunk tables after exactly 16
    // answers, so the swap must land there and nowhere earlier.
    const std::uint32_t expected_epoch = (i + 1) / 16;
    if (state.epoch() != expected_epoch) swaps_on_schedule = false;
  }

  client_end->close();
  worker.join();

  const bool pass = swaps_on_schedule && correct == 32 && state.epoch() == 2;
  return {pass, fmt("%llu/32 correct, swaps after answers 16 and 32, final epoch %u",
                    (unsigned long long)correct, state.epoch())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"end-to-end correctness", end_to_end_correctness},
      {"constrained hint sweep", constrained_hint_sweep},
      {"weak puncture correctness", weak_puncture_correctness},
      {"server oracle equivalence", server_oracle_equivalence},
      {"bandwidth exactness", bandwidth_exactness},
      {"server scaling", server_scaling},
      {"resampling distribution", resampling_distribution},
      {"pipelined epochs", pipelined_epochs},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s  %zu  %-28s %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
