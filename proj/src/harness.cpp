#include "pir/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "pir/client.hpp"
#include "pir/server.hpp"
#include "pir/stats.hpp"
#include "pir/transport.hpp"
#include "pir/wire.hpp"

namespace pir::sim {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k == 0 ? 0.0 : (k % 2 == 1 ? values[k / 2] : (values[k / 2 - 1] + values[k / 2]) / 2.0);
}

std::vector<std::uint32_t> distinct_indices(std::uint32_t n, std::uint32_t count,
                                            Rng& rng) {
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

db::Block naive_pir(const db::Database& database, std::uint32_t x) {
  std::span<const std::uint8_t> e = database.entry(x);
  return db::Block{e.begin(), e.end()};
}

server::ParityMatrix answer_naive(const db::Database& database,
                                  const ggm::PuncturedKey& pk) {
  const std::uint32_t t = database.t();
  if (pk.levels() != t) {
    throw server::MalformedKey("subkey count does not match database");
  }
  const std::uint32_t sqrt_n = database.chunk_count();
  server::ParityMatrix matrix(t + 1, sqrt_n, database.entry_size());
  std::vector<db::DbIndex> indices;
  for (std::uint32_t c = 0; c < sqrt_n; ++c) {
    const ggm::TreePath candidate = ggm::TreePath::for_chunk(c, t);
    for (std::uint32_t level = 1; level <= t; ++level) {
      const ggm::TreePath prefix = ggm::placement_prefix(candidate, level);
      indices.clear();
      for (const ggm::LeafEntry& leaf :
           ggm::subtree_leaves(pk.subkeys[level - 1], prefix, t)) {
        indices.push_back(db::split_index(leaf.chunk * sqrt_n + leaf.offset, t));
      }
      const db::Block parity = database.parity(indices);
      std::copy(parity.begin(), parity.end(), matrix.at(level, c).begin());
      db::xor_into(matrix.at(0, c), parity);
    }
  }
  return matrix;
}

SimReport simulate(const SimConfig& config) {
  if (!config.pipeline && config.queries_per_seed > (1u << (std::countr_zero(config.n) / 2)) / 2) {
    throw std::invalid_argument("queries per seed exceed the epoch budget");
  }
  SimReport report;
  report.config = config;

  for (std::uint32_t run = 0; run < config.seeds; ++run) {
    const std::uint64_t base = config.master_seed + std::uint64_t{1000003} * run;
    Rng run_rng(base);
    db::Database database = db::Database::random(config.n, config.entry_size, run_rng);
    server::Server server(database, base + 1);

    auto [client_end, server_end] = make_pipe();
    std::thread server_thread([&server, stream = std::move(server_end),
                               pipeline = config.pipeline]() mutable {
      try {
        server::Session(server, *stream, pipeline).run();
      } catch (const TransportClosed&) {
      }
    });

    CountingStream counted(*client_end);
    client::Config ccfg;
    ccfg.n = config.n;
    ccfg.entry_size = config.entry_size;
    ccfg.c1 = config.c1;
    ccfg.c2 = config.c2;
    ccfg.pipeline = config.pipeline;
    client::ClientState state =
        client::ClientState::from_offline_stream(ccfg, counted, base + 2);

    std::uint64_t uploaded = counted.bytes_written();
    std::uint64_t downloaded = counted.bytes_read();

    const std::vector<std::uint32_t> targets =
        distinct_indices(config.n, config.queries_per_seed, run_rng);
    for (std::uint32_t target : targets) {
      const db::Block expected = naive_pir(database, target);
      const auto start = std::chrono::steady_clock::now();
      try {
        const db::Block got = state.query(target, counted);
        if (got == expected) {
          ++report.correct;
        } else {
          ++report.incorrect;
        }
      } catch (const client::QueryFailed&) {
        ++report.misses;
      } catch (const client::BackupExhausted&) {
        ++report.backup_exhaustions;
      }
      report.latency_ms.push_back(elapsed_ms(start));
      ++report.total_queries;
    }

    report.upload_bytes += counted.bytes_written() - uploaded;
    report.download_bytes += counted.bytes_read() - downloaded;
    report.wire_queries += state.stats().wire_queries;
    for (std::uint32_t size : state.stats().upload_payload_sizes) {
      if (report.upload_payload_min == 0 || size < report.upload_payload_min) {
        report.upload_payload_min = size;
      }
      report.upload_payload_max = std::max(report.upload_payload_max, size);
    }
    for (std::uint32_t size : state.stats().matrix_section_sizes) {
      if (report.matrix_section_min == 0 || size < report.matrix_section_min) {
        report.matrix_section_min = size;
      }
      report.matrix_section_max = std::max(report.matrix_section_max, size);
    }
    report.max_epoch = std::max(report.max_epoch, state.epoch());

    client_end->close();
    server_thread.join();
  }
  return report;
}

std::vector<BenchEntry> bench_server(std::span<const std::uint32_t> n_list,
                                     std::uint32_t queries_per_n, bool include_naive,
                                     std::uint64_t seed) {
  std::vector<BenchEntry> table;
  Rng rng(seed);
  for (std::uint32_t n : n_list) {
    BenchEntry entry;
    entry.n = n;
    db::Database database = db::Database::random(n, 32, rng);
    const std::uint32_t t = database.t();

    std::vector<ggm::PuncturedKey> keys;
    for (std::uint32_t q = 0; q < queries_per_n; ++q) {
      const std::uint32_t chunk =
          static_cast<std::uint32_t>(rng.below(database.chunk_count()));
      keys.push_back(ggm::puncture(rng.next_seed(), ggm::TreePath::for_chunk(chunk, t)));
    }

    for (const ggm::PuncturedKey& pk : keys) {
      const auto start = std::chrono::steady_clock::now();
      const server::ParityMatrix matrix = server::answer(database, pk);
      entry.samples_ms.push_back(elapsed_ms(start));
      if (matrix.cols() != database.chunk_count()) {
        throw std::logic_error("benchmark answer has wrong shape");
      }
    }
    entry.median_ms = median(entry.samples_ms);

    if (include_naive) {
      std::vector<double> naive_samples;
      for (const ggm::PuncturedKey& pk : keys) {
        const auto start = std::chrono::steady_clock::now();
        answer_naive(database, pk);
        naive_samples.push_back(elapsed_ms(start));
      }
      entry.naive_median_ms = median(std::move(naive_samples));
    }
    table.push_back(std::move(entry));
  }
  return table;
}

namespace {

constexpr double kSignificance = 0.001;

StatTest finish(std::string name, const stats::ChiSquare& cs, bool expected_pass) {
  StatTest test;
  test.name = std::move(name);
  test.statistic = cs.statistic;
  test.df = cs.df;
  test.p_value = cs.p_value;
  test.passed = cs.p_value >= kSignificance;
  test.expected_pass = expected_pass;
  return test;
}

// A fresh key whose leaf at target.chunk lands on target.offset, found by
// rejection; mirrors how hints that match a query are distributed.
ggm::Seed containing_key(const db::DbIndex& target, std::uint32_t t, Rng& rng) {
  while (true) {
    ggm::Seed k = rng.next_seed();
    const ggm::Seed leaf =
        ggm::eval_path(k, ggm::TreePath::for_chunk(target.chunk, t));
    if (ggm::leaf_offset(leaf, t) == target.offset) return k;
  }
}

// Byte-value histogram of the query payload a client would send for
// `target`: puncture a containing key, resample it around a random positive
// constraint, and count the subkey bytes.
void wire_byte_histogram(const db::DbIndex& target, std::uint32_t t,
                         std::uint32_t trials, Rng& rng,
                         std::span<std::uint64_t> bins) {
  const ggm::TreePath x_path = ggm::TreePath::for_chunk(target.chunk, t);
  for (std::uint32_t i = 0; i < trials; ++i) {
    std::uint32_t y_chunk;
    do {
      y_chunk = static_cast<std::uint32_t>(rng.below(1u << t));
    } while (y_chunk == target.chunk);
    const std::uint32_t y_offset = static_cast<std::uint32_t>(rng.below(1u << t));

    const ggm::Seed k = containing_key(target, t, rng);
    const ggm::PuncturedKey pk = ggm::puncture(k, x_path);
    const ggm::PuncturedKey sent = ggm::resample(
        pk, x_path, ggm::IndexConstraint{ggm::Sign::positive, y_chunk, y_offset}, {},
        t, rng);
    for (const ggm::Seed& s : sent.subkeys) {
      for (std::uint8_t b : s.bytes) ++bins[b];
    }
  }
}

}  // namespace

std::vector<StatTest> stat_tests(std::uint64_t seed) {
  std::vector<StatTest> out;
  Rng rng(seed);

  // (a) After resampling around +y, the leaf offsets the fresh subkey
  // assigns to the other chunks in the replaced subtree stay uniform.
  {
    const std::uint32_t t = 3;
    const ggm::TreePath x_path{t, 0b100};
    const ggm::IndexConstraint y{ggm::Sign::positive, 0b111, 5};
    // LCP(100, 111) = 1, so the level-2 subkey covering {110, 111} is
    // replaced; chunk 110 is the unconstrained neighbor.
    std::vector<std::uint64_t> bins(1u << t, 0);
    for (std::uint32_t i = 0; i < 10000; ++i) {
      const ggm::PuncturedKey pk = ggm::puncture(rng.next_seed(), x_path);
      const ggm::PuncturedKey rk = ggm::resample(pk, x_path, y, {}, t, rng);
      const ggm::Seed neighbor = ggm::eval_path(rk.subkeys[1], ggm::TreePath{1, 0});
      ++bins[ggm::leaf_offset(neighbor, t)];
    }
    out.push_back(finish("resample-offset-uniformity", stats::uniform_fit(bins), true));
  }

  // (b) Query payload bytes must not depend on the target index.
  {
    const std::uint32_t t = 3;
    const std::uint32_t trials = 10000;
    const db::DbIndex x = db::split_index(5, t);
    const db::DbIndex x_prime = db::split_index(58, t);
    std::vector<std::uint64_t> bins_x(256, 0);
    std::vector<std::uint64_t> bins_xp(256, 0);
    wire_byte_histogram(x, t, trials, rng, bins_x);
    wire_byte_histogram(x_prime, t, trials, rng, bins_xp);
    out.push_back(finish("wire-bytes-differing-targets",
                         stats::two_sample(bins_x, bins_xp), true));

    std::vector<std::uint64_t> bins_again(256, 0);
    wire_byte_histogram(x, t, trials, rng, bins_again);
    out.push_back(finish("wire-bytes-identical-targets",
                         stats::two_sample(bins_x, bins_again), true));
  }

  // (c) The leaf-offset extractor is uniform over [0, 2^t); the mod-3
  // variant is the deliberately broken control.
  {
    const std::uint32_t t = 6;
    const ggm::TreePath path{t, 0b101010};
    std::vector<std::uint64_t> bins(1u << t, 0);
    std::vector<std::uint64_t> biased_bins(1u << t, 0);
    for (std::uint32_t i = 0; i < 100000; ++i) {
      const ggm::Seed leaf = ggm::eval_path(rng.next_seed(), path);
      ++bins[ggm::leaf_offset(leaf, t)];
      std::uint64_t v = 0;
      for (std::size_t b = ggm::kSeedBytes - 8; b < ggm::kSeedBytes; ++b) {
        v = (v << 8) | leaf.bytes[b];
      }
      ++biased_bins[v % 3];
    }
    out.push_back(finish("leaf-offset-uniformity", stats::uniform_fit(bins), true));
    out.push_back(
        finish("leaf-offset-mod3-control", stats::uniform_fit(biased_bins), false));
  }

  return out;
}

std::string SimReport::to_text() const {
  std::string s;
  s += "n=" + std::to_string(config.n) + " entry_size=" + std::to_string(config.entry_size) +
       " c1=" + std::to_string(config.c1) + " c2=" + std::to_string(config.c2) +
       " seeds=" + std::to_string(config.seeds) +
       " queries_per_seed=" + std::to_string(config.queries_per_seed) +
       " pipeline=" + (config.pipeline ? "on" : "off") + "\n";
  s += "queries: " + std::to_string(total_queries) + " correct: " + std::to_string(correct) +
       " incorrect: " + std::to_string(incorrect) + " misses: " + std::to_string(misses) +
       " backup_exhaustions: " + std::to_string(backup_exhaustions) + "\n";
  s += "correctness_rate: " + std::to_string(correctness_rate()) + "\n";
  s += "wire_queries: " + std::to_string(wire_queries) +
       " upload_bytes: " + std::to_string(upload_bytes) +
       " download_bytes: " + std::to_string(download_bytes) + "\n";
  s += "upload_payload: " + std::to_string(upload_payload_min) + ".." +
       std::to_string(upload_payload_max) +
       " matrix_section: " + std::to_string(matrix_section_min) + ".." +
       std::to_string(matrix_section_max) + "\n";
  s += "max_epoch: " + std::to_string(max_epoch) +
       " median_latency_ms: " + std::to_string(median(latency_ms)) + "\n";
  return s;
}

std::string SimReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"n", config.n},
                 {"entry_size", config.entry_size},
                 {"c1", config.c1},
                 {"c2", config.c2},
                 {"seeds", config.seeds},
                 {"queries_per_seed", config.queries_per_seed},
                 {"pipeline", config.pipeline},
                 {"master_seed", config.master_seed}};
  j["total_queries"] = total_queries;
  j["correct"] = correct;
  j["incorrect"] = incorrect;
  j["misses"] = misses;
  j["backup_exhaustions"] = backup_exhaustions;
  j["correctness_rate"] = correctness_rate();
  j["wire_queries"] = wire_queries;
  j["upload_bytes"] = upload_bytes;
  j["download_bytes"] = download_bytes;
  j["upload_payload_min"] = upload_payload_min;
  j["upload_payload_max"] = upload_payload_max;
  j["matrix_section_min"] = matrix_section_min;
  j["matrix_section_max"] = matrix_section_max;
  j["max_epoch"] = max_epoch;
  j["latency_ms"] = latency_ms;
  return j.dump(2);
}

}  // namespace pir::sim
