#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pir/database.hpp"
#include "pir/ggm.hpp"
#include "pir/parity_matrix.hpp"

namespace pir::sim {

struct SimConfig {
  std::uint32_t n = 4096;
  std::uint32_t entry_size = 32;
  std::uint32_t c1 = 8;
  std::uint32_t c2 = 24;
  std::uint32_t seeds = 100;
  std::uint32_t queries_per_seed = 32;
  bool pipeline = false;
  std::uint64_t master_seed = 1;
};

struct SimReport {
  SimConfig config;
  std::uint64_t total_queries = 0;
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
  std::uint64_t misses = 0;
  std::uint64_t backup_exhaustions = 0;
  std::uint64_t wire_queries = 0;
  // Online-phase frame bytes in each direction; the offline stream is not
  // included.
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  std::uint32_t upload_payload_min = 0;
  std::uint32_t upload_payload_max = 0;
  std::uint32_t matrix_section_min = 0;
  std::uint32_t matrix_section_max = 0;
  std::uint32_t max_epoch = 0;
  std::vector<double> latency_ms;

  double correctness_rate() const {
    return total_queries == 0
               ? 0.0
               : static_cast<double>(correct) / static_cast<double>(total_queries);
  }

  std::string to_text() const;
  std::string to_json() const;
};

// Ground-truth oracle: a plain lookup.
db::Block naive_pir(const db::Database& database, std::uint32_t x);

// Deliberately unmemoized answer: re-expands every subkey's subtree for
// every candidate chunk. Serves as the server oracle and the scaling
// baseline.
server::ParityMatrix answer_naive(const db::Database& database,
                                  const ggm::PuncturedKey& pk);

// Full offline+online protocol per seed over an in-process pipe, every
// answer compared against naive_pir. Failures are counted, never thrown.
SimReport simulate(const SimConfig& config);

struct BenchEntry {
  std::uint32_t n = 0;
  double median_ms = 0.0;
  double naive_median_ms = 0.0;
  std::vector<double> samples_ms;
};

std::vector<BenchEntry> bench_server(std::span<const std::uint32_t> n_list,
                                     std::uint32_t queries_per_n, bool include_naive,
                                     std::uint64_t seed);

struct StatTest {
  std::string name;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 0.0;
  bool passed = false;
  // The negative control is expected to fail; everything else to pass.
  bool expected_pass = true;
};

// Resample-offset uniformity, two-sample wire-byte comparisons, leaf-offset
// uniformity, and the deliberately biased extractor control. Significance
// 0.001 throughout.
std::vector<StatTest> stat_tests(std::uint64_t seed);

}  // namespace pir::sim
