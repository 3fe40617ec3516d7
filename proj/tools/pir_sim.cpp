#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pir/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"End-to-end PIR simulator and benchmark driver"};
  pir::sim::SimConfig cfg;
  std::string report_format = "text";
  bool bench = false;
  bool stat_tests = false;
  app.add_option("--n", cfg.n, "database size, a power of 4");
  app.add_option("--entry-size", cfg.entry_size, "bytes per entry");
  app.add_option("--seeds", cfg.seeds, "independent runs");
  app.add_option("--queries", cfg.queries_per_seed, "queries per run");
  app.add_option("--c1", cfg.c1, "primary hints per sqrt(n)");
  app.add_option("--c2", cfg.c2, "backup hints per chunk");
  app.add_option("--master-seed", cfg.master_seed, "seed for all run randomness");
  app.add_flag("--pipeline", cfg.pipeline, "stream next-epoch chunks with answers");
  app.add_option("--report", report_format, "report format")
      ->check(CLI::IsMember({"json", "text"}));
  app.add_flag("--bench", bench, "measure server answer latency scaling instead");
  app.add_flag("--stat-tests", stat_tests, "run the distribution test battery instead");
  CLI11_PARSE(app, argc, argv);

  try {
    if (bench) {
      const std::vector<std::uint32_t> sizes{1u << 12, 1u << 16};
      const auto table = pir::sim::bench_server(sizes, 50, true, cfg.master_seed);
      for (const pir::sim::BenchEntry& entry : table) {
        std::printf("n=%u median_ms=%.3f naive_median_ms=%.3f\n", entry.n,
                    entry.median_ms, entry.naive_median_ms);
      }
      if (table.size() == 2 && table[0].median_ms > 0) {
        std::printf("scaling_ratio=%.2f\n", table[1].median_ms / table[0].median_ms);
      }
      return 0;
    }
    if (stat_tests) {
      bool all_ok = true;
      for (const pir::sim::StatTest& test : pir::sim::stat_tests(cfg.master_seed)) {
        const bool ok = test.passed == test.expected_pass;
        all_ok = all_ok && ok;
        std::printf("%-32s stat=%10.2f df=%5.0f p=%.6f %s\n", test.name.c_str(),
                    test.statistic, test.df, test.p_value,
                    ok ? "as expected" : "UNEXPECTED");
      }
      return all_ok ? 0 : 1;
    }
    const pir::sim::SimReport report = pir::sim::simulate(cfg);
    if (report_format == "json") {
      std::cout << report.to_json() << std::endl;
    } else {
      std::cout << report.to_text();
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
