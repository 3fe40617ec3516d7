#include "pir/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pir::stats {

namespace {

// Series expansion of the lower regularized gamma P(a, x); converges fast
// for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x); converges fast for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) {
    throw std::invalid_argument("gamma Q needs a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_p_value(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, statistic / 2.0);
}

ChiSquare uniform_fit(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) {
    throw std::invalid_argument("uniform fit needs at least 2 bins");
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  if (total == 0) {
    throw std::invalid_argument("uniform fit needs observations");
  }
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double statistic = 0.0;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    statistic += d * d / expected;
  }
  const double df = static_cast<double>(counts.size() - 1);
  return ChiSquare{statistic, df, chi_square_p_value(statistic, df)};
}

ChiSquare two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("two-sample test needs matching bin counts");
  }
  std::uint64_t total_a = 0;
  std::uint64_t total_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    total_a += a[i];
    total_b += b[i];
  }
  if (total_a != total_b || total_a == 0) {
    throw std::invalid_argument("two-sample test assumes equal nonzero trial counts");
  }
  double statistic = 0.0;
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint64_t sum = a[i] + b[i];
    if (sum == 0) continue;
    ++occupied;
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    statistic += d * d / static_cast<double>(sum);
  }
  if (occupied < 2) {
    throw std::invalid_argument("two-sample test needs at least 2 occupied bins");
  }
  const double df = static_cast<double>(occupied - 1);
  return ChiSquare{statistic, df, chi_square_p_value(statistic, df)};
}

}  // namespace pir::stats
