#pragma once

#include <cstdint>
#include <span>

namespace pir::stats {

// Upper regularized incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double regularized_gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
double chi_square_p_value(double statistic, double df);

struct ChiSquare {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Goodness of fit against the uniform distribution over counts.size() bins.
ChiSquare uniform_fit(std::span<const std::uint64_t> counts);

// Two-sample test for equal underlying distributions, equal trial counts:
// sum (a_i - b_i)^2 / (a_i + b_i) over bins with any mass, df = bins - 1.
ChiSquare two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

}  // namespace pir::stats
