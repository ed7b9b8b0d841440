#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace morpho::stats {

struct TestResult {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  std::size_t n = 0;  // effective sample size (non-zero differences / total trials)
  bool exact = false;
  bool reject() const { return p_value < alpha; }
};

// Standard normal CDF, Phi(x) = erfc(-x / sqrt 2) / 2. std::erfc is accurate
// to a few ulp over the whole real line.
double normal_cdf(double x);

inline constexpr std::size_t kWilcoxonExactLimit = 12;

// Two-sided Wilcoxon signed-rank test on paired scores. The statistic is the
// signed rank sum  sum_i sign(a_i - b_i) * rank(|a_i - b_i|)  over non-zero
// differences (ties get average ranks), so swapping the samples negates it.
// p is exact (enumeration of all 2^n sign patterns) for n <= 12, otherwise
// the normal approximation with continuity correction.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                double alpha = 0.01);
// Forces the normal approximation regardless of n (n >= 1).
TestResult wilcoxon_signed_rank_asymptotic(std::span<const double> a, std::span<const double> b,
                                           double alpha = 0.01);

// Two-sided z-test for the equality of two proportions x1/n1 and x2/n2 with
// the pooled variance estimate.
TestResult two_proportion_ztest(long long x1, long long n1, long long x2, long long n2,
                                double alpha = 0.01);

// One aligned row: test, n, statistic, p, alpha, verdict. A rejected null is
// marked with underscores, e.g. "_reject_".
std::string format_result_row(const TestResult& r);
std::string format_result_header();

}  // namespace morpho::stats
