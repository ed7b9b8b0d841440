#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace morpho::stats {
namespace {

struct SignedRanks {
  // Ranks are doubled so that average ranks of ties stay integral.
  std::vector<long long> doubled_rank;
  std::vector<int> sign;
};

SignedRanks signed_ranks(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(ErrorCode::InvalidArgument, "paired samples differ in length: " + std::to_string(a.size()) +
                                         " vs " + std::to_string(b.size()));
  if (a.empty()) fail(ErrorCode::InvalidArgument, "paired sample is empty");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      fail(ErrorCode::Numeric, "non-finite score in paired sample");
    double diff = a[i] - b[i];
    if (diff != 0.0) d.push_back(diff);
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::fabs(d[x]) < std::fabs(d[y]); });
  SignedRanks out;
  out.doubled_rank.assign(d.size(), 0);
  out.sign.assign(d.size(), 0);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    // positions i..j share ranks i+1..j+1; doubled average = i+j+2
    for (std::size_t k = i; k <= j; ++k) out.doubled_rank[order[k]] = static_cast<long long>(i + j + 2);
    i = j + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i) out.sign[i] = d[i] > 0 ? 1 : -1;
  return out;
}

// 2 * (1 - Phi(z)) without cancellation in the upper tail.
double two_sided_tail(double z) { return std::erfc(z / std::sqrt(2.0)); }

TestResult degenerate(const char* name, double alpha) {
  TestResult r;
  r.test = name;
  r.alpha = alpha;
  r.p_value = 1.0;
  r.statistic = 0.0;
  r.n = 0;
  return r;
}

TestResult wilcoxon_impl(std::span<const double> a, std::span<const double> b, double alpha,
                         bool allow_exact) {
  SignedRanks sr = signed_ranks(a, b);
  const std::size_t n = sr.sign.size();
  if (n == 0) return degenerate("wilcoxon", alpha);
  long long t2 = 0;  // doubled signed rank sum
  for (std::size_t i = 0; i < n; ++i) t2 += sr.sign[i] * sr.doubled_rank[i];
  TestResult r;
  r.test = "wilcoxon";
  r.alpha = alpha;
  r.n = n;
  r.statistic = static_cast<double>(t2) / 2.0;
  const long long target = std::llabs(t2);
  if (allow_exact && n <= kWilcoxonExactLimit) {
    std::uint64_t hits = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      long long s = 0;
      for (std::size_t i = 0; i < n; ++i) s += ((mask >> i) & 1) ? sr.doubled_rank[i] : -sr.doubled_rank[i];
      if (std::llabs(s) >= target) ++hits;
    }
    r.p_value = static_cast<double>(hits) / static_cast<double>(total);
    r.exact = true;
  } else {
    // Var(T) = sum r_i^2 exactly, which already accounts for tied ranks.
    double var = 0.0;
    for (long long dr : sr.doubled_rank) var += (dr / 2.0) * (dr / 2.0);
    // T moves in steps of 2, so the continuity correction on T is 1.
    double z = std::max(0.0, std::fabs(r.statistic) - 1.0) / std::sqrt(var);
    r.p_value = std::min(1.0, two_sided_tail(z));
  }
  return r;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
  return wilcoxon_impl(a, b, alpha, true);
}

TestResult wilcoxon_signed_rank_asymptotic(std::span<const double> a, std::span<const double> b,
                                           double alpha) {
  return wilcoxon_impl(a, b, alpha, false);
}

TestResult two_proportion_ztest(long long x1, long long n1, long long x2, long long n2, double alpha) {
  if (n1 < 1 || n2 < 1) fail(ErrorCode::InvalidArgument, "z-test requires n >= 1 in both groups");
  if (x1 < 0 || x1 > n1 || x2 < 0 || x2 > n2)
    fail(ErrorCode::InvalidArgument, "z-test requires 0 <= x <= n in both groups");
  TestResult r;
  r.test = "ztest";
  r.alpha = alpha;
  r.n = static_cast<std::size_t>(n1 + n2);
  const double p1 = double(x1) / double(n1);
  const double p2 = double(x2) / double(n2);
  const double pooled = double(x1 + x2) / double(n1 + n2);
  const double var = pooled * (1.0 - pooled) * (1.0 / double(n1) + 1.0 / double(n2));
  if (var <= 0.0) {
    // pooled proportion is 0 or 1, so both groups are identical
    if (p1 != p2) fail(ErrorCode::Numeric, "z-test undefined: zero pooled variance with unequal proportions");
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.statistic = (p1 - p2) / std::sqrt(var);
  r.p_value = std::min(1.0, two_sided_tail(std::fabs(r.statistic)));
  return r;
}

std::string format_result_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %6s %12s %10s %7s  %s", "test", "n", "statistic", "p-value",
                "alpha", "result");
  return buf;
}

std::string format_result_row(const TestResult& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %6zu %12.4f %10.6f %7.4f  %s", r.test.c_str(), r.n,
                r.statistic, r.p_value, r.alpha, r.reject() ? "_reject_" : "keep");
  return buf;
}

}  // namespace morpho::stats
