#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. They deliberately avoid the toolkit's own helpers.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Scores = std::vector<std::vector<double>>;  // [head][dependent], head 0 = ROOT

inline bool is_single_rooted_tree(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int d = 0; d < n; ++d) {
    if (heads[d] == 0) ++roots;
    if (heads[d] == d + 1) return false;
  }
  if (roots != 1) return false;
  for (int d = 1; d <= n; ++d) {
    int cur = d;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) return false;
      cur = heads[cur - 1];
    }
  }
  return true;
}

struct Tree {
  std::vector<int> heads;
  double score = -INFINITY;
};

// Enumerates all (n+1)^n head vectors.
inline Tree best_tree(const Scores& s) {
  const int n = static_cast<int>(s.empty() ? 0 : s[0].size());
  Tree best;
  std::vector<int> heads(n, 0);
  while (true) {
    if (is_single_rooted_tree(heads)) {
      double score = 0;
      for (int d = 0; d < n; ++d) score += s[heads[d]][d];
      if (score > best.score) best = {heads, score};
    }
    int k = 0;
    while (k < n && heads[k] == n) heads[k++] = 0;
    if (k == n) break;
    ++heads[k];
  }
  return best;
}

// ---------------------------------------------------------------- metrics

struct Attachment {
  long tokens = 0, heads = 0, both = 0;
};

inline Attachment recount(const std::vector<std::vector<std::pair<int, std::string>>>& gold,
                          const std::vector<std::vector<std::pair<int, std::string>>>& pred) {
  Attachment a;
  for (std::size_t i = 0; i < gold.size(); ++i)
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      ++a.tokens;
      if (gold[i][t].first == pred[i][t].first) {
        ++a.heads;
        if (gold[i][t].second == pred[i][t].second) ++a.both;
      }
    }
  return a;
}

// Chunks in the conlleval sense: a chunk of class C starts at B-C, or at
// I-C not preceded by B-C/I-C, and extends over following I-C tags.
inline std::set<std::tuple<std::string, int, int>> chunks(const std::vector<std::string>& tags) {
  static const std::set<std::string> classes = {"PER", "ORG", "LOC"};
  auto cls = [&](const std::string& t) -> std::string {
    if (t.size() < 3 || (t[0] != 'B' && t[0] != 'I') || t[1] != '-') return "";
    std::string c = t.substr(2);
    return classes.count(c) ? c : "";
  };
  std::set<std::tuple<std::string, int, int>> out;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n; ++i) {
    const std::string c = cls(tags[i]);
    if (c.empty()) continue;
    const bool starts = tags[i][0] == 'B' || i == 0 || cls(tags[i - 1]) != c;
    if (!starts) continue;
    int j = i;
    while (j + 1 < n && tags[j + 1] == "I-" + c) ++j;
    out.insert({c, i, j});
  }
  return out;
}

inline double weighted_span_f1(const std::vector<std::vector<std::string>>& gold,
                               const std::vector<std::vector<std::string>>& pred) {
  std::map<std::string, double> g, p, tp;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto gs = chunks(gold[i]);
    auto ps = chunks(pred[i]);
    for (const auto& c : gs) g[std::get<0>(c)] += 1;
    for (const auto& c : ps) {
      p[std::get<0>(c)] += 1;
      if (gs.count(c)) tp[std::get<0>(c)] += 1;
    }
  }
  double total = 0, weighted = 0;
  for (const char* c : {"PER", "ORG", "LOC"}) total += g[c];
  if (total == 0) return 0.0;
  for (const char* c : {"PER", "ORG", "LOC"}) {
    const double f1 = (g[c] + p[c]) > 0 ? 2 * tp[c] / (g[c] + p[c]) : 0.0;
    weighted += g[c] / total * f1;
  }
  return weighted;
}

// ---------------------------------------------------------------- statistics

struct Wilcoxon {
  double statistic = 0;
  double p = 1;
  int n = 0;
};

// Signed rank sum over non-zero differences (average ranks on ties) and the
// two-sided p-value from all 2^n sign assignments.
inline Wilcoxon wilcoxon(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const int n = static_cast<int>(d.size());
  std::vector<double> rank(n);
  for (int i = 0; i < n; ++i) {
    int less = 0, equal = 0;
    for (int j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++less;
      if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  Wilcoxon w;
  w.n = n;
  for (int i = 0; i < n; ++i) w.statistic += d[i] > 0 ? rank[i] : -rank[i];
  if (n == 0) return w;
  long extreme = 0;
  const long patterns = 1L << n;
  for (long mask = 0; mask < patterns; ++mask) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += (mask >> i & 1) ? rank[i] : -rank[i];
    if (std::fabs(s) >= std::fabs(w.statistic) - 1e-9) ++extreme;
  }
  w.p = double(extreme) / double(patterns);
  return w;
}

// Phi(x) = 1/2 + phi(x) * sum_k x^(2k+1) / (1*3*...*(2k+1)), summed in
// long double until the terms vanish.
inline double normal_cdf_series(double x) {
  const long double xl = x;
  long double term = xl, sum = xl;
  for (int k = 1; k < 2000; ++k) {
    term *= xl * xl / (2 * k + 1);
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-30L * std::fabs(static_cast<double>(sum))) break;
  }
  const long double pdf = std::exp(-xl * xl / 2) / std::sqrt(2 * 3.14159265358979323846264338327950288L);
  return static_cast<double>(0.5L + pdf * sum);
}

}  // namespace oracle
