// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria can be selected by name on the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "gradient_suite.hpp"
#include "harness.hpp"
#include "oracles.hpp"
#include "parser.hpp"
#include "stats.hpp"
#include "tagger.hpp"

using namespace morpho;

namespace {

const std::string kData = MORPHO_TEST_DATA;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- gradients

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  std::string worst_case, failed;
  for (const auto& name : gradsuite::case_names()) {
    auto r = gradsuite::run_case(name, 10);
    if (r.max_rel > worst) {
      worst = r.max_rel;
      worst_case = name + " " + r.worst;
    }
    if (!(r.max_rel < 1e-4)) failed += " " + name;
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = failed.empty() && t < 120;
  o.detail = std::to_string(gradsuite::case_names().size()) + " cases x 10 points, worst relative error " +
             fmt("%.2e", worst) + " (" + worst_case + "), " + fmt("%.1f s", t);
  if (!failed.empty()) o.detail += ", over 1e-4:" + failed;
  return o;
}

// ---------------------------------------------------------------- decoder

Outcome decoder() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  int mismatches = 0, total = 0;
  for (int n = 2; n <= 5; ++n)
    for (int trial = 0; trial < 1000; ++trial) {
      ad::Matrix m(n + 1, n);
      oracle::Scores s(n + 1, std::vector<double>(n));
      for (int h = 0; h <= n; ++h)
        for (int d = 0; d < n; ++d) {
          m(h, d) = Real(rng.uniform(-10, 10));
          s[h][d] = double(m(h, d));
        }
      ++total;
      if (decode_mst(m) != oracle::best_tree(s).heads) ++mismatches;
    }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 60,
          std::to_string(total) + " matrices (n = 2..5), " + std::to_string(mismatches) + " mismatches, " +
              fmt("%.1f s", t)};
}

// ---------------------------------------------------------------- metrics

Sentence tree_sentence(const std::vector<std::pair<int, std::string>>& arcs) {
  Sentence s;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    Token t;
    t.index = int(i) + 1;
    t.form = "t";
    t.upos = Upos::NOUN;
    t.head = arcs[i].first;
    t.deprel = arcs[i].second;
    s.tokens.push_back(t);
  }
  return s;
}

Outcome metrics() {
  Rng rng(99);
  const std::vector<std::string> rels = {"nsubj", "obj", "root", "amod", "punct"};
  const std::vector<std::string> tags = {"OTHR", "B-PER", "I-PER", "B-ORG", "I-ORG", "B-LOC", "I-LOC"};
  int attach_bad = 0, f1_bad = 0, acc_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    // Attachment scores.
    std::vector<Sentence> gold, pred;
    std::vector<std::vector<std::pair<int, std::string>>> og, op;
    const int sentences = 1 + int(rng.below(8));
    for (int s = 0; s < sentences; ++s) {
      const int n = 1 + int(rng.below(10));
      og.emplace_back();
      op.emplace_back();
      for (int i = 0; i < n; ++i) {
        og.back().emplace_back(int(rng.below(n + 1)), rels[rng.below(rels.size())]);
        const bool copy = rng.below(2) == 0;
        op.back().emplace_back(copy ? og.back().back().first : int(rng.below(n + 1)),
                               copy && rng.below(2) ? og.back().back().second : rels[rng.below(rels.size())]);
      }
      gold.push_back(tree_sentence(og.back()));
      pred.push_back(tree_sentence(op.back()));
    }
    auto r = attachment_scores(gold, pred);
    auto o = oracle::recount(og, op);
    if (long(r.tokens) != o.tokens || long(r.head_correct) != o.heads || long(r.both_correct) != o.both ||
        r.uas() != double(o.heads) / double(o.tokens) || r.las() != double(o.both) / double(o.tokens))
      ++attach_bad;

    // Span-level weighted F1.
    LabelSequences g, p;
    for (int s = 0; s < sentences; ++s) {
      const auto n = 1 + rng.below(12);
      std::vector<std::string> gs, ps;
      for (std::size_t i = 0; i < n; ++i) {
        gs.push_back(tags[rng.below(tags.size())]);
        ps.push_back(rng.below(3) == 0 ? tags[rng.below(tags.size())] : gs.back());
      }
      g.push_back(gs);
      p.push_back(ps);
    }
    const double f1 = weighted_f1(g, p).weighted_f1;
    const double of1 = oracle::weighted_span_f1(g, p);
    if (std::fabs(f1 - of1) > 1e-12 * std::max(1.0, std::fabs(of1))) ++f1_bad;

    // Accuracy.
    const auto n = 1 + rng.below(50);
    std::vector<int> gl, pl;
    long correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      gl.push_back(int(rng.below(2)));
      pl.push_back(int(rng.below(2)));
      if (gl.back() == pl.back()) ++correct;
    }
    if (accuracy(gl, pl) != double(correct) / double(n)) ++acc_bad;
  }
  return {attach_bad == 0 && f1_bad == 0 && acc_bad == 0,
          "500 corpora each; mismatches UAS/LAS " + std::to_string(attach_bad) + ", span F1 " +
              std::to_string(f1_bad) + ", accuracy " + std::to_string(acc_bad)};
}

// ---------------------------------------------------------------- statistics

Outcome statistics() {
  Rng rng(7);
  int wilcoxon_bad = 0, wilcoxon_total = 0;
  for (int n = 1; n <= 10; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        // Alternate coarse values (ties, zero differences) and continuous ones.
        a[i] = trial % 2 ? double(rng.below(6)) : rng.uniform(0, 1);
        b[i] = trial % 2 ? double(rng.below(6)) : rng.uniform(0, 1);
      }
      auto o = oracle::wilcoxon(a, b);
      if (o.n == 0) continue;
      ++wilcoxon_total;
      auto r = stats::wilcoxon_signed_rank(a, b);
      if (!r.exact || r.n != std::size_t(o.n) || r.statistic != o.statistic || std::fabs(r.p_value - o.p) > 1e-12)
        ++wilcoxon_bad;
    }
  const double z = stats::two_proportion_ztest(880, 1000, 850, 1000).statistic;
  double cdf_err = 0;
  for (double x = -8; x <= 8; x += 1.0 / 64)
    cdf_err = std::max(cdf_err, std::fabs(stats::normal_cdf(x) - oracle::normal_cdf_series(x)));
  Outcome o;
  o.pass = wilcoxon_bad == 0 && std::fabs(z - 1.963) < 1e-3 && cdf_err < 1e-7;
  o.detail = "Wilcoxon " + std::to_string(wilcoxon_bad) + "/" + std::to_string(wilcoxon_total) +
             " disagreements (n <= 10), z = " + fmt("%.6f", z) + ", max CDF error " + fmt("%.2e", cdf_err);
  return o;
}

// ---------------------------------------------------------------- training runs

ExperimentConfig reduced_dp() {
  ExperimentConfig c;
  c.task = Task::Dp;
  c.data.train = kData + "/twt/train.conllu";
  c.data.dev = kData + "/twt/dev.conllu";
  c.word_dim = 50;
  c.extra_lstm = 50;
  c.layers = 2;
  c.hidden = 100;
  c.arc_dim = 100;
  c.label_dim = 50;
  return c;
}

Outcome capacity() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = reduced_dp();
  c.dropout = 0;
  c.min_word_count = 1;
  c.epochs = 200;
  c.patience = 200;
  c.data.max_train_sentences = 50;
  DpData data = load_dp_data(c);
  data.dev = data.train;  // selection and stopping both look at the training sentences
  DpRunner runner(c, data);
  TrainOptions opts;
  opts.on_epoch = [](const EpochRecord& rec, TaskRunner&) { return rec.dev.at("uas") < 0.99; };
  auto tr = train(runner, c, opts);
  const double uas = runner.evaluate(Split::Train).at("uas");
  const double t = seconds_since(t0);
  return {uas >= 0.99 && tr.epochs_run <= 200 && t < 600,
          fmt("train UAS %.4f after %.0f epochs on 50 sentences, %.1f s", uas, tr.epochs_run, t)};
}

struct TrendRuns {
  std::vector<double> baseline, full_gold, full_noisy;
  double gold_seconds = 0;
};

double dev_las(const ExperimentConfig& c, const DpData& data) { return run_dp(c, data).cells.at(0).test.at("las"); }

const TrendRuns& trend_runs() {
  static TrendRuns runs = [] {
    TrendRuns r;
    ExperimentConfig base = reduced_dp();
    base.epochs = 20;
    base.data.max_train_sentences = 500;
    const DpData gold = load_dp_data(base);
    ExperimentConfig noisy_cfg = base;
    noisy_cfg.feature_source = FeatureSource::Noisy;
    noisy_cfg.noise_rate = 0.15;
    DpData noisy = gold;
    prepare_dp_data(noisy, noisy_cfg);

    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed : {1, 2, 3}) {
      ExperimentConfig b = base, f = base;
      b.seed = f.seed = seed;
      f.parts.upos = f.parts.feats = true;
      r.baseline.push_back(dev_las(b, gold));
      r.full_gold.push_back(dev_las(f, gold));
      std::printf("  seed %llu: baseline LAS %.4f, +UPOS+feats LAS %.4f\n", (unsigned long long)seed,
                  r.baseline.back(), r.full_gold.back());
      std::fflush(stdout);
    }
    r.gold_seconds = seconds_since(t0);
    // The baseline reads no UPOS or features, so corrupting them leaves it
    // unchanged; the noisy comparison reuses the baseline runs.
    for (std::uint64_t seed : {1, 2, 3}) {
      ExperimentConfig f = noisy_cfg;
      f.seed = seed;
      f.parts.upos = f.parts.feats = true;
      r.full_noisy.push_back(dev_las(f, noisy));
      std::printf("  seed %llu: noisy +UPOS+feats LAS %.4f\n", (unsigned long long)seed, r.full_noisy.back());
      std::fflush(stdout);
    }
    return r;
  }();
  return runs;
}

double mean_gain(const std::vector<double>& variant, const std::vector<double>& baseline) {
  double s = 0;
  for (std::size_t i = 0; i < variant.size(); ++i) s += variant[i] - baseline[i];
  return 100.0 * s / double(variant.size());
}

Outcome gold_trend() {
  const auto& r = trend_runs();
  const double gain = mean_gain(r.full_gold, r.baseline);
  return {gain >= 1.0 && r.gold_seconds < 3600,
          fmt("mean dev LAS gain of +UPOS+feats over the baseline %.2f points over 3 seeds, %.0f s", gain,
              r.gold_seconds)};
}

Outcome noisy_trend() {
  const auto& r = trend_runs();
  const double gold = mean_gain(r.full_gold, r.baseline);
  const double noisy = mean_gain(r.full_noisy, r.baseline);
  return {noisy < gold, fmt("mean gain with 15%% noisy features %.2f points vs %.2f with gold features", noisy, gold)};
}

// Sentences of random UPOS ending in a PUNCT token; label 1 with at least
// three ADJ tokens.
std::vector<LabeledSentence> adjective_corpus(std::size_t count, Rng& rng) {
  const std::vector<Upos> other = {Upos::NOUN, Upos::VERB, Upos::ADV, Upos::DET, Upos::ADP,
                                   Upos::PRON, Upos::NUM,  Upos::AUX, Upos::CCONJ};
  std::vector<LabeledSentence> out;
  for (std::size_t i = 0; i < count; ++i) {
    const int length = 4 + int(rng.below(12));
    const int adjectives = int(rng.below(std::min(6, length) + 1));
    std::vector<Upos> tags(length, Upos::NOUN);
    for (int k = 0; k < length; ++k) tags[k] = k < adjectives ? Upos::ADJ : other[rng.below(other.size())];
    rng.shuffle(tags);
    tags.push_back(Upos::PUNCT);
    LabeledSentence ex;
    ex.label = adjectives >= 3 ? 1 : 0;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      Token t;
      t.index = int(k) + 1;
      t.form = std::string(upos_name(tags[k]));
      t.upos = tags[k];
      ex.sentence.tokens.push_back(t);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

Outcome pooling() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(31);
  CfData data;
  data.corpus = adjective_corpus(3000, rng);
  SplitIndices split;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) (i < 2000 ? split.train : i < 2500 ? split.dev : split.test).push_back(i);
  ExperimentConfig c;
  c.task = Task::Cf;
  c.parts.word = false;
  c.parts.upos = true;
  c.pooling = "weighted";
  c.epochs = 50;
  CfRunner runner(c, data, split);
  auto tr = train(runner, c);
  const double acc = runner.evaluate(Split::Test).at("accuracy");
  const double t = seconds_since(t0);
  return {acc > 0.95 && tr.epochs_run <= 50,
          fmt("held-out accuracy %.4f (best dev %.4f at epoch %.0f), %.1f s", acc, tr.best_dev, tr.best_epoch, t)};
}

// Every number of an experiment, rendered for exact comparison.
std::string fingerprint(const ExperimentResult& r) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& cell : r.cells) {
    out << cell.cell << ' ' << cell.seed << ' ' << cell.best_epoch << ' ' << cell.best_dev << '\n';
    for (const auto& [k, v] : cell.test.values) out << k << '=' << v << '\n';
  }
  out << render_text(experiment_table(r)) << render_csv(experiment_table(r));
  return out.str();
}

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  ExperimentConfig dp = reduced_dp();
  dp.epochs = 3;
  dp.data.max_train_sentences = 60;
  dp.data.test = kData + "/twt/test.conllu";
  dp.parts.upos = dp.parts.feats = true;
  configs.push_back(dp);
  ExperimentConfig ner;
  ner.task = Task::Ner;
  ner.data.corpus = kData + "/ner/corpus.txt";
  ner.data.annotation = kData + "/ner/annotation.conllu";
  ner.word_dim = 20;
  ner.layers = 1;
  ner.hidden = 20;
  ner.epochs = 3;
  ner.folds = 4;
  ner.fold = 2;
  ner.parts.upos = true;
  configs.push_back(ner);
  ExperimentConfig cf;
  cf.task = Task::Cf;
  cf.data.corpus = kData + "/cf/corpus.txt";
  cf.data.annotation = kData + "/cf/annotation.conllu";
  cf.word_dim = 20;
  cf.layers = 1;
  cf.hidden = 20;
  cf.epochs = 3;
  cf.repeats = 2;
  cf.pooling = "lstm";
  cf.parts.upos = cf.parts.feats = true;
  configs.push_back(cf);

  std::string differing;
  std::size_t numbers = 0;
  for (const auto& c : configs) {
    const std::string a = fingerprint(run_experiment(c));
    const std::string b = fingerprint(run_experiment(c));
    numbers += std::count(a.begin(), a.end(), '\n');
    if (a != b) differing += std::string(" ") + task_name(c.task);
  }
  return {differing.empty(), differing.empty() ? "dp, ner and cf cells rerun identically (" +
                                                     std::to_string(numbers) + " report lines compared)"
                                               : "reruns differ for" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradients", gradients},   {"decoder", decoder},         {"metrics", metrics},
      {"statistics", statistics}, {"capacity", capacity},       {"gold-trend", gold_trend},
      {"noisy-trend", noisy_trend}, {"pooling", pooling},       {"determinism", determinism},
  };
  std::set<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && !selected.count(name)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
