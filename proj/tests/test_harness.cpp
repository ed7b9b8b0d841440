#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "harness.hpp"

using namespace morpho;

namespace {

class FakeModel : public Model {
 public:
  FakeModel() : Model(ExperimentConfig{}) { store_.add_uniform("w", 2, 1, 1.0, 1); }
  ad::ParameterStore& params() override { return store_; }
  ad::Var loss(ad::Graph& g, const Sentence&, int, const ContextDump*, std::size_t) override {
    ad::Var w = g.param(store_.get("w"));
    return ad::sum(ad::mul(w, w));
  }
  std::string meta() const override { return "{}"; }

 private:
  ad::ParameterStore store_;
};

// Dev metrics follow a script; the loss turns NaN at a chosen example.
class ScriptedRunner : public TaskRunner {
 public:
  explicit ScriptedRunner(std::vector<double> dev, int nan_at = -1) : dev_(std::move(dev)), nan_at_(nan_at) {}
  Model& model() override { return model_; }
  std::size_t train_size() const override { return 4; }
  ad::Var example_loss(ad::Graph& g, std::size_t i) override {
    if (int(i) == nan_at_) return g.input(ad::Matrix::Constant(1, 1, NAN));
    return model_.loss(g, {}, 0, nullptr, 0);
  }
  Metrics evaluate(Split) override {
    Metrics m;
    m.selection = dev_.at(calls_++);
    // Tag the metric with the parameter value so restoring can be observed.
    m.values["w0"] = model_.params().get("w").value(0, 0);
    return m;
  }
  int calls() const { return calls_; }

 private:
  FakeModel model_;
  std::vector<double> dev_;
  int nan_at_;
  int calls_ = 0;
};

ExperimentConfig epochs(int n) {
  ExperimentConfig c;
  c.epochs = n;
  c.adam.lr = 0.05;
  return c;
}

ExperimentConfig tiny(Task task) {
  ExperimentConfig c;
  c.task = task;
  const std::string data = MORPHO_TEST_DATA;
  if (task == Task::Dp) {
    c.data.train = data + "/twt/train.conllu";
    c.data.dev = data + "/twt/dev.conllu";
    c.data.max_train_sentences = 30;
  } else {
    const std::string dir = data + (task == Task::Ner ? "/ner/" : "/cf/");
    c.data.corpus = dir + "corpus.txt";
    c.data.annotation = dir + "annotation.conllu";
  }
  c.word_dim = 8;
  c.upos_dim = 3;
  c.feat_dim = 2;
  c.layers = 1;
  c.hidden = 8;
  c.arc_dim = 8;
  c.label_dim = 4;
  c.pool_hidden = 3;
  c.epochs = 2;
  c.folds = 4;
  c.fold = 1;
  c.repeats = 2;
  return c;
}

}  // namespace

TEST_CASE("early stopping keeps the first best epoch and stops after the patience") {
  EarlyStopper s(5);
  const double trace[] = {0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.9};
  int stopped = 0;
  for (int e = 1; e <= 8; ++e) {
    s.update(e, trace[e - 1]);
    if (s.should_stop()) {
      stopped = e;
      break;
    }
  }
  CHECK(stopped == 7);
  CHECK(s.best_epoch() == 2);
  CHECK(s.best() == 0.6);

  EarlyStopper rising(2);
  for (int e = 1; e <= 20; ++e) {
    CHECK(rising.update(e, e * 0.01));
    CHECK_FALSE(rising.should_stop());
  }
  CHECK(rising.best_epoch() == 20);
}

TEST_CASE("training stops early and restores the parameters of the best epoch") {
  ScriptedRunner runner({0.5, 0.6, 0.6, 0.6, 0.6, 0.6, 0.6, 0.9, 0.9, 0.9});
  auto r = train(runner, epochs(10));
  CHECK(r.epochs_run == 7);
  CHECK(r.best_epoch == 2);
  CHECK(r.best_dev == 0.6);
  REQUIRE(r.history.size() == 7);
  CHECK(r.history[1].improved);
  CHECK_FALSE(r.history[2].improved);
  CHECK(runner.model().params().get("w").value(0, 0) == Real(r.history[1].dev.at("w0")));
  CHECK(r.history[0].loss > r.history[6].loss);

  ScriptedRunner rising({0.1, 0.2, 0.3, 0.4});
  CHECK(train(rising, epochs(4)).epochs_run == 4);
}

TEST_CASE("the epoch callback can end training") {
  ScriptedRunner runner({0.1, 0.2, 0.3, 0.4, 0.5});
  TrainOptions opts;
  opts.on_epoch = [](const EpochRecord& rec, TaskRunner&) { return rec.epoch < 2; };
  CHECK(train(runner, epochs(5), opts).epochs_run == 2);
}

TEST_CASE("a non-finite loss aborts training with a numeric error") {
  ScriptedRunner runner({0.1, 0.2}, 2);
  try {
    train(runner, epochs(2));
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("each epoch writes one JSON line to the run log") {
  ScriptedRunner runner({0.3, 0.2});
  std::ostringstream log;
  TrainOptions opts;
  opts.log = &log;
  opts.cell = "fold 0";
  auto c = epochs(2);
  train(runner, c, opts);
  std::istringstream lines(log.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j["event"] == "epoch");
    CHECK(j["cell"] == "fold 0");
    CHECK(j["config_hash"] == config_hash(c));
    CHECK(j["epoch"] == ++n);
    CHECK(j["dev"].contains("selection"));
  }
  CHECK(n == 2);
}

TEST_CASE("the ablation grid toggles only the morphological parts") {
  ExperimentConfig base;
  base.parts.ctx = true;
  auto grid = ablation_grid(base);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].first == "baseline");
  CHECK(grid[2].first == "+UPOS+feats");
  std::set<std::string> hashes;
  for (const auto& [label, c] : grid) {
    hashes.insert(config_hash(c));
    CHECK(c.parts.ctx);
    CHECK(c.parts.word);
  }
  CHECK(hashes.size() == 4);
  CHECK((grid[1].second.parts.upos && !grid[1].second.parts.feats));
  CHECK((!grid[3].second.parts.upos && grid[3].second.parts.feats));
}

TEST_CASE("a dp cell is reproducible and logs its selected epoch") {
  auto c = tiny(Task::Dp);
  c.parts.upos = true;
  auto data = load_dp_data(c);
  std::ostringstream log;
  ExperimentOptions opts;
  opts.log = &log;
  auto a = run_dp(c, data, opts);
  auto b = run_dp(c, data);
  REQUIRE(a.cells.size() == 1);
  CHECK(a.cells[0].test.values == b.cells[0].test.values);
  CHECK(a.cells[0].best_dev == b.cells[0].best_dev);
  CHECK(a.cells[0].test.at("tokens") > 0);
  CHECK(log.str().find("\"event\":\"selected\"") != std::string::npos);
  CHECK(log.str().find("\"split\":\"dev\"") != std::string::npos);

  auto other_seed = c;
  other_seed.seed = 2;
  CHECK(run_dp(other_seed, data).cells[0].test.values != a.cells[0].test.values);

  auto t = experiment_table(a);
  CHECK(t.columns == std::vector<std::string>{"UAS", "LAS"});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].cells[1].value == doctest::Approx(100 * a.cells[0].test.at("las")));
}

TEST_CASE("dp comparisons are z-tests on pooled token counts") {
  ExperimentResult base, variant;
  base.config.task = variant.config.task = Task::Dp;
  CellResult cb, cv;
  cb.test.values = {{"tokens", 1000}, {"head_correct", 850}, {"both_correct", 800}, {"las", 0.8}};
  cv.test.values = {{"tokens", 1000}, {"head_correct", 880}, {"both_correct", 870}, {"las", 0.87}};
  base.cells = {cb};
  variant.cells = {cv};
  auto tests = compare(base, variant);
  REQUIRE(tests.size() == 2);
  CHECK(tests[0].test == "ztest");
  CHECK(std::fabs(tests[0].statistic - 1.963) < 1e-3);
  CHECK(tests[1].reject());
  CHECK(headline(base.config, cb.test) == 0.8);
  ExperimentResult ner;
  ner.config.task = Task::Ner;
  CHECK_THROWS_AS(compare(base, ner), Error);
}

TEST_CASE("a NER fold and CF repeats run end to end") {
  auto ner = run_experiment(tiny(Task::Ner));
  REQUIRE(ner.cells.size() == 1);
  CHECK(ner.cells[0].cell == "fold 1");
  CHECK(ner.cells[0].test.values.count("weighted_f1") == 1);
  CHECK(ner.cells[0].test.values.count("f1_PER") == 1);

  auto c = tiny(Task::Cf);
  c.parts.upos = true;
  c.pooling = "weighted";
  auto cf = run_experiment(c);
  REQUIRE(cf.cells.size() == 2);
  CHECK(cf.cells[0].seed == 1);
  CHECK(cf.cells[1].seed == 2);
  CHECK(cf.cells[0].test.at("total") == 20);
  auto t = experiment_table(cf);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[2].label == "mean");
  CHECK(t.rows[2].cells[0].spread.has_value());
  auto tests = compare(cf, cf);
  REQUIRE(tests.size() == 1);
  CHECK(tests[0].p_value == 1.0);
}

TEST_CASE("multi-cell experiments write one checkpoint per cell") {
  auto c = tiny(Task::Cf);
  c.epochs = 1;
  ExperimentOptions opts;
  opts.checkpoint_path = "test_harness_tmp.mck";
  run_experiment(c, opts);
  for (const char* suffix : {".rep0", ".rep1"}) {
    const std::string path = opts.checkpoint_path + suffix;
    auto ckpt = load_checkpoint(path);
    CHECK(ckpt.meta.find("\"best_dev\"") != std::string::npos);
    std::remove(path.c_str());
  }
}
