#include "harness.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

namespace morpho {

using nlohmann::json;

bool EarlyStopper::update(int epoch, double metric) {
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

namespace {

json metrics_json(const Metrics& m) {
  json j = json::object();
  for (const auto& [k, v] : m.values) j[k] = v;
  j["selection"] = m.selection;
  return j;
}

std::vector<ad::Matrix> snapshot(ad::ParameterStore& params) {
  std::vector<ad::Matrix> out;
  for (const ad::Parameter* p : params.all()) out.push_back(p->value);
  return out;
}

void restore(ad::ParameterStore& params, const std::vector<ad::Matrix>& values) {
  auto all = params.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = values[i];
}

std::string cell_path(const std::string& base, const std::string& suffix, bool multi) {
  return multi ? base + "." + suffix : base;
}

}  // namespace

TrainResult train(TaskRunner& runner, const ExperimentConfig& c, const TrainOptions& opts) {
  ad::ParameterStore& params = runner.model().params();
  const std::string hash = config_hash(c);
  std::uint64_t s = c.seed ^ 0x7261696E696E67ULL;
  Rng rng(splitmix64(s));
  ad::AdamState adam;
  EarlyStopper stopper(c.patience);
  TrainResult result;
  std::vector<ad::Matrix> best = snapshot(params);
  const std::size_t n = runner.train_size();
  const std::size_t batch = static_cast<std::size_t>(std::max(1, c.batch_size));
  std::vector<std::size_t> order(n);
  params.zero_grad();

  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const Real weight = Real(1) / Real(end - start);
      for (std::size_t k = start; k < end; ++k) {
        ad::Graph g(true, &rng);
        ad::Var loss = runner.example_loss(g, order[k]);
        const double value = loss.scalar();
        if (!std::isfinite(value))
          fail(ErrorCode::Numeric, "non-finite training loss at epoch " + std::to_string(epoch) + ", example " +
                                       std::to_string(order[k]) + " (" + opts.cell + ")");
        total += value;
        g.backward(ad::scale(loss, weight));
      }
      ad::adam_step(params, adam, c.adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = n ? total / double(n) : 0.0;
    rec.dev = runner.evaluate(Split::Dev);
    rec.improved = stopper.update(epoch, rec.dev.selection);
    if (rec.improved) best = snapshot(params);
    result.history.push_back(rec);
    result.epochs_run = epoch;
    if (opts.log) {
      json line = {{"event", "epoch"}, {"cell", opts.cell}, {"config_hash", hash}, {"seed", c.seed},
                   {"epoch", epoch},   {"loss", rec.loss},  {"dev", metrics_json(rec.dev)},
                   {"improved", rec.improved}};
      *opts.log << line.dump() << '\n';
    }
    if (opts.on_epoch && !opts.on_epoch(rec, runner)) break;
    if (stopper.should_stop()) break;
  }
  restore(params, best);
  result.best_epoch = stopper.best_epoch();
  result.best_dev = result.history.empty() ? 0.0 : stopper.best();
  result.skipped_updates = adam.skipped;
  return result;
}

Checkpoint checkpoint_of(Model& m, int epoch, double best_dev) {
  json meta = json::parse(m.meta());
  meta["epoch"] = epoch;
  meta["best_dev"] = best_dev;
  meta["config_hash"] = config_hash(m.config());
  return make_checkpoint(m.params(), meta.dump());
}

namespace {

CellResult run_cell(TaskRunner& runner, const ExperimentConfig& c, const std::string& cell, bool has_test,
                    const ExperimentOptions& opts, const std::string& ckpt_path) {
  TrainOptions t;
  t.log = opts.log;
  t.cell = cell;
  TrainResult tr = train(runner, c, t);
  CellResult r;
  r.cell = cell;
  r.seed = c.seed;
  r.best_epoch = tr.best_epoch;
  r.best_dev = tr.best_dev;
  r.test = has_test ? runner.evaluate(Split::Test) : runner.evaluate(Split::Dev);
  if (opts.log) {
    json line = {{"event", "selected"}, {"cell", cell},           {"config_hash", config_hash(c)},
                 {"seed", c.seed},      {"epoch", tr.best_epoch}, {"best_dev", tr.best_dev},
                 {"split", has_test ? "test" : "dev"},            {"metrics", metrics_json(r.test)}};
    *opts.log << line.dump() << '\n';
  }
  if (!ckpt_path.empty()) save_checkpoint(ckpt_path, checkpoint_of(runner.model(), tr.best_epoch, tr.best_dev));
  return r;
}

ExperimentResult start(const ExperimentConfig& c) {
  validate_config(c);
  ExperimentResult r;
  r.config = c;
  r.config_hash = config_hash(c);
  return r;
}

}  // namespace

ExperimentResult run_dp(const ExperimentConfig& c, const DpData& data, const ExperimentOptions& opts) {
  ExperimentResult r = start(c);
  DpRunner runner(c, data);
  r.cells.push_back(run_cell(runner, c, "dp", !data.test.empty(), opts, opts.checkpoint_path));
  r.feature_quality = data.feature_quality;
  return r;
}

ExperimentResult run_ner(const ExperimentConfig& c, const NerData& data, const ExperimentOptions& opts) {
  ExperimentResult r = start(c);
  const FoldPlan plan = make_folds(data.corpus.size(), static_cast<std::size_t>(c.folds), c.split_seed);
  const bool multi = c.fold < 0;
  for (std::size_t f = 0; f < plan.k; ++f) {
    if (!multi && f != std::size_t(c.fold)) continue;
    NerRunner runner(c, data, plan, f);
    const std::string cell = "fold " + std::to_string(f);
    const std::string path =
        opts.checkpoint_path.empty() ? "" : cell_path(opts.checkpoint_path, "fold" + std::to_string(f), multi);
    r.cells.push_back(run_cell(runner, c, cell, true, opts, path));
  }
  return r;
}

ExperimentResult run_cf(const ExperimentConfig& c, const CfData& data, const ExperimentOptions& opts) {
  ExperimentResult r = start(c);
  const SplitIndices split = split_60_20_20(data.corpus.size(), c.split_seed);
  const bool multi = c.repeats > 1;
  for (int k = 0; k < c.repeats; ++k) {
    ExperimentConfig ck = c;
    ck.seed = c.seed + std::uint64_t(k);
    CfRunner runner(ck, data, split);
    const std::string cell = "repeat " + std::to_string(k);
    const std::string path =
        opts.checkpoint_path.empty() ? "" : cell_path(opts.checkpoint_path, "rep" + std::to_string(k), multi);
    r.cells.push_back(run_cell(runner, ck, cell, true, opts, path));
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const ExperimentOptions& opts) {
  validate_config(c);
  switch (c.task) {
    case Task::Dp: return run_dp(c, load_dp_data(c), opts);
    case Task::Ner: return run_ner(c, load_ner_data(c), opts);
    case Task::Cf: return run_cf(c, load_cf_data(c), opts);
  }
  fail(ErrorCode::Internal, "unknown task");
}

double headline(const ExperimentConfig& c, const Metrics& m) {
  switch (c.task) {
    case Task::Dp: return m.at("las");
    case Task::Ner: return m.at("weighted_f1");
    case Task::Cf: return m.at("accuracy");
  }
  return m.selection;
}

namespace {

std::vector<double> headlines(const ExperimentResult& r) {
  std::vector<double> out;
  for (const auto& cell : r.cells) out.push_back(headline(r.config, cell.test));
  return out;
}

long long count(const ExperimentResult& r, const char* key) {
  double total = 0.0;
  for (const auto& cell : r.cells) total += cell.test.at(key);
  return std::llround(total);
}

}  // namespace

std::vector<stats::TestResult> compare(const ExperimentResult& baseline, const ExperimentResult& variant) {
  if (baseline.config.task != variant.config.task)
    fail(ErrorCode::InvalidArgument, "cannot compare experiments of different tasks");
  if (baseline.config.task == Task::Dp) {
    return {stats::two_proportion_ztest(count(variant, "head_correct"), count(variant, "tokens"),
                                        count(baseline, "head_correct"), count(baseline, "tokens")),
            stats::two_proportion_ztest(count(variant, "both_correct"), count(variant, "tokens"),
                                        count(baseline, "both_correct"), count(baseline, "tokens"))};
  }
  const auto a = headlines(variant);
  const auto b = headlines(baseline);
  if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "experiments have different numbers of cells");
  return {stats::wilcoxon_signed_rank(a, b)};
}

std::vector<std::pair<std::string, ExperimentConfig>> ablation_grid(const ExperimentConfig& base) {
  std::vector<std::pair<std::string, ExperimentConfig>> grid;
  const std::pair<const char*, std::pair<bool, bool>> variants[] = {
      {"baseline", {false, false}}, {"+UPOS", {true, false}}, {"+UPOS+feats", {true, true}}, {"+feats", {false, true}}};
  for (const auto& [label, parts] : variants) {
    ExperimentConfig c = base;
    c.parts.upos = parts.first;
    c.parts.feats = parts.second;
    grid.emplace_back(label, c);
  }
  return grid;
}

namespace {

std::vector<std::string> columns_of(Task t) {
  switch (t) {
    case Task::Dp: return {"UAS", "LAS"};
    case Task::Ner: return {"F1"};
    case Task::Cf: return {"Accuracy"};
  }
  return {};
}

// Per-column summary of an experiment, in percent.
std::vector<ReportCell> summary_cells(const ExperimentResult& r) {
  std::vector<ReportCell> out;
  if (r.config.task == Task::Dp) {
    const double tokens = double(count(r, "tokens"));
    out.push_back({tokens ? 100.0 * double(count(r, "head_correct")) / tokens : 0.0, std::nullopt, false});
    out.push_back({tokens ? 100.0 * double(count(r, "both_correct")) / tokens : 0.0, std::nullopt, false});
    return out;
  }
  std::vector<double> v = headlines(r);
  for (double& x : v) x *= 100.0;
  const MeanStd ms = mean_std(v);
  out.push_back({ms.mean, r.cells.size() > 1 ? std::optional<double>(ms.std) : std::nullopt, false});
  return out;
}

AblationResult ablate_with(const ExperimentConfig& base, const AblationOptions& opts,
                           const std::function<ExperimentResult(const ExperimentConfig&)>& run) {
  AblationResult out;
  auto grid = ablation_grid(base);
  if (opts.extra_epochs > 0) {
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto [label, c] = grid[i];
      c.epochs += opts.extra_epochs;
      grid.emplace_back(label + " (" + std::to_string(c.epochs) + " epochs)", c);
    }
  }
  out.table.title = std::string(task_name(base.task)) + " ablation";
  out.table.columns = columns_of(base.task);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.labels.push_back(grid[i].first);
    out.runs.push_back(run(grid[i].second));
  }
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    const std::size_t baseline = i < 4 ? 0 : 4;
    ReportRow row{out.labels[i], out.runs[i].config_hash, summary_cells(out.runs[i])};
    if (i == baseline) {
      out.tests.emplace_back();
    } else {
      out.tests.push_back(compare(out.runs[baseline], out.runs[i]));
      for (std::size_t c = 0; c < row.cells.size() && c < out.tests.back().size(); ++c)
        row.cells[c].significant = out.tests.back()[c].reject();
    }
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace

AblationResult ablate(const ExperimentConfig& base, const AblationOptions& opts) {
  validate_config(base);
  if (base.task == Task::Dp) {
    // Every variant trains on the same data, so it is read once.
    const DpData data = load_dp_data(base);
    return ablate_dp(base, data, opts);
  }
  return ablate_with(base, opts, [&](const ExperimentConfig& c) {
    ExperimentConfig full = c;
    // The data must carry morphology for every variant of the grid.
    full.parts.upos = full.parts.feats = true;
    switch (c.task) {
      case Task::Ner: return run_ner(c, load_ner_data(full), opts.experiment);
      case Task::Cf: return run_cf(c, load_cf_data(full), opts.experiment);
      case Task::Dp: break;
    }
    fail(ErrorCode::Internal, "unreachable");
  });
}

AblationResult ablate_dp(const ExperimentConfig& base, const DpData& data, const AblationOptions& opts) {
  return ablate_with(base, opts, [&](const ExperimentConfig& c) { return run_dp(c, data, opts.experiment); });
}

ReportTable experiment_table(const ExperimentResult& r) {
  ReportTable t;
  t.title = std::string(task_name(r.config.task)) + " (" + feature_source_name(r.config.feature_source) + " features)";
  t.columns = columns_of(r.config.task);
  for (const auto& cell : r.cells) {
    ReportRow row{cell.cell, r.config_hash, {}};
    if (r.config.task == Task::Dp) {
      row.cells.push_back({100.0 * cell.test.at("uas"), std::nullopt, false});
      row.cells.push_back({100.0 * cell.test.at("las"), std::nullopt, false});
    } else {
      row.cells.push_back({100.0 * headline(r.config, cell.test), std::nullopt, false});
    }
    t.rows.push_back(std::move(row));
  }
  if (r.cells.size() > 1) {
    t.rows.push_back({"mean", r.config_hash, summary_cells(r)});
  }
  return t;
}

}  // namespace morpho
