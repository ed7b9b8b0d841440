#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "report.hpp"
#include "stats.hpp"
#include "tasks.hpp"

namespace morpho {

// Patience-based early stopping on a metric where larger is better. Only a
// strict improvement resets the counter, so ties keep the earlier epoch.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Records the metric of `epoch` and returns true if it is the new best.
  bool update(int epoch, double metric);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // mean training loss per example
  Metrics dev;
  bool improved = false;
};

struct TrainOptions {
  // JSON-lines run log; one line per epoch plus one for the selected epoch.
  std::ostream* log = nullptr;
  // Identifies the cell in the run log, e.g. "fold 3".
  std::string cell;
  // Called after each epoch; returning false ends training early.
  std::function<bool(const EpochRecord&, TaskRunner&)> on_epoch;
};

struct TrainResult {
  int best_epoch = 0;
  double best_dev = 0.0;
  int epochs_run = 0;
  std::int64_t skipped_updates = 0;
  std::vector<EpochRecord> history;
};

// Trains with Adam in mini-batches of config.batch_size examples, evaluates
// on dev after every epoch and leaves the runner's model at the best epoch.
// The config seed drives both example order and dropout.
TrainResult train(TaskRunner& runner, const ExperimentConfig& c, const TrainOptions& opts = {});

// One trained cell of an experiment: a dp run, a ner fold or a cf repeat.
struct CellResult {
  std::string cell;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  double best_dev = 0.0;
  Metrics test;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<CellResult> cells;
  std::optional<AnnotationAgreement> feature_quality;
};

struct ExperimentOptions {
  std::ostream* log = nullptr;
  // If set, each cell's best model is written here. Multi-cell experiments
  // append ".fold<k>" or ".rep<k>" to the path.
  std::string checkpoint_path;
};

ExperimentResult run_dp(const ExperimentConfig& c, const DpData& data, const ExperimentOptions& opts = {});
// All folds if c.fold < 0, else only that fold.
ExperimentResult run_ner(const ExperimentConfig& c, const NerData& data, const ExperimentOptions& opts = {});
// c.repeats retrainings with seeds seed..seed+repeats-1 on one fixed split.
ExperimentResult run_cf(const ExperimentConfig& c, const CfData& data, const ExperimentOptions& opts = {});
// Loads the data named by the config and dispatches on the task.
ExperimentResult run_experiment(const ExperimentConfig& c, const ExperimentOptions& opts = {});

// Checkpoint of a trained model with epoch, best dev metric and config hash
// added to its metadata.
Checkpoint checkpoint_of(Model& m, int epoch, double best_dev);

// The headline metric of a cell's test evaluation: LAS for dp, weighted F1
// for ner, accuracy for cf.
double headline(const ExperimentConfig& c, const Metrics& m);

// Significance of `variant` against `baseline`: z-tests on the pooled token
// counts for dp (one per UAS and LAS), Wilcoxon over paired cells otherwise.
std::vector<stats::TestResult> compare(const ExperimentResult& baseline, const ExperimentResult& variant);

struct AblationOptions {
  ExperimentOptions experiment;
  // Adds a row per variant trained for this many extra epochs (0 = none).
  int extra_epochs = 0;
};

struct AblationResult {
  std::vector<std::string> labels;
  std::vector<ExperimentResult> runs;
  // tests[i] compares runs[i] with the baseline of its training length.
  std::vector<std::vector<stats::TestResult>> tests;
  ReportTable table;
};

// The variant grid over the morphological parts of a base config: baseline
// (no upos, no feats), +UPOS, +UPOS+feats, +feats.
std::vector<std::pair<std::string, ExperimentConfig>> ablation_grid(const ExperimentConfig& base);
AblationResult ablate(const ExperimentConfig& base, const AblationOptions& opts = {});
// Same grid on preloaded dp data, shared by every variant.
AblationResult ablate_dp(const ExperimentConfig& base, const DpData& data, const AblationOptions& opts = {});

// One row per cell, plus a mean row for multi-cell experiments.
ReportTable experiment_table(const ExperimentResult& r);

}  // namespace morpho
