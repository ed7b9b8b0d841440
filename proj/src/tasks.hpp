#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "classifier.hpp"
#include "config.hpp"
#include "parser.hpp"
#include "tagger.hpp"

namespace morpho {

// Task metrics of one evaluation. `selection` drives early stopping:
// (UAS+LAS)/2 for dp, weighted F1 for ner, accuracy for cf. `values` also
// carries the raw counts the significance tests need.
struct Metrics {
  double selection = 0.0;
  std::map<std::string, double> values;
  double at(const std::string& key) const;
};

enum class Split { Train, Dev, Test };

// ---------------------------------------------------------------- data

struct DpData {
  std::vector<Sentence> train, dev, test;
  std::optional<ContextDump> ctx_train, ctx_dev, ctx_test;
  std::optional<WordVectors> vectors;
  std::optional<AnnotationAgreement> feature_quality;  // of the test split's features
};

struct NerData {
  std::vector<Sentence> corpus;
  std::optional<ContextDump> ctx;
  std::optional<WordVectors> vectors;
};

struct CfData {
  std::vector<LabeledSentence> corpus;
  std::optional<ContextDump> ctx;
  std::optional<WordVectors> vectors;
};

// Reads the files named in the config and applies the feature source
// (gold, predicted files, or seeded corruption).
DpData load_dp_data(const ExperimentConfig& c);
NerData load_ner_data(const ExperimentConfig& c);
CfData load_cf_data(const ExperimentConfig& c);
// Applies feature noise / truncation to in-memory data.
void prepare_dp_data(DpData& d, const ExperimentConfig& c);

// ---------------------------------------------------------------- models

// A model of any task together with the vocabularies it was built with.
class Model {
 public:
  virtual ~Model() = default;
  virtual ad::ParameterStore& params() = 0;
  virtual ad::Var loss(ad::Graph& g, const Sentence& s, int label, const ContextDump* ctx, std::size_t idx) = 0;
  // JSON with the config and vocabularies; enough to rebuild the model.
  virtual std::string meta() const = 0;
  const ExperimentConfig& config() const { return config_; }

 protected:
  explicit Model(ExperimentConfig c) : config_(std::move(c)) {}
  ExperimentConfig config_;
};

class DpModel : public Model {
 public:
  DpModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
          const ContextDump* ctx_shape);
  DpModel(ExperimentConfig c, WordVocab words, MorphVocab morph, std::vector<std::string> labels, int ctx_layers,
          int ctx_dim);
  ad::ParameterStore& params() override { return parser_->params(); }
  ad::Var loss(ad::Graph& g, const Sentence& s, int, const ContextDump* ctx, std::size_t idx) override;
  std::string meta() const override;
  ParserModel& parser() { return *parser_; }
  std::vector<Sentence> predict(const std::vector<Sentence>& sentences, const ContextDump* ctx);

 private:
  std::unique_ptr<ParserModel> parser_;
};

class NerModel : public Model {
 public:
  NerModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
           const ContextDump* ctx_shape);
  NerModel(ExperimentConfig c, WordVocab words, MorphVocab morph, int ctx_layers, int ctx_dim);
  ad::ParameterStore& params() override { return tagger_->params(); }
  ad::Var loss(ad::Graph& g, const Sentence& s, int, const ContextDump* ctx, std::size_t idx) override;
  std::string meta() const override;
  TaggerModel& tagger() { return *tagger_; }

 private:
  std::unique_ptr<TaggerModel> tagger_;
};

class CfModel : public Model {
 public:
  CfModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
          const ContextDump* ctx_shape);
  CfModel(ExperimentConfig c, WordVocab words, MorphVocab morph, int ctx_layers, int ctx_dim);
  ad::ParameterStore& params() override { return classifier_->params(); }
  ad::Var loss(ad::Graph& g, const Sentence& s, int label, const ContextDump* ctx, std::size_t idx) override;
  std::string meta() const override;
  ClassifierModel& classifier() { return *classifier_; }

 private:
  std::unique_ptr<ClassifierModel> classifier_;
};

// Rebuilds a model from a checkpoint (metadata plus parameters).
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt);

// Evaluation on the listed items of a gold corpus (all items if `indices`
// is empty). Context dumps are indexed like the full corpus.
Metrics evaluate_dp(DpModel& m, const std::vector<Sentence>& gold, const ContextDump* ctx);
Metrics evaluate_ner(NerModel& m, const std::vector<Sentence>& gold, const std::vector<std::size_t>& indices,
                     const ContextDump* ctx);
Metrics evaluate_cf(CfModel& m, const std::vector<LabeledSentence>& gold, const std::vector<std::size_t>& indices,
                    const ContextDump* ctx);

// ---------------------------------------------------------------- runners

// One training cell: a model plus its train/dev/test examples.
class TaskRunner {
 public:
  virtual ~TaskRunner() = default;
  virtual Model& model() = 0;
  virtual std::size_t train_size() const = 0;
  virtual ad::Var example_loss(ad::Graph& g, std::size_t i) = 0;
  virtual Metrics evaluate(Split split) = 0;
};

class DpRunner : public TaskRunner {
 public:
  DpRunner(const ExperimentConfig& c, const DpData& data);
  Model& model() override { return *model_; }
  std::size_t train_size() const override { return data_.train.size(); }
  ad::Var example_loss(ad::Graph& g, std::size_t i) override;
  Metrics evaluate(Split split) override;

 private:
  const DpData& data_;
  std::unique_ptr<DpModel> model_;
};

// Fold `fold` is the test set, fold (fold+1) % k the dev set.
class NerRunner : public TaskRunner {
 public:
  NerRunner(const ExperimentConfig& c, const NerData& data, const FoldPlan& plan, std::size_t fold);
  Model& model() override { return *model_; }
  std::size_t train_size() const override { return train_.size(); }
  ad::Var example_loss(ad::Graph& g, std::size_t i) override;
  Metrics evaluate(Split split) override;

 private:
  const NerData& data_;
  std::vector<std::size_t> train_, dev_, test_;
  std::unique_ptr<NerModel> model_;
};

class CfRunner : public TaskRunner {
 public:
  CfRunner(const ExperimentConfig& c, const CfData& data, const SplitIndices& split);
  Model& model() override { return *model_; }
  std::size_t train_size() const override { return split_.train.size(); }
  ad::Var example_loss(ad::Graph& g, std::size_t i) override;
  Metrics evaluate(Split split) override;

 private:
  const CfData& data_;
  SplitIndices split_;
  std::unique_ptr<CfModel> model_;
};

}  // namespace morpho
