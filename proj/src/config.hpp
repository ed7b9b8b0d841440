#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "embed.hpp"
#include "nerdata.hpp"
#include "classifier.hpp"
#include "tagger.hpp"

namespace morpho {

enum class Task { Dp, Ner, Cf };
const char* task_name(Task t);

enum class FeatureSource { Gold, Predicted, Noisy };
const char* feature_source_name(FeatureSource s);

struct DataPaths {
  // dp: CoNLL-U splits. ner: `corpus` is the token/tag file, `annotation`
  // the aligned CoNLL-U with UPOS/feats. cf: `corpus` is the labeled text
  // file, `annotation` its companion CoNLL-U.
  std::string train, dev, test;
  std::string predicted_train, predicted_dev, predicted_test;
  std::string corpus, annotation, predicted_annotation;
  std::string ctx_train, ctx_dev, ctx_test, ctx_corpus;
  std::string vectors;
  std::string ner_format = "two-column";  // or "conll2003"
  int max_train_sentences = 0;            // 0 = all
};

struct ExperimentConfig {
  Task task = Task::Dp;
  Parts parts;
  FeatureSource feature_source = FeatureSource::Gold;
  double noise_rate = 0.15;
  std::uint64_t noise_seed = 7;
  int epochs = 10;
  int patience = 5;
  std::uint64_t seed = 1;
  DataPaths data;

  int word_dim = 100;
  int upos_dim = 15;
  int feat_dim = 15;
  int min_word_count = 2;

  int extra_lstm = 0;  // dp input-level LSTM size, 0 = off
  int layers = 3;
  int hidden = 400;
  double dropout = 0.33;

  int arc_dim = 128;
  int label_dim = 64;
  bool mst = true;
  bool exclude_punct = false;

  bool interaction = false;
  F1Mode f1_mode = F1Mode::Span;
  int folds = 10;
  int fold = -1;  // -1 = all folds

  std::string pooling = "mean";
  int pool_hidden = 15;
  int repeats = 5;
  std::uint64_t split_seed = 13;

  ad::AdamConfig adam;
  int batch_size = 8;  // sentences per update
};

// Parses a JSON document. Unknown keys are errors; absent keys keep their
// defaults.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
// Canonical JSON (sorted keys, every field present).
std::string config_to_json(const ExperimentConfig& c, int indent = -1);
// FNV-1a 64 of the canonical compact JSON.
std::string config_hash(const ExperimentConfig& c);
// MORPHOPARSE_SEED, if set, replaces the seed. Returns true if it did.
bool apply_seed_override(ExperimentConfig& c);
// Sets one value by dotted key (as in the JSON document), e.g.
// "encoder.hidden" = "100". Values are parsed as JSON, falling back to a
// string.
void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value);
// Checks cross-field consistency.
void validate_config(const ExperimentConfig& c);

}  // namespace morpho
