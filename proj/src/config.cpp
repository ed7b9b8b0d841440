#include "config.hpp"

#include <cstdlib>
#include <json.hpp>

namespace morpho {

using nlohmann::json;

const char* task_name(Task t) {
  switch (t) {
    case Task::Dp: return "dp";
    case Task::Ner: return "ner";
    case Task::Cf: return "cf";
  }
  return "?";
}

const char* feature_source_name(FeatureSource s) {
  switch (s) {
    case FeatureSource::Gold: return "gold";
    case FeatureSource::Predicted: return "predicted";
    case FeatureSource::Noisy: return "noisy";
  }
  return "?";
}

namespace {

json to_json(const ExperimentConfig& c) {
  json parts = json::array();
  if (c.parts.word) parts.push_back("word");
  if (c.parts.ctx) parts.push_back("ctx");
  if (c.parts.upos) parts.push_back("upos");
  if (c.parts.feats) parts.push_back("feats");
  const auto& d = c.data;
  return {
      {"task", task_name(c.task)},
      {"parts", parts},
      {"feature_source", feature_source_name(c.feature_source)},
      {"feature_noise", {{"rate", c.noise_rate}, {"seed", c.noise_seed}}},
      {"epochs", c.epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"data",
       {{"train", d.train}, {"dev", d.dev}, {"test", d.test},
        {"predicted_train", d.predicted_train}, {"predicted_dev", d.predicted_dev},
        {"predicted_test", d.predicted_test}, {"corpus", d.corpus}, {"annotation", d.annotation},
        {"predicted_annotation", d.predicted_annotation}, {"ctx_train", d.ctx_train},
        {"ctx_dev", d.ctx_dev}, {"ctx_test", d.ctx_test}, {"ctx_corpus", d.ctx_corpus},
        {"vectors", d.vectors}, {"ner_format", d.ner_format},
        {"max_train_sentences", d.max_train_sentences}}},
      {"embedding",
       {{"word_dim", c.word_dim}, {"upos_dim", c.upos_dim}, {"feat_dim", c.feat_dim},
        {"min_word_count", c.min_word_count}}},
      {"encoder",
       {{"extra_lstm", c.extra_lstm}, {"layers", c.layers}, {"hidden", c.hidden}, {"dropout", c.dropout}}},
      {"parser",
       {{"arc_dim", c.arc_dim}, {"label_dim", c.label_dim}, {"decoder", c.mst ? "mst" : "greedy"},
        {"exclude_punct", c.exclude_punct}}},
      {"tagger",
       {{"interaction", c.interaction}, {"f1_mode", c.f1_mode == F1Mode::Span ? "span" : "token"},
        {"folds", c.folds}, {"fold", c.fold}}},
      {"classifier",
       {{"pooling", c.pooling}, {"pool_hidden", c.pool_hidden}, {"repeats", c.repeats},
        {"split_seed", c.split_seed}}},
      {"optimizer",
       {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps},
        {"clip", c.adam.clip}, {"batch_size", c.batch_size}}},
  };
}

template <typename T>
void take(const json& j, const char* key, T& out, const std::string& where) {
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::Parse, "config key '" + where + key + "' has the wrong type");
  }
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  std::string s;
  take(j, "task", s, "");
  if (s == "dp") c.task = Task::Dp;
  else if (s == "ner") c.task = Task::Ner;
  else if (s == "cf") c.task = Task::Cf;
  else fail(ErrorCode::Parse, "config key 'task' must be dp, ner or cf");

  c.parts = Parts{false, false, false, false};
  for (const auto& p : j.at("parts")) {
    if (!p.is_string()) fail(ErrorCode::Parse, "config key 'parts' must list strings");
    const auto name = p.get<std::string>();
    if (name == "word") c.parts.word = true;
    else if (name == "ctx") c.parts.ctx = true;
    else if (name == "upos") c.parts.upos = true;
    else if (name == "feats") c.parts.feats = true;
    else fail(ErrorCode::Parse, "unknown part '" + name + "' (word, ctx, upos, feats)");
  }
  take(j, "feature_source", s, "");
  if (s == "gold") c.feature_source = FeatureSource::Gold;
  else if (s == "predicted") c.feature_source = FeatureSource::Predicted;
  else if (s == "noisy") c.feature_source = FeatureSource::Noisy;
  else fail(ErrorCode::Parse, "config key 'feature_source' must be gold, predicted or noisy");
  take(j.at("feature_noise"), "rate", c.noise_rate, "feature_noise.");
  take(j.at("feature_noise"), "seed", c.noise_seed, "feature_noise.");
  take(j, "epochs", c.epochs, "");
  take(j, "patience", c.patience, "");
  take(j, "seed", c.seed, "");

  const json& d = j.at("data");
  auto& p = c.data;
  for (auto [key, field] : {std::pair{"train", &p.train}, {"dev", &p.dev}, {"test", &p.test},
                            {"predicted_train", &p.predicted_train}, {"predicted_dev", &p.predicted_dev},
                            {"predicted_test", &p.predicted_test}, {"corpus", &p.corpus},
                            {"annotation", &p.annotation}, {"predicted_annotation", &p.predicted_annotation},
                            {"ctx_train", &p.ctx_train}, {"ctx_dev", &p.ctx_dev}, {"ctx_test", &p.ctx_test},
                            {"ctx_corpus", &p.ctx_corpus}, {"vectors", &p.vectors},
                            {"ner_format", &p.ner_format}})
    take(d, key, *field, "data.");
  take(d, "max_train_sentences", p.max_train_sentences, "data.");

  const json& e = j.at("embedding");
  take(e, "word_dim", c.word_dim, "embedding.");
  take(e, "upos_dim", c.upos_dim, "embedding.");
  take(e, "feat_dim", c.feat_dim, "embedding.");
  take(e, "min_word_count", c.min_word_count, "embedding.");

  const json& enc = j.at("encoder");
  take(enc, "extra_lstm", c.extra_lstm, "encoder.");
  take(enc, "layers", c.layers, "encoder.");
  take(enc, "hidden", c.hidden, "encoder.");
  take(enc, "dropout", c.dropout, "encoder.");

  const json& par = j.at("parser");
  take(par, "arc_dim", c.arc_dim, "parser.");
  take(par, "label_dim", c.label_dim, "parser.");
  take(par, "decoder", s, "parser.");
  if (s != "mst" && s != "greedy") fail(ErrorCode::Parse, "config key 'parser.decoder' must be mst or greedy");
  c.mst = s == "mst";
  take(par, "exclude_punct", c.exclude_punct, "parser.");

  const json& tag = j.at("tagger");
  take(tag, "interaction", c.interaction, "tagger.");
  take(tag, "f1_mode", s, "tagger.");
  if (s != "span" && s != "token") fail(ErrorCode::Parse, "config key 'tagger.f1_mode' must be span or token");
  c.f1_mode = s == "span" ? F1Mode::Span : F1Mode::Token;
  take(tag, "folds", c.folds, "tagger.");
  take(tag, "fold", c.fold, "tagger.");

  const json& cl = j.at("classifier");
  take(cl, "pooling", c.pooling, "classifier.");
  take(cl, "pool_hidden", c.pool_hidden, "classifier.");
  take(cl, "repeats", c.repeats, "classifier.");
  take(cl, "split_seed", c.split_seed, "classifier.");

  const json& o = j.at("optimizer");
  take(o, "lr", c.adam.lr, "optimizer.");
  take(o, "beta1", c.adam.beta1, "optimizer.");
  take(o, "beta2", c.adam.beta2, "optimizer.");
  take(o, "eps", c.adam.eps, "optimizer.");
  take(o, "clip", c.adam.clip, "optimizer.");
  take(o, "batch_size", c.batch_size, "optimizer.");
  return c;
}

// Overlays `patch` onto `base`; every key of `patch` must exist in `base`.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) fail(ErrorCode::Parse, "config " + (where.empty() ? "document" : "'" + where + "'") +
                                                     " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) fail(ErrorCode::Parse, "unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) overlay(slot, it.value(), key);
    else slot = it.value();
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json patch;
  try {
    patch = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  json base = to_json(ExperimentConfig{});
  overlay(base, patch, "");
  ExperimentConfig c = from_json(base);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c, int indent) { return to_json(c).dump(indent); }

std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(config_to_json(c))); }

bool apply_seed_override(ExperimentConfig& c) {
  const char* env = std::getenv("MORPHOPARSE_SEED");
  if (!env || !*env) return false;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') fail(ErrorCode::InvalidArgument, "MORPHOPARSE_SEED must be a non-negative integer");
  c.seed = v;
  return true;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  json j = to_json(c);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json patch = parsed;
  auto path = split(key, '.');
  for (auto it = path.rbegin(); it != path.rend(); ++it) patch = json{{std::string(*it), patch}};
  overlay(j, patch, "");
  c = from_json(j);
}

void validate_config(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCode::InvalidArgument, "config: " + msg);
  };
  require(c.parts.word || c.parts.ctx || c.parts.upos || c.parts.feats, "parts must not be empty");
  require(c.epochs >= 1, "epochs must be >= 1");
  require(c.patience >= 1, "patience must be >= 1");
  require(c.word_dim >= 1 && c.upos_dim >= 1 && c.feat_dim >= 1, "embedding sizes must be >= 1");
  require(c.layers >= 1 && c.hidden >= 1, "encoder layers and hidden must be >= 1");
  require(c.dropout >= 0 && c.dropout < 1, "dropout must be in [0, 1)");
  require(c.extra_lstm >= 0, "encoder.extra_lstm must be >= 0");
  require(c.extra_lstm == 0 || c.task == Task::Dp, "encoder.extra_lstm applies to dp only");
  require(c.arc_dim >= 1 && c.label_dim >= 1, "parser sizes must be >= 1");
  require(c.folds >= 2, "tagger.folds must be >= 2");
  require(c.fold >= -1 && c.fold < c.folds, "tagger.fold must be -1 or a fold index");
  pooling_from_name(c.pooling);
  require(c.pool_hidden >= 1, "classifier.pool_hidden must be >= 1");
  require(c.repeats >= 1, "classifier.repeats must be >= 1");
  require(c.adam.lr > 0 && c.adam.beta1 >= 0 && c.adam.beta1 < 1 && c.adam.beta2 >= 0 && c.adam.beta2 < 1 &&
              c.adam.eps > 0,
          "optimizer values out of range");
  require(c.batch_size >= 1, "optimizer.batch_size must be >= 1");
  require(c.noise_rate >= 0 && c.noise_rate <= 1, "feature_noise.rate must be in [0, 1]");
  require(c.task == Task::Dp || c.parts.word || c.parts.ctx || c.task == Task::Cf,
          "ner needs the word or ctx part");
  require(c.data.ner_format == "two-column" || c.data.ner_format == "conll2003",
          "data.ner_format must be two-column or conll2003");
}

}  // namespace morpho
