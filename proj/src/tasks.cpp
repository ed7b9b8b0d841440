#include "tasks.hpp"

#include <json.hpp>

namespace morpho {

using nlohmann::json;

double Metrics::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) fail(ErrorCode::InvalidArgument, "no metric named '" + key + "'");
  return it->second;
}

namespace {

std::vector<Sentence> sentences_of(const std::vector<LabeledSentence>& corpus) {
  std::vector<Sentence> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(ex.sentence);
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& all, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(all[i]);
  return out;
}

std::optional<ContextDump> load_ctx(const std::string& path, const std::vector<Sentence>& corpus) {
  if (path.empty()) return std::nullopt;
  ContextDump d = load_context_dump(path);
  try {
    check_context_alignment(d, corpus);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
  return d;
}

std::optional<WordVectors> load_optional_vectors(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_vectors(path);
}

EmbedSpec embed_spec(const ExperimentConfig& c, int ctx_layers, int ctx_dim) {
  EmbedSpec e;
  e.parts = c.parts;
  e.word_dim = c.word_dim;
  e.upos_dim = c.upos_dim;
  e.feat_dim = c.feat_dim;
  e.ctx_layers = ctx_layers;
  e.ctx_dim = ctx_dim;
  return e;
}

std::pair<int, int> ctx_shape(const ContextDump* ctx) {
  if (!ctx) return {0, 0};
  return {static_cast<int>(ctx->layers), static_cast<int>(ctx->dim)};
}

json vocab_meta(const ExperimentConfig& c, const Embedder& e) {
  json morph = json::object();
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    if (!e.morph().values[f].empty()) morph[std::string(feature_inventory()[f])] = e.morph().values[f];
  return {{"config", json::parse(config_to_json(c))},
          {"words", e.words().words},
          {"morph", morph},
          {"ctx", {e.spec().ctx_layers, e.spec().ctx_dim}}};
}

MorphVocab morph_from_meta(const json& j) {
  MorphVocab m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto f = feature_index(it.key());
    if (!f) fail(ErrorCode::Format, "checkpoint names unknown feature '" + it.key() + "'");
    m.values[*f] = it.value().get<std::vector<std::string>>();
  }
  return m;
}

// Replaces upos/feats of each split as the config's feature source demands.
void apply_noise(std::vector<Sentence>& split, const ExperimentConfig& c, std::uint64_t offset) {
  split = corrupt_annotations(split, c.noise_rate, c.noise_seed + offset);
}

}  // namespace

// ---------------------------------------------------------------- data

void prepare_dp_data(DpData& d, const ExperimentConfig& c) {
  if (c.data.max_train_sentences > 0 && d.train.size() > std::size_t(c.data.max_train_sentences)) {
    d.train.resize(static_cast<std::size_t>(c.data.max_train_sentences));
    if (d.ctx_train) d.ctx_train->sentences.resize(d.train.size());
  }
  if (c.feature_source == FeatureSource::Noisy) {
    const std::vector<Sentence> gold_test = d.test;
    apply_noise(d.train, c, 0);
    apply_noise(d.dev, c, 1);
    apply_noise(d.test, c, 2);
    d.feature_quality = feats_quality(gold_test, d.test);
  }
}

DpData load_dp_data(const ExperimentConfig& c) {
  if (c.data.train.empty() || c.data.dev.empty())
    fail(ErrorCode::InvalidArgument, "dp needs data.train and data.dev");
  DpData d;
  d.train = read_treebank(c.data.train);
  d.dev = read_treebank(c.data.dev);
  if (!c.data.test.empty()) d.test = read_treebank(c.data.test);
  if (c.feature_source == FeatureSource::Predicted) {
    ParseOptions lenient{ParseMode::Lenient, nullptr};
    auto attach = [&](std::vector<Sentence>& gold, const std::string& path, const char* which) {
      if (path.empty()) fail(ErrorCode::InvalidArgument, std::string("predicted features need data.predicted_") + which);
      try {
        auto r = attach_predicted_annotations(gold, read_treebank(path, lenient));
        gold = std::move(r.sentences);
        return r.agreement;
      } catch (const Error& e) {
        fail(e.code(), path + ": " + e.what());
      }
    };
    attach(d.train, c.data.predicted_train, "train");
    attach(d.dev, c.data.predicted_dev, "dev");
    if (!d.test.empty()) d.feature_quality = attach(d.test, c.data.predicted_test, "test");
  }
  if (c.parts.ctx) {
    d.ctx_train = load_ctx(c.data.ctx_train, d.train);
    d.ctx_dev = load_ctx(c.data.ctx_dev, d.dev);
    if (!d.test.empty()) d.ctx_test = load_ctx(c.data.ctx_test, d.test);
    if (!d.ctx_train || !d.ctx_dev || (!d.test.empty() && !d.ctx_test))
      fail(ErrorCode::InvalidArgument, "the ctx part needs data.ctx_train, ctx_dev and ctx_test");
  }
  d.vectors = load_optional_vectors(c.data.vectors);
  prepare_dp_data(d, c);
  return d;
}

NerData load_ner_data(const ExperimentConfig& c) {
  if (c.data.corpus.empty()) fail(ErrorCode::InvalidArgument, "ner needs data.corpus");
  NerData d;
  d.corpus = load_ner_corpus(c.data.corpus,
                             c.data.ner_format == "conll2003" ? NerFormat::Conll2003 : NerFormat::TwoColumn);
  const bool morph = c.parts.upos || c.parts.feats;
  std::string annotation = c.feature_source == FeatureSource::Predicted ? c.data.predicted_annotation
                                                                         : c.data.annotation;
  if (morph && annotation.empty())
    fail(ErrorCode::InvalidArgument, "upos/feats parts need a CoNLL-U annotation of the corpus");
  if (!annotation.empty()) {
    auto ann = read_treebank(annotation, {ParseMode::Lenient, nullptr});
    if (c.feature_source == FeatureSource::Noisy) ann = corrupt_annotations(ann, c.noise_rate, c.noise_seed);
    try {
      attach_morphology(d.corpus, ann);
    } catch (const Error& e) {
      fail(e.code(), annotation + ": " + e.what());
    }
  }
  if (c.parts.ctx) {
    d.ctx = load_ctx(c.data.ctx_corpus, d.corpus);
    if (!d.ctx) fail(ErrorCode::InvalidArgument, "the ctx part needs data.ctx_corpus");
  }
  d.vectors = load_optional_vectors(c.data.vectors);
  return d;
}

CfData load_cf_data(const ExperimentConfig& c) {
  if (c.data.corpus.empty()) fail(ErrorCode::InvalidArgument, "cf needs data.corpus");
  CfData d;
  d.corpus = load_labeled_corpus(c.data.corpus);
  const bool morph = c.parts.upos || c.parts.feats;
  std::string annotation = c.feature_source == FeatureSource::Predicted ? c.data.predicted_annotation
                                                                         : c.data.annotation;
  if (morph && annotation.empty())
    fail(ErrorCode::InvalidArgument, "upos/feats parts need a companion CoNLL-U file");
  if (!annotation.empty()) {
    auto ann = read_treebank(annotation, {ParseMode::Lenient, nullptr});
    if (c.feature_source == FeatureSource::Noisy) ann = corrupt_annotations(ann, c.noise_rate, c.noise_seed);
    try {
      attach_companion(d.corpus, ann);
    } catch (const Error& e) {
      fail(e.code(), annotation + ": " + e.what());
    }
  }
  if (c.parts.ctx) {
    d.ctx = load_ctx(c.data.ctx_corpus, sentences_of(d.corpus));
    if (!d.ctx) fail(ErrorCode::InvalidArgument, "the ctx part needs data.ctx_corpus");
  }
  d.vectors = load_optional_vectors(c.data.vectors);
  return d;
}

// ---------------------------------------------------------------- models

namespace {

ParserSpec parser_spec(const ExperimentConfig& c) {
  ParserSpec s;
  s.lstm = {c.layers, c.hidden, true, 0};
  s.arc_dim = c.arc_dim;
  s.label_dim = c.label_dim;
  s.dropout = static_cast<Real>(c.dropout);
  s.mst = c.mst;
  return s;
}

TaggerSpec tagger_spec(const ExperimentConfig& c) {
  TaggerSpec s;
  s.lstm = {c.layers, c.hidden, false, 0};
  s.interaction = c.interaction;
  s.dropout = static_cast<Real>(c.dropout);
  return s;
}

ClassifierSpec classifier_spec(const ExperimentConfig& c) {
  ClassifierSpec s;
  s.lstm = {c.layers, c.hidden, false, 0};
  s.pooling = {pooling_from_name(c.pooling), c.pool_hidden};
  s.dropout = static_cast<Real>(c.dropout);
  return s;
}

}  // namespace

DpModel::DpModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
                 const ContextDump* ctx)
    : Model(std::move(c)) {
  auto [layers, dim] = ctx_shape(ctx);
  Embedder e(embed_spec(config_, layers, dim), WordVocab::build(train, config_.min_word_count, vectors),
             MorphVocab::build(train));
  parser_ = std::make_unique<ParserModel>(InputEncoder(std::move(e), config_.extra_lstm), parser_spec(config_),
                                          collect_deprels(train));
  parser_->create_parameters(config_.seed, vectors);
}

DpModel::DpModel(ExperimentConfig c, WordVocab words, MorphVocab morph, std::vector<std::string> labels,
                 int ctx_layers, int ctx_dim)
    : Model(std::move(c)) {
  Embedder e(embed_spec(config_, ctx_layers, ctx_dim), std::move(words), std::move(morph));
  parser_ = std::make_unique<ParserModel>(InputEncoder(std::move(e), config_.extra_lstm), parser_spec(config_),
                                          std::move(labels));
  parser_->create_parameters(config_.seed);
}

ad::Var DpModel::loss(ad::Graph& g, const Sentence& s, int, const ContextDump* ctx, std::size_t idx) {
  return parser_->loss(g, s, ctx, idx);
}

std::string DpModel::meta() const {
  json j = vocab_meta(config_, parser_->input().embedder());
  j["labels"] = parser_->labels();
  return j.dump();
}

std::vector<Sentence> DpModel::predict(const std::vector<Sentence>& sentences, const ContextDump* ctx) {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back(parser_->predict(sentences[i], ctx, i));
  return out;
}

NerModel::NerModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
                   const ContextDump* ctx)
    : Model(std::move(c)) {
  auto [layers, dim] = ctx_shape(ctx);
  Embedder e(embed_spec(config_, layers, dim), WordVocab::build(train, config_.min_word_count, vectors),
             MorphVocab::build(train));
  tagger_ = std::make_unique<TaggerModel>(std::move(e), tagger_spec(config_));
  tagger_->create_parameters(config_.seed, vectors);
}

NerModel::NerModel(ExperimentConfig c, WordVocab words, MorphVocab morph, int ctx_layers, int ctx_dim)
    : Model(std::move(c)) {
  Embedder e(embed_spec(config_, ctx_layers, ctx_dim), std::move(words), std::move(morph));
  tagger_ = std::make_unique<TaggerModel>(std::move(e), tagger_spec(config_));
  tagger_->create_parameters(config_.seed);
}

ad::Var NerModel::loss(ad::Graph& g, const Sentence& s, int, const ContextDump* ctx, std::size_t idx) {
  return tagger_->loss(g, s, ctx, idx);
}

std::string NerModel::meta() const { return vocab_meta(config_, tagger_->embedder()).dump(); }

CfModel::CfModel(ExperimentConfig c, const std::vector<Sentence>& train, const WordVectors* vectors,
                 const ContextDump* ctx)
    : Model(std::move(c)) {
  auto [layers, dim] = ctx_shape(ctx);
  Embedder e(embed_spec(config_, layers, dim), WordVocab::build(train, config_.min_word_count, vectors),
             MorphVocab::build(train));
  classifier_ = std::make_unique<ClassifierModel>(std::move(e), classifier_spec(config_));
  classifier_->create_parameters(config_.seed, vectors);
}

CfModel::CfModel(ExperimentConfig c, WordVocab words, MorphVocab morph, int ctx_layers, int ctx_dim)
    : Model(std::move(c)) {
  Embedder e(embed_spec(config_, ctx_layers, ctx_dim), std::move(words), std::move(morph));
  classifier_ = std::make_unique<ClassifierModel>(std::move(e), classifier_spec(config_));
  classifier_->create_parameters(config_.seed);
}

ad::Var CfModel::loss(ad::Graph& g, const Sentence& s, int label, const ContextDump* ctx, std::size_t idx) {
  return classifier_->loss(g, LabeledSentence{s, label}, ctx, idx);
}

std::string CfModel::meta() const { return vocab_meta(config_, classifier_->embedder()).dump(); }

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.meta);
  } catch (const json::parse_error&) {
    fail(ErrorCode::Format, "checkpoint metadata is not valid JSON");
  }
  std::unique_ptr<Model> model;
  try {
    ExperimentConfig c = parse_config(meta.at("config").dump());
    WordVocab words = WordVocab::from_list(meta.at("words").get<std::vector<std::string>>());
    MorphVocab morph = morph_from_meta(meta.at("morph"));
    const int ctx_layers = meta.at("ctx").at(0).get<int>();
    const int ctx_dim = meta.at("ctx").at(1).get<int>();
    switch (c.task) {
      case Task::Dp:
        model = std::make_unique<DpModel>(c, std::move(words), std::move(morph),
                                          meta.at("labels").get<std::vector<std::string>>(), ctx_layers, ctx_dim);
        break;
      case Task::Ner:
        model = std::make_unique<NerModel>(c, std::move(words), std::move(morph), ctx_layers, ctx_dim);
        break;
      case Task::Cf:
        model = std::make_unique<CfModel>(c, std::move(words), std::move(morph), ctx_layers, ctx_dim);
        break;
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("checkpoint metadata is incomplete: ") + e.what());
  }
  restore_parameters(ckpt, model->params());
  return model;
}

// ---------------------------------------------------------------- evaluation

Metrics evaluate_dp(DpModel& m, const std::vector<Sentence>& gold, const ContextDump* ctx) {
  AttachmentReport r = attachment_scores(gold, m.predict(gold, ctx), m.config().exclude_punct);
  Metrics out;
  out.values = {{"uas", r.uas()},
                {"las", r.las()},
                {"tokens", double(r.tokens)},
                {"head_correct", double(r.head_correct)},
                {"both_correct", double(r.both_correct)}};
  out.selection = (r.uas() + r.las()) / 2;
  return out;
}

Metrics evaluate_ner(NerModel& m, const std::vector<Sentence>& gold, const std::vector<std::size_t>& indices,
                     const ContextDump* ctx) {
  LabelSequences g, p;
  auto visit = [&](std::size_t i) {
    g.push_back(ner_labels({gold[i]})[0]);
    p.push_back(m.tagger().predict(gold[i], ctx, i));
  };
  if (indices.empty())
    for (std::size_t i = 0; i < gold.size(); ++i) visit(i);
  else
    for (std::size_t i : indices) visit(i);
  F1Report r = weighted_f1(g, p, m.config().f1_mode);
  Metrics out;
  out.values["weighted_f1"] = r.weighted_f1;
  for (std::size_t k = 0; k < kEntityClasses.size(); ++k) {
    const std::string cls(kEntityClasses[k]);
    out.values["f1_" + cls] = r.classes[k].f1();
    out.values["support_" + cls] = double(r.classes[k].gold);
  }
  out.selection = r.weighted_f1;
  return out;
}

Metrics evaluate_cf(CfModel& m, const std::vector<LabeledSentence>& gold, const std::vector<std::size_t>& indices,
                    const ContextDump* ctx) {
  std::vector<int> g, p;
  auto visit = [&](std::size_t i) {
    g.push_back(gold[i].label);
    p.push_back(m.classifier().classify(gold[i].sentence, ctx, i));
  };
  if (indices.empty())
    for (std::size_t i = 0; i < gold.size(); ++i) visit(i);
  else
    for (std::size_t i : indices) visit(i);
  Metrics out;
  const double acc = accuracy(g, p);
  out.values = {{"accuracy", acc}, {"total", double(g.size())}, {"correct", acc * double(g.size())}};
  out.selection = acc;
  return out;
}

// ---------------------------------------------------------------- runners

DpRunner::DpRunner(const ExperimentConfig& c, const DpData& data) : data_(data) {
  if (data_.train.empty()) fail(ErrorCode::InvalidArgument, "empty training split");
  model_ = std::make_unique<DpModel>(c, data_.train, data_.vectors ? &*data_.vectors : nullptr,
                                     data_.ctx_train ? &*data_.ctx_train : nullptr);
}

ad::Var DpRunner::example_loss(ad::Graph& g, std::size_t i) {
  return model_->loss(g, data_.train[i], 0, data_.ctx_train ? &*data_.ctx_train : nullptr, i);
}

Metrics DpRunner::evaluate(Split split) {
  switch (split) {
    case Split::Train: return evaluate_dp(*model_, data_.train, data_.ctx_train ? &*data_.ctx_train : nullptr);
    case Split::Dev: return evaluate_dp(*model_, data_.dev, data_.ctx_dev ? &*data_.ctx_dev : nullptr);
    case Split::Test: {
      if (data_.test.empty()) fail(ErrorCode::InvalidArgument, "no test split configured");
      Metrics m = evaluate_dp(*model_, data_.test, data_.ctx_test ? &*data_.ctx_test : nullptr);
      if (data_.feature_quality) {
        m.values["upos_accuracy"] = data_.feature_quality->upos_accuracy();
        m.values["feats_accuracy"] = data_.feature_quality->feats_accuracy();
      }
      return m;
    }
  }
  fail(ErrorCode::Internal, "unknown split");
}

NerRunner::NerRunner(const ExperimentConfig& c, const NerData& data, const FoldPlan& plan, std::size_t fold)
    : data_(data) {
  if (plan.assignment.size() != data.corpus.size())
    fail(ErrorCode::InvalidArgument, "fold plan does not cover the corpus");
  if (fold >= plan.k) fail(ErrorCode::InvalidArgument, "fold index out of range");
  const std::size_t dev_fold = (fold + 1) % plan.k;
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    if (plan.assignment[i] == fold) test_.push_back(i);
    else if (plan.assignment[i] == dev_fold) dev_.push_back(i);
    else train_.push_back(i);
  }
  if (train_.empty()) fail(ErrorCode::InvalidArgument, "fold leaves no training sentences");
  model_ = std::make_unique<NerModel>(c, pick(data_.corpus, train_), data_.vectors ? &*data_.vectors : nullptr,
                                      data_.ctx ? &*data_.ctx : nullptr);
}

ad::Var NerRunner::example_loss(ad::Graph& g, std::size_t i) {
  const std::size_t idx = train_[i];
  return model_->loss(g, data_.corpus[idx], 0, data_.ctx ? &*data_.ctx : nullptr, idx);
}

Metrics NerRunner::evaluate(Split split) {
  const auto& idx = split == Split::Train ? train_ : split == Split::Dev ? dev_ : test_;
  return evaluate_ner(*model_, data_.corpus, idx, data_.ctx ? &*data_.ctx : nullptr);
}

CfRunner::CfRunner(const ExperimentConfig& c, const CfData& data, const SplitIndices& split)
    : data_(data), split_(split) {
  if (split_.train.empty() || split_.dev.empty()) fail(ErrorCode::InvalidArgument, "empty train or dev split");
  std::vector<Sentence> train;
  for (std::size_t i : split_.train) train.push_back(data_.corpus[i].sentence);
  model_ = std::make_unique<CfModel>(c, train, data_.vectors ? &*data_.vectors : nullptr,
                                     data_.ctx ? &*data_.ctx : nullptr);
}

ad::Var CfRunner::example_loss(ad::Graph& g, std::size_t i) {
  const std::size_t idx = split_.train[i];
  return model_->loss(g, data_.corpus[idx].sentence, data_.corpus[idx].label, data_.ctx ? &*data_.ctx : nullptr, idx);
}

Metrics CfRunner::evaluate(Split split) {
  const auto& idx = split == Split::Train ? split_.train : split == Split::Dev ? split_.dev : split_.test;
  return evaluate_cf(*model_, data_.corpus, idx, data_.ctx ? &*data_.ctx : nullptr);
}

}  // namespace morpho
