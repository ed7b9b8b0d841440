#include "morpho/morpho.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>

#include <json.hpp>

#include "harness.hpp"

using nlohmann::json;
using namespace morpho;

struct morpho_config {
  ExperimentConfig value;
};

struct morpho_treebank {
  std::vector<Sentence> sentences;
};

struct morpho_model {
  std::unique_ptr<Model> model;
};

namespace {

thread_local std::string g_last_error;

morpho_status status_of(ErrorCode c) { return static_cast<morpho_status>(static_cast<int>(c)); }

template <typename F>
morpho_status guard(F&& body) {
  try {
    body();
    return MORPHO_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MORPHO_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MORPHO_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  require(out, "output pointer");
  *out = copy_string(s);
}

struct LogFile {
  std::ofstream file;
  explicit LogFile(const char* path) {
    if (!path) return;
    file.open(path, std::ios::trunc);
    if (!file) fail(ErrorCode::Io, std::string("cannot write run log ") + path);
  }
  std::ostream* stream() { return file.is_open() ? &file : nullptr; }
};

json metrics_json(const Metrics& m) {
  json j(m.values);
  j["selection"] = m.selection;
  return j;
}

json experiment_json(const ExperimentResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"cell", c.cell},
                     {"seed", c.seed},
                     {"best_epoch", c.best_epoch},
                     {"best_dev", c.best_dev},
                     {"metrics", metrics_json(c.test)}});
  json j = {{"config_hash", r.config_hash}, {"config", json::parse(config_to_json(r.config))}, {"cells", cells}};
  if (r.feature_quality)
    j["feature_quality"] = {{"upos_accuracy", r.feature_quality->upos_accuracy()},
                            {"feats_accuracy", r.feature_quality->feats_accuracy()}};
  return j;
}

void fill_result(const stats::TestResult& r, morpho_test_result* out) {
  require(out, "result");
  std::memset(out, 0, sizeof *out);
  std::strncpy(out->test, r.test.c_str(), sizeof out->test - 1);
  out->statistic = r.statistic;
  out->p_value = r.p_value;
  out->alpha = r.alpha;
  out->n = r.n;
  out->exact = r.exact ? 1 : 0;
  out->reject = r.reject() ? 1 : 0;
}

std::vector<Sentence> read_sentences(std::string_view text, int strict, char** warnings) {
  std::vector<std::string> found;
  ParseOptions opts{strict ? ParseMode::Strict : ParseMode::Lenient, &found};
  auto sentences = parse_treebank(text, opts);
  if (warnings) {
    std::string joined;
    for (const auto& w : found) joined += w + "\n";
    *warnings = copy_string(joined);
  }
  return sentences;
}

}  // namespace

extern "C" {

const char* morpho_version(void) { return "0.1.0"; }

const char* morpho_last_error(void) { return g_last_error.c_str(); }

const char* morpho_status_name(morpho_status s) {
  switch (s) {
    case MORPHO_OK: return "ok";
    case MORPHO_E_INVALID_ARGUMENT: return "invalid argument";
    case MORPHO_E_IO: return "i/o error";
    case MORPHO_E_PARSE: return "parse error";
    case MORPHO_E_FORMAT: return "format error";
    case MORPHO_E_NUMERIC: return "numeric error";
    case MORPHO_E_SHAPE: return "shape error";
    case MORPHO_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void morpho_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------- config

morpho_status morpho_config_load(const char* path, morpho_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "output pointer");
    *out = new morpho_config{load_config(path)};
  });
}

morpho_status morpho_config_parse(const char* text, morpho_config** out) {
  return guard([&] {
    require(text, "json");
    require(out, "output pointer");
    *out = new morpho_config{parse_config(text)};
  });
}

morpho_status morpho_config_set(morpho_config* c, const char* key, const char* value) {
  return guard([&] {
    require(c, "config");
    require(key, "key");
    require(value, "value");
    set_config_value(c->value, key, value);
  });
}

morpho_status morpho_config_apply_env(morpho_config* c, int* applied) {
  return guard([&] {
    require(c, "config");
    const bool done = apply_seed_override(c->value);
    if (applied) *applied = done ? 1 : 0;
  });
}

morpho_status morpho_config_to_json(const morpho_config* c, char** out) {
  return guard([&] {
    require(c, "config");
    put_string(out, config_to_json(c->value, 2));
  });
}

morpho_status morpho_config_hash(const morpho_config* c, char** out) {
  return guard([&] {
    require(c, "config");
    put_string(out, config_hash(c->value));
  });
}

void morpho_config_free(morpho_config* c) { delete c; }

// ---------------------------------------------------------------- treebanks

morpho_status morpho_treebank_read(const char* path, int strict, morpho_treebank** out, char** warnings) {
  return guard([&] {
    require(path, "path");
    require(out, "output pointer");
    const std::string text = read_file(path);
    try {
      *out = new morpho_treebank{read_sentences(text, strict, warnings)};
    } catch (const Error& e) {
      fail(e.code(), std::string(path) + ": " + e.what());
    }
  });
}

morpho_status morpho_treebank_parse(const char* text, int strict, morpho_treebank** out, char** warnings) {
  return guard([&] {
    require(text, "text");
    require(out, "output pointer");
    *out = new morpho_treebank{read_sentences(text, strict, warnings)};
  });
}

size_t morpho_treebank_size(const morpho_treebank* t) { return t ? t->sentences.size() : 0; }

size_t morpho_treebank_token_count(const morpho_treebank* t) {
  std::size_t n = 0;
  if (t)
    for (const auto& s : t->sentences) n += s.size();
  return n;
}

morpho_status morpho_treebank_serialize(const morpho_treebank* t, char** out) {
  return guard([&] {
    require(t, "treebank");
    put_string(out, serialize_treebank(t->sentences));
  });
}

morpho_status morpho_feats_quality(const morpho_treebank* gold, const morpho_treebank* predicted, char** out) {
  return guard([&] {
    require(gold, "gold treebank");
    require(predicted, "predicted treebank");
    put_string(out, format_feats_quality(feats_quality(gold->sentences, predicted->sentences)));
  });
}

void morpho_treebank_free(morpho_treebank* t) { delete t; }

// ---------------------------------------------------------------- experiments

morpho_status morpho_train(const morpho_config* c, const char* checkpoint_path, const char* log_path,
                           char** report) {
  return guard([&] {
    require(c, "config");
    require(report, "output pointer");
    LogFile log(log_path);
    ExperimentOptions opts;
    opts.log = log.stream();
    if (checkpoint_path) opts.checkpoint_path = checkpoint_path;
    const ExperimentResult r = run_experiment(c->value, opts);
    json j = experiment_json(r);
    const ReportTable t = experiment_table(r);
    std::string text = render_text(t);
    if (r.feature_quality) text += format_feats_quality(*r.feature_quality);
    j["text"] = text;
    j["csv"] = render_csv(t);
    *report = copy_string(j.dump(2));
  });
}

morpho_status morpho_ablate(const morpho_config* c, int extra_epochs, const char* log_path, char** report) {
  return guard([&] {
    require(c, "config");
    require(report, "output pointer");
    if (extra_epochs < 0) fail(ErrorCode::InvalidArgument, "extra_epochs must be non-negative");
    LogFile log(log_path);
    AblationOptions opts;
    opts.experiment.log = log.stream();
    opts.extra_epochs = extra_epochs;
    const AblationResult a = ablate(c->value, opts);
    json rows = json::array();
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
      json tests = json::array();
      for (const auto& t : a.tests[i])
        tests.push_back({{"test", t.test}, {"statistic", t.statistic}, {"p_value", t.p_value},
                         {"n", t.n}, {"exact", t.exact}, {"reject", t.reject()}});
      json row = experiment_json(a.runs[i]);
      row["label"] = a.labels[i];
      row["tests"] = tests;
      rows.push_back(std::move(row));
    }
    json j = {{"rows", rows}, {"text", render_text(a.table)}, {"csv", render_csv(a.table)}};
    *report = copy_string(j.dump(2));
  });
}

// ---------------------------------------------------------------- models

morpho_status morpho_model_load(const char* checkpoint_path, morpho_model** out) {
  return guard([&] {
    require(checkpoint_path, "checkpoint path");
    require(out, "output pointer");
    auto model = model_from_checkpoint(load_checkpoint(checkpoint_path));
    *out = new morpho_model{std::move(model)};
  });
}

morpho_status morpho_model_config(const morpho_model* m, char** out) {
  return guard([&] {
    require(m, "model");
    put_string(out, config_to_json(m->model->config(), 2));
  });
}

morpho_status morpho_model_evaluate(morpho_model* m, const morpho_config* data, const char* split, char** metrics) {
  return guard([&] {
    require(m, "model");
    require(metrics, "output pointer");
    ExperimentConfig c = m->model->config();
    if (data) {
      c.data = data->value.data;
      c.feature_source = data->value.feature_source;
      c.noise_rate = data->value.noise_rate;
      c.noise_seed = data->value.noise_seed;
    }
    Metrics result;
    if (auto* dp = dynamic_cast<DpModel*>(m->model.get())) {
      const std::string which = split ? split : "test";
      DpData d = load_dp_data(c);
      if (which == "train") {
        result = evaluate_dp(*dp, d.train, d.ctx_train ? &*d.ctx_train : nullptr);
      } else if (which == "dev") {
        result = evaluate_dp(*dp, d.dev, d.ctx_dev ? &*d.ctx_dev : nullptr);
      } else if (which == "test") {
        if (d.test.empty()) fail(ErrorCode::InvalidArgument, "the data config names no test split");
        result = evaluate_dp(*dp, d.test, d.ctx_test ? &*d.ctx_test : nullptr);
        if (d.feature_quality) {
          result.values["upos_accuracy"] = d.feature_quality->upos_accuracy();
          result.values["feats_accuracy"] = d.feature_quality->feats_accuracy();
        }
      } else {
        fail(ErrorCode::InvalidArgument, "split must be train, dev or test");
      }
    } else if (auto* ner = dynamic_cast<NerModel*>(m->model.get())) {
      NerData d = load_ner_data(c);
      result = evaluate_ner(*ner, d.corpus, {}, d.ctx ? &*d.ctx : nullptr);
    } else if (auto* cf = dynamic_cast<CfModel*>(m->model.get())) {
      CfData d = load_cf_data(c);
      result = evaluate_cf(*cf, d.corpus, {}, d.ctx ? &*d.ctx : nullptr);
    } else {
      fail(ErrorCode::Internal, "unknown model type");
    }
    json j = metrics_json(result);
    j["config_hash"] = config_hash(m->model->config());
    *metrics = copy_string(j.dump(2));
  });
}

morpho_status morpho_model_predict(morpho_model* m, const morpho_treebank* input, const char* ctx_path, char** out) {
  return guard([&] {
    require(m, "model");
    require(input, "input treebank");
    require(out, "output pointer");
    std::optional<ContextDump> ctx;
    if (ctx_path) {
      ctx = load_context_dump(ctx_path);
      check_context_alignment(*ctx, input->sentences);
    } else if (m->model->config().parts.ctx) {
      fail(ErrorCode::InvalidArgument, "the model uses contextual embeddings; a context dump is required");
    }
    const ContextDump* cp = ctx ? &*ctx : nullptr;
    const auto& sentences = input->sentences;
    std::string text;
    if (auto* dp = dynamic_cast<DpModel*>(m->model.get())) {
      text = serialize_treebank(dp->predict(sentences, cp));
    } else if (auto* ner = dynamic_cast<NerModel*>(m->model.get())) {
      std::vector<Sentence> tagged = sentences;
      for (std::size_t i = 0; i < tagged.size(); ++i) {
        auto tags = ner->tagger().predict(tagged[i], cp, i);
        for (std::size_t k = 0; k < tags.size(); ++k) tagged[i].tokens[k].ner = tags[k];
      }
      text = serialize_ner(tagged);
    } else if (auto* cf = dynamic_cast<CfModel*>(m->model.get())) {
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        text += std::to_string(cf->classifier().classify(sentences[i], cp, i)) + "\t";
        for (std::size_t k = 0; k < sentences[i].size(); ++k)
          text += (k ? " " : "") + sentences[i].tokens[k].form;
        text += "\n";
      }
    } else {
      fail(ErrorCode::Internal, "unknown model type");
    }
    *out = copy_string(text);
  });
}

void morpho_model_free(morpho_model* m) { delete m; }

morpho_status morpho_dump_table(const char* checkpoint_path, const char* name, char** out) {
  return guard([&] {
    require(checkpoint_path, "checkpoint path");
    put_string(out, dump_table(load_checkpoint(checkpoint_path), name ? name : ""));
  });
}

// ---------------------------------------------------------------- statistics

morpho_status morpho_stats_wilcoxon(const double* a, const double* b, size_t n, double alpha,
                                    morpho_test_result* out) {
  return guard([&] {
    if (n > 0) {
      require(a, "a");
      require(b, "b");
    }
    fill_result(stats::wilcoxon_signed_rank({a, n}, {b, n}, alpha), out);
  });
}

morpho_status morpho_stats_ztest(long long x1, long long n1, long long x2, long long n2, double alpha,
                                 morpho_test_result* out) {
  return guard([&] { fill_result(stats::two_proportion_ztest(x1, n1, x2, n2, alpha), out); });
}

morpho_status morpho_test_result_format(const morpho_test_result* r, char** out) {
  return guard([&] {
    require(r, "result");
    stats::TestResult t;
    t.test = r->test;
    t.statistic = r->statistic;
    t.p_value = r->p_value;
    t.alpha = r->alpha;
    t.n = r->n;
    t.exact = r->exact != 0;
    put_string(out, stats::format_result_header() + "\n" + stats::format_result_row(t) + "\n");
  });
}

}  // extern "C"
