#include <doctest.h>

#include <cstdlib>

#include "config.hpp"

using namespace morpho;

namespace {

struct SeedEnv {
  explicit SeedEnv(const char* value) {
    if (value) setenv("MORPHOPARSE_SEED", value, 1);
    else unsetenv("MORPHOPARSE_SEED");
  }
  ~SeedEnv() { unsetenv("MORPHOPARSE_SEED"); }
};

}  // namespace

TEST_CASE("an empty document yields the defaults") {
  auto c = parse_config("{}");
  CHECK(c.task == Task::Dp);
  CHECK(c.parts.word);
  CHECK_FALSE(c.parts.upos);
  CHECK(c.feature_source == FeatureSource::Gold);
  CHECK(c.patience == 5);
  CHECK(c.layers == 3);
  CHECK(c.hidden == 400);
  CHECK(c.dropout == doctest::Approx(0.33));
  CHECK(c.upos_dim == 15);
  CHECK(c.feat_dim == 15);
  CHECK(c.folds == 10);
  CHECK(c.repeats == 5);
  CHECK(c.pool_hidden == 15);
  CHECK(c.mst);
}

TEST_CASE("nested keys override their defaults") {
  auto c = parse_config(R"({"task": "cf", "parts": ["word", "upos", "feats"], "feature_source": "noisy",
    "feature_noise": {"rate": 0.2}, "encoder": {"hidden": 50, "layers": 1},
    "classifier": {"pooling": "weighted"}, "parser": {"decoder": "greedy"}, "tagger": {"f1_mode": "token"},
    "optimizer": {"lr": 0.01}})");
  CHECK(c.task == Task::Cf);
  CHECK(c.parts.upos);
  CHECK(c.parts.feats);
  CHECK_FALSE(c.parts.ctx);
  CHECK(c.feature_source == FeatureSource::Noisy);
  CHECK(c.noise_rate == 0.2);
  CHECK(c.noise_seed == 7);
  CHECK(c.hidden == 50);
  CHECK(c.layers == 1);
  CHECK(c.pooling == "weighted");
  CHECK_FALSE(c.mst);
  CHECK(c.f1_mode == F1Mode::Token);
  CHECK(c.adam.lr == 0.01);
}

TEST_CASE("unknown keys, wrong types and bad values are errors") {
  auto code_of = [](const char* text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  CHECK(code_of(R"({"epoch": 3})") == ErrorCode::Parse);
  CHECK(code_of(R"({"encoder": {"hiden": 3}})") == ErrorCode::Parse);
  CHECK(code_of(R"({"epochs": "ten"})") == ErrorCode::Parse);
  CHECK(code_of(R"({"parts": ["morph"]})") == ErrorCode::Parse);
  CHECK(code_of(R"({"task": "pos"})") == ErrorCode::Parse);
  CHECK(code_of("{ not json") == ErrorCode::Parse);
  CHECK(code_of(R"({"parts": []})") == ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"encoder": {"dropout": 1.0}})") == ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"tagger": {"fold": 10}})") == ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"classifier": {"pooling": "max"}})") == ErrorCode::InvalidArgument);
  try {
    parse_config(R"({"encoder": {"hiden": 3}})");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("encoder.hiden") != std::string::npos);
  }
}

TEST_CASE("the canonical JSON round-trips and the hash tracks every field") {
  auto c = parse_config(R"({"task": "ner", "parts": ["word", "feats"], "seed": 4})");
  auto text = config_to_json(c);
  CHECK(config_to_json(parse_config(text)) == text);
  CHECK(config_hash(parse_config(text)) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  auto d = c;
  d.adam.eps = 1e-9;
  CHECK(config_hash(d) != config_hash(c));
  d = c;
  d.parts.upos = true;
  CHECK(config_hash(d) != config_hash(c));
  CHECK(config_to_json(c, 2).find('\n') != std::string::npos);
}

TEST_CASE("MORPHOPARSE_SEED replaces the configured seed") {
  auto c = parse_config(R"({"seed": 4})");
  {
    SeedEnv env(nullptr);
    CHECK_FALSE(apply_seed_override(c));
    CHECK(c.seed == 4);
  }
  {
    SeedEnv env("12345");
    CHECK(apply_seed_override(c));
    CHECK(c.seed == 12345);
  }
  {
    SeedEnv env("12x");
    CHECK_THROWS_AS(apply_seed_override(c), Error);
  }
}

TEST_CASE("single values are set by dotted key") {
  ExperimentConfig c;
  set_config_value(c, "encoder.hidden", "64");
  set_config_value(c, "classifier.pooling", "lstm");
  set_config_value(c, "parts", R"(["word","upos"])");
  set_config_value(c, "data.train", "some/path.conllu");
  CHECK(c.hidden == 64);
  CHECK(c.pooling == "lstm");
  CHECK(c.parts.upos);
  CHECK(c.data.train == "some/path.conllu");
  CHECK_THROWS_AS(set_config_value(c, "encoder.width", "3"), Error);
  CHECK_THROWS_AS(set_config_value(c, "encoder.hidden", "\"wide\""), Error);
}

TEST_CASE("configs load from files and name the file in errors") {
  const std::string path = "test_config_tmp.json";
  write_file(path, R"({"epochs": 3})");
  CHECK(load_config(path).epochs == 3);
  write_file(path, R"({"epochs": 0})");
  try {
    load_config(path);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("does/not/exist.json"), Error);
}
