#include <doctest.h>

#include <cstdio>

#include "checkpoint.hpp"
#include "harness.hpp"

using namespace morpho;

namespace {

ad::ParameterStore small_store(std::uint64_t seed) {
  ad::ParameterStore s;
  s.add_uniform("a", 2, 3, 1.0, seed);
  s.add_uniform("b", 4, 1, 1.0, seed);
  return s;
}

ExperimentConfig tiny_dp() {
  ExperimentConfig c;
  const std::string twt = std::string(MORPHO_TEST_DATA) + "/twt/";
  c.data.train = twt + "train.conllu";
  c.data.dev = twt + "dev.conllu";
  c.data.max_train_sentences = 40;
  c.parts = {true, false, true, true};
  c.word_dim = 16;
  c.upos_dim = 4;
  c.feat_dim = 2;
  c.layers = 1;
  c.hidden = 16;
  c.arc_dim = 16;
  c.label_dim = 8;
  c.epochs = 2;
  return c;
}

}  // namespace

TEST_CASE("a checkpoint round-trips names, shapes, values and metadata") {
  auto store = small_store(3);
  auto ckpt = make_checkpoint(store, R"({"k": "değer"})");
  auto back = parse_checkpoint(serialize_checkpoint(ckpt));
  CHECK(back.meta == ckpt.meta);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].name == "a");
  CHECK(back.entries[0].dims == std::vector<std::uint32_t>{2, 3});
  CHECK(back.entries[0].values == ckpt.entries[0].values);
  // Row-major payload.
  CHECK(back.entries[0].values[1] == float(store.get("a").value(0, 1)));

  auto other = small_store(4);
  restore_parameters(back, other);
  CHECK(other.get("a").value == store.get("a").value);
  CHECK(other.get("b").value == store.get("b").value);
}

TEST_CASE("the byte layout starts with the magic and version and ends with a CRC") {
  auto bytes = serialize_checkpoint(make_checkpoint(small_store(1), "{}"));
  CHECK(bytes.substr(0, 4) == "MCK1");
  CHECK(std::uint8_t(bytes[4]) == kCheckpointVersion);
  CHECK(bytes[5] == 0);
  // meta entry (9 name bytes, rank 1, 2 json bytes) + a (2x3) + b (4x1)
  const std::size_t expected = 12 + (2 + 9 + 1 + 4 + 2 * 4) + (2 + 1 + 1 + 8 + 6 * 4) + (2 + 1 + 1 + 8 + 4 * 4) + 4;
  CHECK(bytes.size() == expected);
}

TEST_CASE("damaged checkpoints are rejected with a format error") {
  const auto good = serialize_checkpoint(make_checkpoint(small_store(1), "{}"));
  auto code_of = [](const std::string& bytes) {
    try {
      parse_checkpoint(bytes);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code_of(bad_magic) == ErrorCode::Format);
  std::string bad_version = good;
  bad_version[4] = 9;
  CHECK(code_of(bad_version) == ErrorCode::Format);
  std::string flipped = good;
  flipped[good.size() / 2] ^= 0x10;
  CHECK(code_of(flipped) == ErrorCode::Format);
  for (std::size_t cut : {std::size_t(3), std::size_t(15), good.size() / 2, good.size() - 1})
    CHECK(code_of(good.substr(0, cut)) == ErrorCode::Format);
  CHECK(code_of("") == ErrorCode::Format);
}

TEST_CASE("a restore with mismatched shapes changes nothing") {
  auto ckpt = make_checkpoint(small_store(1), "{}");
  ad::ParameterStore target;
  target.add_uniform("a", 2, 3, 1.0, 7);
  target.add_uniform("b", 5, 1, 1.0, 7);
  const auto before_a = target.get("a").value;
  try {
    restore_parameters(ckpt, target);
    FAIL("expected a shape error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Shape);
  }
  CHECK(target.get("a").value == before_a);

  ad::ParameterStore missing;
  missing.add("c", 1, 1);
  CHECK_THROWS_AS(restore_parameters(ckpt, missing), Error);
  ad::ParameterStore fewer;
  fewer.add("a", 2, 3);
  CHECK_THROWS_AS(restore_parameters(ckpt, fewer), Error);
}

TEST_CASE("dump_table lists entries and prints one row per line") {
  auto store = small_store(2);
  store.get("a").value << 1, 2, 3, 4, 5, 6.5;
  auto ckpt = make_checkpoint(store, "{}");
  CHECK(dump_table(ckpt, "") == "a 2x3\nb 4x1\n");
  CHECK(dump_table(ckpt, "a") == "a 2 3\n1 2 3\n4 5 6.5\n");
  CHECK_THROWS_AS(dump_table(ckpt, "zzz"), Error);
}

TEST_CASE("files save and load, and load errors name the path") {
  const std::string path = "test_checkpoint_tmp.mck";
  auto ckpt = make_checkpoint(small_store(5), "{\"x\":1}");
  save_checkpoint(path, ckpt);
  auto back = load_checkpoint(path);
  CHECK(back.meta == ckpt.meta);
  CHECK(back.entries[1].values == ckpt.entries[1].values);
  std::remove(path.c_str());
  try {
    load_checkpoint(path);
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}

TEST_CASE("a trained parser reloads with identical predictions and dev scores") {
  auto c = tiny_dp();
  auto data = load_dp_data(c);
  DpRunner runner(c, data);
  auto result = train(runner, c);
  auto& model = dynamic_cast<DpModel&>(runner.model());
  const auto bytes = serialize_checkpoint(checkpoint_of(model, result.best_epoch, result.best_dev));

  auto reloaded = model_from_checkpoint(parse_checkpoint(bytes));
  auto* dp = dynamic_cast<DpModel*>(reloaded.get());
  REQUIRE(dp != nullptr);
  CHECK(config_hash(dp->config()) == config_hash(c));
  auto before = evaluate_dp(model, data.dev, nullptr);
  auto after = evaluate_dp(*dp, data.dev, nullptr);
  CHECK(after.selection == before.selection);
  CHECK(after.selection == result.best_dev);
  CHECK(serialize_treebank(dp->predict(data.dev, nullptr)) == serialize_treebank(model.predict(data.dev, nullptr)));

  auto meta = parse_checkpoint(bytes).meta;
  CHECK(meta.find("\"config_hash\"") != std::string::npos);
  CHECK(meta.find("\"epoch\"") != std::string::npos);
}
