#include <doctest.h>

#include "conllu.hpp"

using namespace morpho;

namespace {

const char* kTwoSentences =
    "# sent_id = a1\n"
    "# text = Kedi uyudu .\n"
    "1\tKedi\tkedi\tNOUN\t_\tCase=Nom|Number=Sing\t2\tnsubj\t_\t_\n"
    "2\tuyudu\tuyu\tVERB\t_\tTense=Past\t0\troot\t_\tSpaceAfter=No\n"
    "3\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n"
    "\n"
    "# sent_id = a2\n"
    "1-2\tgeldim\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tgel\tgel\tVERB\t_\t_\t0\troot\t_\t_\n"
    "2\tdim\ti\tAUX\t_\tPerson=1\t1\tcop\t_\t_\n"
    "\n";

std::string line(const std::string& head) {
  return "1\ta\ta\tNOUN\t_\t_\t" + head + "\troot\t_\t_\n";
}

}  // namespace

TEST_CASE("a well-formed treebank round-trips byte for byte") {
  auto s = parse_treebank(kTwoSentences);
  REQUIRE(s.size() == 2);
  CHECK(s[0].id == "a1");
  CHECK(s[0].tokens[0].upos == Upos::NOUN);
  CHECK(s[0].tokens[0].feats.at("Case") == "Nom");
  CHECK(s[0].tokens[2].head == 2);
  CHECK(s[1].size() == 2);  // the multiword range is not a syntactic word
  CHECK(serialize_treebank(s) == kTwoSentences);
}

TEST_CASE("feature maps sort names case-insensitively and reject malformed pairs") {
  auto f = parse_feats("Number=Sing|Case=Nom|Abbr=Yes");
  CHECK(serialize_feats(f) == "Abbr=Yes|Case=Nom|Number=Sing");
  CHECK(parse_feats("_").empty());
  CHECK_THROWS_AS(parse_feats("Case"), Error);
  CHECK_THROWS_AS(parse_feats("Case=Nom|Case=Acc"), Error);
  CHECK_THROWS_AS(parse_feats("Typo=Yes"), Error);
  std::vector<std::string> warnings;
  auto lenient = parse_feats("Typo=Yes|Case=Nom", {ParseMode::Lenient, &warnings});
  CHECK(lenient.size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("strict parsing rejects what lenient parsing repairs") {
  const std::string two_roots = line("0") + "2\tb\tb\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
  CHECK_THROWS_AS(parse_treebank(two_roots), Error);
  std::vector<std::string> warnings;
  auto s = parse_treebank(two_roots, {ParseMode::Lenient, &warnings});
  REQUIRE(s.size() == 1);
  CHECK(tree_violation(heads_of(s[0])).empty());
  CHECK_FALSE(warnings.empty());

  const std::string cycle = "1\ta\ta\tNOUN\t_\t_\t2\tx\t_\t_\n2\tb\tb\tNOUN\t_\t_\t1\tx\t_\t_\n\n";
  CHECK_THROWS_AS(parse_treebank(cycle), Error);
  auto repaired = parse_treebank(cycle, {ParseMode::Lenient, nullptr});
  CHECK(tree_violation(heads_of(repaired[0])).empty());

  const std::string no_head = "1\ta\ta\tNOUN\t_\t_\t_\troot\t_\t_\n\n";
  CHECK_THROWS_AS(parse_treebank(no_head), Error);
  CHECK(parse_treebank(no_head, {ParseMode::Lenient, nullptr})[0].tokens[0].head == 0);
}

TEST_CASE("structural errors are fatal in both modes and carry the line number") {
  for (auto mode : {ParseMode::Strict, ParseMode::Lenient}) {
    try {
      parse_treebank("1\ta\ta\tNOUN\t_\t_\t0\n\n", {mode, nullptr});
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Parse);
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_treebank(line("0") + "3\tb\tb\tNOUN\t_\t_\t1\tx\t_\t_\n\n", {mode, nullptr}), Error);
    CHECK_THROWS_AS(parse_treebank(line("7") + "\n", {mode, nullptr}), Error);
    CHECK_THROWS_AS(parse_treebank(line("x") + "\n", {mode, nullptr}), Error);
  }
}

TEST_CASE("tree_violation detects roots and cycles") {
  CHECK(tree_violation({0}).empty());
  CHECK(tree_violation({2, 0, 2}).empty());
  CHECK_FALSE(tree_violation({0, 0}).empty());
  CHECK_FALSE(tree_violation({2, 1}).empty());
  CHECK_FALSE(tree_violation({2, 3, 2, 0}).empty());
  CHECK_FALSE(tree_violation({1}).empty());
}

TEST_CASE("every sentence of the bundled treebank is a single-rooted tree") {
  for (const char* split : {"train", "dev", "test"}) {
    auto s = read_treebank(std::string(MORPHO_TEST_DATA) + "/twt/" + split + ".conllu");
    CHECK(s.size() >= 300);
    for (const auto& sent : s) CHECK(tree_violation(heads_of(sent)).empty());
    CHECK(parse_treebank(serialize_treebank(s)).size() == s.size());
    CHECK(serialize_treebank(parse_treebank(serialize_treebank(s))) == serialize_treebank(s));
  }
}

TEST_CASE("predicted annotations replace morphology and keep syntax") {
  auto gold = parse_treebank(kTwoSentences);
  auto pred = gold;
  pred[0].tokens[0].upos = Upos::PROPN;
  pred[0].tokens[1].feats.clear();
  pred[0].tokens[1].head = 3;
  auto r = attach_predicted_annotations(gold, pred);
  CHECK(r.sentences[0].tokens[0].upos == Upos::PROPN);
  CHECK(r.sentences[0].tokens[1].head == 0);
  CHECK(r.agreement.tokens == 5);
  CHECK(r.agreement.upos_equal == 4);
  CHECK(r.agreement.feats_equal == 4);
  CHECK_FALSE(r.upos_agrees[0][0]);
  CHECK(format_feats_quality(r.agreement) == "UPOS accuracy (%): 80.00\nfeats accuracy (%): 80.00\n");
  pred.pop_back();
  CHECK_THROWS_AS(attach_predicted_annotations(gold, pred), Error);
}

TEST_CASE("corruption hits about the requested fraction of tokens, reproducibly") {
  auto s = read_treebank(std::string(MORPHO_TEST_DATA) + "/twt/dev.conllu");
  auto noisy = corrupt_annotations(s, 0.15, 7);
  auto q = feats_quality(s, noisy);
  CHECK(q.upos_accuracy() == doctest::Approx(0.85).epsilon(0.02));
  CHECK(q.feats_accuracy() > 0.80);
  CHECK(q.feats_accuracy() < 0.95);
  CHECK(serialize_treebank(corrupt_annotations(s, 0.15, 7)) == serialize_treebank(noisy));
  CHECK(serialize_treebank(corrupt_annotations(s, 0.0, 7)) == serialize_treebank(s));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = 0; k < s[i].size(); ++k) {
      CHECK(noisy[i].tokens[k].head == s[i].tokens[k].head);
      CHECK(noisy[i].tokens[k].form == s[i].tokens[k].form);
    }
  CHECK_THROWS_AS(corrupt_annotations(s, 1.5, 7), Error);
}
