#include "embed.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>

namespace morpho {

using ad::Matrix;
using ad::Var;

// ---------------------------------------------------------------- vectors

int WordVectors::find(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? -1 : it->second;
}

WordVectors parse_vectors(std::string_view text, std::vector<std::string>* warnings) {
  auto lines = split(text, '\n');
  std::size_t ln = 0;
  while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
  if (ln == lines.size()) fail(ErrorCode::Parse, "vector file is empty");
  auto header = split(trim(lines[ln]), ' ');
  long declared = 0, dim = 0;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), declared).ec != std::errc{} ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc{} ||
      declared < 0 || dim < 1)
    fail(ErrorCode::Parse, "line " + std::to_string(ln + 1) + ": expected header 'count dim'");

  WordVectors out;
  out.dim = static_cast<int>(dim);
  std::vector<Real> values;
  for (++ln; ln < lines.size(); ++ln) {
    std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (auto f : split(line, ' '))
      if (!f.empty()) fields.push_back(f);
    const std::string where = "line " + std::to_string(ln + 1);
    if (static_cast<long>(fields.size()) != dim + 1)
      fail(ErrorCode::Parse, where + ": expected " + std::to_string(dim) + " values, found " +
                                 std::to_string(fields.size() - 1));
    std::string word(fields[0]);
    std::vector<Real> row(static_cast<std::size_t>(dim));
    for (long k = 0; k < dim; ++k) {
      std::string_view f = fields[static_cast<std::size_t>(k + 1)];
      double v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v))
        fail(ErrorCode::Parse, where + ": non-numeric value '" + std::string(f) + "'");
      row[static_cast<std::size_t>(k)] = static_cast<Real>(v);
    }
    if (out.index.count(word)) {
      if (warnings) warnings->push_back(where + ": duplicate token '" + word + "' ignored");
      continue;
    }
    out.index[word] = static_cast<int>(out.words.size());
    out.words.push_back(std::move(word));
    values.insert(values.end(), row.begin(), row.end());
  }
  if (static_cast<long>(out.words.size()) != declared && warnings)
    warnings->push_back("header declares " + std::to_string(declared) + " vectors, found " +
                        std::to_string(out.words.size()));
  out.matrix = Eigen::Map<Matrix>(values.data(), dim, static_cast<ad::Index>(out.words.size()));
  return out;
}

WordVectors load_vectors(const std::string& path, std::vector<std::string>* warnings) {
  try {
    return parse_vectors(read_file(path), warnings);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_vectors(const WordVectors& v) {
  std::string out = std::to_string(v.size()) + " " + std::to_string(v.dim) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += v.words[i];
    for (int k = 0; k < v.dim; ++k) {
      auto res = std::to_chars(buf, buf + sizeof buf, v.matrix(k, static_cast<ad::Index>(i)));
      out += ' ';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- vocabularies

int WordVocab::id(const std::string& form) const {
  auto it = ids.find(form);
  return it == ids.end() ? 0 : it->second;
}

WordVocab WordVocab::from_list(std::vector<std::string> words) {
  WordVocab v;
  v.words = std::move(words);
  if (v.words.empty() || v.words[0] != "<unk>") v.words.insert(v.words.begin(), "<unk>");
  for (std::size_t i = 1; i < v.words.size(); ++i) v.ids.emplace(v.words[i], static_cast<int>(i));
  return v;
}

WordVocab WordVocab::build(const std::vector<Sentence>& train, int min_count, const WordVectors* vectors) {
  std::map<std::string, int> counts;
  for (const auto& s : train)
    for (const auto& t : s.tokens) ++counts[t.form];
  std::vector<std::string> words{"<unk>"};
  for (const auto& [w, c] : counts)
    if (c >= min_count || (vectors && vectors->find(w) >= 0)) words.push_back(w);
  return from_list(std::move(words));
}

int MorphVocab::value_id(std::size_t feature, const std::string& value) const {
  const auto& vals = values[feature];
  auto it = std::lower_bound(vals.begin(), vals.end(), value);
  if (it == vals.end() || *it != value) return 0;
  return static_cast<int>(it - vals.begin()) + 1;
}

MorphVocab MorphVocab::build(const std::vector<Sentence>& train) {
  MorphVocab v;
  for (const auto& s : train)
    for (const auto& t : s.tokens)
      for (const auto& [name, value] : t.feats)
        if (auto f = feature_index(name)) v.values[*f].push_back(value);
  for (auto& vals : v.values) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  }
  return v;
}

// ---------------------------------------------------------------- context dump

namespace {

constexpr char kCtxMagic[4] = {'C', 'T', 'X', 'D'};

struct ByteReader {
  std::string_view bytes;
  std::size_t pos = 0;

  std::uint32_t u32(const char* what) {
    if (bytes.size() - pos < 4) fail(ErrorCode::Format, std::string("truncated context dump reading ") + what);
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(bytes[pos + std::size_t(k)]);
    pos += 4;
    return v;
  }
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

}  // namespace

Matrix ContextDump::layer(std::size_t sentence, std::uint32_t l) const {
  const auto& data = sentences.at(sentence);
  const std::size_t n = tokens(sentence);
  Matrix m(dim, static_cast<ad::Index>(n));
  for (std::size_t t = 0; t < n; ++t)
    for (std::uint32_t k = 0; k < dim; ++k)
      m(k, static_cast<ad::Index>(t)) = static_cast<Real>(data[(t * layers + l) * dim + k]);
  return m;
}

ContextDump parse_context_dump(std::string_view bytes) {
  if (bytes.size() < 4 || !std::equal(kCtxMagic, kCtxMagic + 4, bytes.begin()))
    fail(ErrorCode::Format, "not a context dump (bad magic)");
  ByteReader r{bytes, 4};
  std::uint32_t version = r.u32("version");
  if (version != kContextDumpVersion)
    fail(ErrorCode::Format, "unsupported context dump version " + std::to_string(version));
  ContextDump d;
  d.layers = r.u32("layer count");
  d.dim = r.u32("dimension");
  if (d.layers == 0 || d.dim == 0) fail(ErrorCode::Format, "context dump has zero layers or dimension");
  std::uint32_t count = r.u32("sentence count");
  d.sentences.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    std::uint32_t n = r.u32("token count");
    const std::size_t floats = std::size_t(n) * d.layers * d.dim;
    if ((bytes.size() - r.pos) / 4 < floats)
      fail(ErrorCode::Format, "truncated context dump in sentence " + std::to_string(s));
    std::vector<float> values(floats);
    for (std::size_t i = 0; i < floats; ++i) values[i] = std::bit_cast<float>(r.u32("value"));
    d.sentences.push_back(std::move(values));
  }
  if (r.pos != bytes.size())
    fail(ErrorCode::Format, std::to_string(bytes.size() - r.pos) + " trailing bytes after context dump");
  return d;
}

ContextDump load_context_dump(const std::string& path) {
  try {
    return parse_context_dump(read_file(path));
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string serialize_context_dump(const ContextDump& dump) {
  std::string out(kCtxMagic, 4);
  put_u32(out, kContextDumpVersion);
  put_u32(out, dump.layers);
  put_u32(out, dump.dim);
  put_u32(out, static_cast<std::uint32_t>(dump.sentences.size()));
  for (std::size_t s = 0; s < dump.sentences.size(); ++s) {
    const auto& v = dump.sentences[s];
    if (v.size() % (std::size_t(dump.layers) * dump.dim) != 0)
      fail(ErrorCode::Shape, "context dump sentence " + std::to_string(s) + " is not a whole number of tokens");
    put_u32(out, static_cast<std::uint32_t>(dump.tokens(s)));
    for (float f : v) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

void check_context_alignment(const ContextDump& dump, const std::vector<Sentence>& corpus) {
  if (dump.sentences.size() != corpus.size())
    fail(ErrorCode::InvalidArgument, "context dump has " + std::to_string(dump.sentences.size()) +
                                         " sentences, corpus has " + std::to_string(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (dump.tokens(i) != corpus[i].size())
      fail(ErrorCode::InvalidArgument, "context dump sentence " + std::to_string(i) + " has " +
                                           std::to_string(dump.tokens(i)) + " tokens, corpus has " +
                                           std::to_string(corpus[i].size()));
}

Var scalar_mix(std::span<const Var> layers, Var logits, Var gamma) {
  if (layers.empty()) fail(ErrorCode::InvalidArgument, "scalar_mix: no layers");
  if (logits.rows() != static_cast<ad::Index>(layers.size()) || logits.cols() != 1)
    fail(ErrorCode::Shape, "scalar_mix: " + std::to_string(layers.size()) + " layers but logits of " +
                               std::to_string(logits.rows()) + "x" + std::to_string(logits.cols()));
  Var w = ad::softmax(logits);
  Var acc;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows() != layers[0].rows() || layers[l].cols() != layers[0].cols())
      fail(ErrorCode::Shape, "scalar_mix: layer " + std::to_string(l) + " differs in shape from layer 0");
    Var term = ad::scale_by(ad::rows(w, static_cast<ad::Index>(l), 1), layers[l]);
    acc = l == 0 ? term : ad::add(acc, term);
  }
  return ad::scale_by(gamma, acc);
}

// ---------------------------------------------------------------- embedder

Embedder::Embedder(EmbedSpec spec, WordVocab words, MorphVocab morph)
    : spec_(spec), words_(std::move(words)), morph_(std::move(morph)) {
  if (!spec_.parts.word && !spec_.parts.ctx && !spec_.parts.upos && !spec_.parts.feats)
    fail(ErrorCode::InvalidArgument, "no input parts enabled");
  if (spec_.parts.ctx && (spec_.ctx_layers < 1 || spec_.ctx_dim < 1))
    fail(ErrorCode::InvalidArgument, "ctx part enabled without a context dump");
}

void Embedder::create_parameters(ad::ParameterStore& store, std::uint64_t seed,
                                 const WordVectors* vectors) const {
  const auto& p = spec_.parts;
  if (p.word) {
    auto& table = store.add_uniform("embed.word", spec_.word_dim, static_cast<ad::Index>(words_.size()),
                                    std::sqrt(3.0 / spec_.word_dim), seed);
    if (vectors) {
      if (vectors->dim != spec_.word_dim)
        fail(ErrorCode::Shape, "word vectors have dimension " + std::to_string(vectors->dim) +
                                   " but the word embedding size is " + std::to_string(spec_.word_dim));
      for (std::size_t i = 1; i < words_.size(); ++i) {
        int row = vectors->find(words_.words[i]);
        if (row >= 0) table.value.col(static_cast<ad::Index>(i)) = vectors->matrix.col(row);
      }
    }
  }
  if (p.ctx) {
    store.add("embed.mix.logits", spec_.ctx_layers, 1);
    store.add("embed.mix.gamma", 1, 1).value(0, 0) = 1;
  }
  if (p.upos)
    store.add_uniform("embed.upos", spec_.upos_dim, static_cast<ad::Index>(kUposCount),
                      std::sqrt(3.0 / spec_.upos_dim), seed);
  if (p.feats) {
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      store.add_uniform("embed.feat." + std::string(feature_inventory()[f]), spec_.feat_dim,
                        static_cast<ad::Index>(morph_.values[f].size() + 1), std::sqrt(3.0 / spec_.feat_dim),
                        seed);
  }
}

int Embedder::output_dim() const {
  const auto& p = spec_.parts;
  return (p.word ? spec_.word_dim : 0) + (p.ctx ? spec_.ctx_dim : 0) + (p.upos ? spec_.upos_dim : 0) +
         (p.feats ? spec_.feat_dim * static_cast<int>(kFeatureCount) : 0);
}

Var Embedder::embed_words(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const {
  std::vector<int> ids;
  for (const auto& t : s.tokens) ids.push_back(words_.id(t.form));
  return ad::embedding_lookup(g.param(store.get("embed.word")), std::move(ids));
}

Var Embedder::embed_upos(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const {
  std::vector<int> ids;
  for (const auto& t : s.tokens) ids.push_back(static_cast<int>(t.upos));
  return ad::embedding_lookup(g.param(store.get("embed.upos")), std::move(ids));
}

Var Embedder::embed_feats(ad::Graph& g, ad::ParameterStore& store, const Sentence& s) const {
  std::vector<Var> segments;
  segments.reserve(kFeatureCount);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const std::string name(feature_inventory()[f]);
    std::vector<int> ids;
    for (const auto& t : s.tokens) {
      auto it = t.feats.find(name);
      ids.push_back(it == t.feats.end() ? 0 : morph_.value_id(f, it->second));
    }
    segments.push_back(ad::embedding_lookup(g.param(store.get("embed.feat." + name)), std::move(ids)));
  }
  return ad::concat_rows(segments);
}

Var Embedder::embed(ad::Graph& g, ad::ParameterStore& store, const Sentence& s, const ContextDump* ctx,
                    std::size_t ctx_index) const {
  return embed_parts(g, store, s, spec_.parts, ctx, ctx_index);
}

Var Embedder::embed_parts(ad::Graph& g, ad::ParameterStore& store, const Sentence& s, Parts p,
                          const ContextDump* ctx, std::size_t ctx_index) const {
  if (s.tokens.empty()) fail(ErrorCode::InvalidArgument, "cannot embed an empty sentence");
  if ((p.word && !spec_.parts.word) || (p.ctx && !spec_.parts.ctx) || (p.upos && !spec_.parts.upos) ||
      (p.feats && !spec_.parts.feats))
    fail(ErrorCode::InvalidArgument, "requested an input part that is not configured");
  if (!p.word && !p.ctx && !p.upos && !p.feats) fail(ErrorCode::InvalidArgument, "no input parts requested");
  std::vector<Var> parts;
  if (p.word) parts.push_back(embed_words(g, store, s));
  if (p.ctx) {
    if (!ctx) fail(ErrorCode::InvalidArgument, "ctx part requested without a context dump");
    if (ctx->layers != static_cast<std::uint32_t>(spec_.ctx_layers) ||
        ctx->dim != static_cast<std::uint32_t>(spec_.ctx_dim))
      fail(ErrorCode::Shape, "context dump shape differs from the model's");
    if (ctx_index >= ctx->sentences.size() || ctx->tokens(ctx_index) != s.size())
      fail(ErrorCode::InvalidArgument, "context dump is not aligned at sentence " + std::to_string(ctx_index));
    std::vector<Var> layers;
    for (std::uint32_t l = 0; l < ctx->layers; ++l) layers.push_back(g.input(ctx->layer(ctx_index, l)));
    parts.push_back(scalar_mix(layers, g.param(store.get("embed.mix.logits")),
                               g.param(store.get("embed.mix.gamma"))));
  }
  if (p.upos) parts.push_back(embed_upos(g, store, s));
  if (p.feats) parts.push_back(embed_feats(g, store, s));
  return parts.size() == 1 ? parts[0] : ad::concat_rows(parts);
}

}  // namespace morpho
