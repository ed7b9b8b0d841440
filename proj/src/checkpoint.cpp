#include "checkpoint.hpp"

#include <bit>
#include <charconv>
#include <zlib.h>

namespace morpho {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', '1'};

void put(std::string& out, std::uint64_t v, int bytes) {
  for (int k = 0; k < bytes; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;

  std::uint64_t get(int n, const char* what) {
    if (bytes.size() - pos < std::size_t(n)) fail(ErrorCode::Format, std::string("checkpoint truncated in ") + what);
    std::uint64_t v = 0;
    for (int k = n - 1; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(bytes[pos + std::size_t(k)]);
    pos += std::size_t(n);
    return v;
  }
  std::string_view take(std::size_t n, const char* what) {
    if (bytes.size() - pos < n) fail(ErrorCode::Format, std::string("checkpoint truncated in ") + what);
    auto s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::uint32_t crc32_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < data.size()) {
    const std::size_t n = std::min<std::size_t>(data.size() - off, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + off), static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

Checkpoint make_checkpoint(const ad::ParameterStore& params, std::string meta) {
  Checkpoint c;
  c.meta = std::move(meta);
  for (const ad::Parameter* p : params.all()) {
    CheckpointEntry e;
    e.name = p->name;
    e.dims = {static_cast<std::uint32_t>(p->value.rows()), static_cast<std::uint32_t>(p->value.cols())};
    e.values.reserve(static_cast<std::size_t>(p->value.size()));
    for (ad::Index r = 0; r < p->value.rows(); ++r)
      for (ad::Index col = 0; col < p->value.cols(); ++col) e.values.push_back(static_cast<float>(p->value(r, col)));
    c.entries.push_back(std::move(e));
  }
  return c;
}

void restore_parameters(const Checkpoint& ckpt, ad::ParameterStore& params) {
  std::vector<std::pair<ad::Parameter*, const CheckpointEntry*>> plan;
  for (ad::Parameter* p : params.all()) {
    const CheckpointEntry* e = ckpt.find(p->name);
    if (!e) fail(ErrorCode::Format, "checkpoint lacks parameter '" + p->name + "'");
    if (e->dims.size() != 2 || e->dims[0] != p->value.rows() || e->dims[1] != p->value.cols())
      fail(ErrorCode::Shape, "checkpoint entry '" + p->name + "' does not match the configured shape " +
                                 std::to_string(p->value.rows()) + "x" + std::to_string(p->value.cols()));
    plan.emplace_back(p, e);
  }
  if (plan.size() != ckpt.entries.size())
    fail(ErrorCode::Format, "checkpoint has " + std::to_string(ckpt.entries.size()) +
                                " parameters, the configured model has " + std::to_string(plan.size()));
  for (auto [p, e] : plan) {
    std::size_t k = 0;
    for (ad::Index r = 0; r < p->value.rows(); ++r)
      for (ad::Index col = 0; col < p->value.cols(); ++col) p->value(r, col) = static_cast<Real>(e->values[k++]);
    p->grad.setZero();
  }
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, 4);
  put(out, kCheckpointVersion, 4);
  put(out, ckpt.entries.size() + 1, 4);
  auto write_entry = [&](const std::string& name, const std::vector<std::uint32_t>& dims, auto&& value_at,
                         std::size_t count) {
    if (name.size() > 0xFFFF) fail(ErrorCode::InvalidArgument, "checkpoint entry name too long");
    if (dims.size() > 0xFF) fail(ErrorCode::InvalidArgument, "checkpoint entry rank too large");
    put(out, name.size(), 2);
    out += name;
    put(out, dims.size(), 1);
    for (auto d : dims) put(out, d, 4);
    for (std::size_t i = 0; i < count; ++i) put(out, std::bit_cast<std::uint32_t>(value_at(i)), 4);
  };
  write_entry(kMetaEntry, {static_cast<std::uint32_t>(ckpt.meta.size())},
              [&](std::size_t i) { return static_cast<float>(static_cast<unsigned char>(ckpt.meta[i])); },
              ckpt.meta.size());
  for (const auto& e : ckpt.entries) {
    if (element_count(e.dims) != e.values.size())
      fail(ErrorCode::Shape, "checkpoint entry '" + e.name + "' has a payload of the wrong size");
    write_entry(e.name, e.dims, [&](std::size_t i) { return e.values[i]; }, e.values.size());
  }
  put(out, crc32_of(out), 4);
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kMagic, 4))
    fail(ErrorCode::Format, "not a checkpoint (bad magic)");
  if (bytes.size() < 16) fail(ErrorCode::Format, "checkpoint truncated");
  Reader r{bytes.substr(0, bytes.size() - 4), 4};
  const auto version = r.get(4, "header");
  if (version != kCheckpointVersion)
    fail(ErrorCode::Format, "unsupported checkpoint version " + std::to_string(version));
  Reader tail{bytes, bytes.size() - 4};
  if (tail.get(4, "checksum") != crc32_of(bytes.substr(0, bytes.size() - 4)))
    fail(ErrorCode::Format, "checkpoint checksum mismatch (corrupted or truncated file)");
  const auto count = r.get(4, "header");
  Checkpoint c;
  bool have_meta = false;
  for (std::uint64_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = std::string(r.take(r.get(2, "entry name"), "entry name"));
    const auto rank = r.get(1, "entry rank");
    for (std::uint64_t k = 0; k < rank; ++k) e.dims.push_back(static_cast<std::uint32_t>(r.get(4, "entry dims")));
    const std::size_t n = element_count(e.dims);
    if ((r.bytes.size() - r.pos) / 4 < n) fail(ErrorCode::Format, "checkpoint truncated in entry '" + e.name + "'");
    e.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) e.values[k] = std::bit_cast<float>(static_cast<std::uint32_t>(r.get(4, "payload")));
    if (e.name == kMetaEntry) {
      for (float f : e.values) c.meta.push_back(static_cast<char>(static_cast<unsigned char>(f)));
      have_meta = true;
    } else {
      if (c.find(e.name)) fail(ErrorCode::Format, "duplicate checkpoint entry '" + e.name + "'");
      c.entries.push_back(std::move(e));
    }
  }
  if (r.pos != r.bytes.size()) fail(ErrorCode::Format, "trailing bytes in checkpoint");
  if (!have_meta) fail(ErrorCode::Format, "checkpoint has no metadata entry");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) { write_file(path, serialize_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.what());
  }
}

std::string dump_table(const Checkpoint& ckpt, const std::string& name) {
  std::string out;
  if (name.empty()) {
    for (const auto& e : ckpt.entries) {
      out += e.name;
      for (std::size_t k = 0; k < e.dims.size(); ++k) out += (k ? "x" : " ") + std::to_string(e.dims[k]);
      out += '\n';
    }
    return out;
  }
  const CheckpointEntry* e = ckpt.find(name);
  if (!e) fail(ErrorCode::InvalidArgument, "no table named '" + name + "' in checkpoint");
  const std::size_t rows = e->dims.empty() ? 1 : e->dims[0];
  const std::size_t cols = rows ? e->values.size() / rows : 0;
  out = e->name + " " + std::to_string(rows) + " " + std::to_string(cols) + "\n";
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      auto res = std::to_chars(buf, buf + sizeof buf, e->values[r * cols + c]);
      if (c) out += ' ';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace morpho
