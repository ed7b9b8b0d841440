#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff.hpp"

namespace morpho {

// Binary layout (little-endian):
//   "MCK1" | version u32 | entry count u32
//   per entry: name length u16 | name | rank u8 | dims u32 x rank | f32 payload (row-major)
//   CRC-32 (zlib polynomial) of every preceding byte, u32
// Model metadata travels as the rank-1 entry "meta.json" holding one byte
// of UTF-8 JSON per float.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr const char* kMetaEntry = "meta.json";

struct CheckpointEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct Checkpoint {
  std::vector<CheckpointEntry> entries;
  std::string meta;  // JSON text

  const CheckpointEntry* find(const std::string& name) const;
};

Checkpoint make_checkpoint(const ad::ParameterStore& params, std::string meta);
// All shapes are checked before anything is copied, so a failed restore
// leaves `params` untouched.
void restore_parameters(const Checkpoint& ckpt, ad::ParameterStore& params);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Text rendering of one entry: a "name rows cols" header, then one line of
// values per row. An empty name lists the entries instead.
std::string dump_table(const Checkpoint& ckpt, const std::string& name);

}  // namespace morpho
