// Copyright 2026 The MorphMLP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "morphmlp/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace morph {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;

template <typename U>
void put(std::ostream& os, U value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U get(std::istream& is) {
  U value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(U)))
    throw CheckpointError("checkpoint: truncated file");
  return value;
}

std::vector<CheckpointEntry> read_manifest(std::istream& is) {
  char magic[kMagicLen];
  if (!is.read(magic, kMagicLen) || std::memcmp(magic, kCheckpointMagic, kMagicLen) != 0)
    throw CheckpointError("checkpoint: bad magic, not a MORPHNET1 file");
  const auto count = get<std::uint32_t>(is);
  std::vector<CheckpointEntry> entries(count);
  for (auto& e : entries) {
    const auto len = get<std::uint32_t>(is);
    e.name.resize(len);
    if (!is.read(e.name.data(), len)) throw CheckpointError("checkpoint: truncated name");
    const auto code = get<std::uint8_t>(is);
    if (code > 1) throw CheckpointError("checkpoint: unknown dtype code for " + e.name);
    e.dtype = static_cast<DType>(code);
    const auto rank = get<std::uint32_t>(is);
    e.shape.resize(rank);
    for (auto& extent : e.shape) extent = static_cast<std::int64_t>(get<std::uint64_t>(is));
  }
  return entries;
}

template <typename Stored, typename T>
void read_payload(std::istream& is, std::span<T> dst) {
  std::vector<Stored> buffer(dst.size());
  if (!is.read(reinterpret_cast<char*>(buffer.data()),
               static_cast<std::streamsize>(buffer.size() * sizeof(Stored))))
    throw CheckpointError("checkpoint: truncated payload");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(buffer[i]);
}

}  // namespace

template <typename T>
void save_checkpoint(const ParamList<T>& params, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  os.write(kCheckpointMagic, kMagicLen);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, p] : params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.rank()));
    for (auto extent : p.shape()) put<std::uint64_t>(os, static_cast<std::uint64_t>(extent));
  }
  for (const auto& [name, p] : params)
    os.write(reinterpret_cast<const char*>(p.data().data()),
             static_cast<std::streamsize>(p.data().size_bytes()));
  if (!os) throw CheckpointError("checkpoint: write failed for " + path.string());
}

std::vector<CheckpointEntry> read_checkpoint_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_manifest(is);
}

template <typename T>
LoadReport load_checkpoint(ParamList<T>& params, const std::filesystem::path& path, bool strict) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open " + path.string());
  const auto entries = read_manifest(is);

  std::map<std::string, Tensor<T>*> by_name;
  for (auto& [name, p] : params) by_name[name] = &p;

  if (strict) {
    std::map<std::string, Shape> stored;
    for (const auto& e : entries) stored[e.name] = e.shape;
    bool exact = stored.size() == by_name.size();
    for (const auto& [name, p] : by_name) {
      auto it = stored.find(name);
      exact = exact && it != stored.end() && it->second == p->shape();
    }
    if (!exact)
      throw CheckpointError("checkpoint: " + path.string() +
                            " does not match the model's parameter names and shapes");
  }

  LoadReport report;
  std::map<std::string, bool> seen;
  for (const auto& e : entries) {
    const std::size_t count = static_cast<std::size_t>(numel(e.shape));
    auto it = by_name.find(e.name);
    Tensor<T>* target = nullptr;
    if (it == by_name.end()) {
      report.unexpected.push_back(e.name);
    } else if (it->second->shape() != e.shape) {
      report.mismatched.push_back(e.name);
    } else {
      target = it->second;
    }
    if (target) {
      if (e.dtype == DType::f32)
        read_payload<float>(is, target->mutable_data());
      else
        read_payload<double>(is, target->mutable_data());
      report.loaded.push_back(e.name);
      seen[e.name] = true;
    } else {
      is.seekg(static_cast<std::streamoff>(count * dtype_size(e.dtype)), std::ios::cur);
    }
  }
  for (const auto& [name, p] : params)
    if (!seen.count(name) &&
        std::find(report.mismatched.begin(), report.mismatched.end(), name) ==
            report.mismatched.end())
      report.missing.push_back(name);

  return report;
}

template void save_checkpoint(const ParamList<float>&, const std::filesystem::path&);
template void save_checkpoint(const ParamList<double>&, const std::filesystem::path&);
template LoadReport load_checkpoint(ParamList<float>&, const std::filesystem::path&, bool);
template LoadReport load_checkpoint(ParamList<double>&, const std::filesystem::path&, bool);

}  // namespace morph
